//! Symbolization of candidates and their encoding into fixed-length vectors.

mod embedding;
mod store;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{tokenize, FrontendError, TokenKind, BUILTIN_TYPE_NAMES};
use crate::slicer::{Region, Sevc};
use crate::syvc::CharacteristicSet;

pub use embedding::{hash_vector, train_embeddings, EmbeddingTable, SkipGramConfig, TrainingMode};
pub use store::{read_store, write_store, StoreEntry, StoreHeader, STORE_MAGIC, STORE_VERSION};

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("cannot re-lex statement text: {0}")]
    Lex(#[from] FrontendError),
    #[error("empty embedding corpus")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("candidate {syvc}: anchor would be truncated (capacity {capacity} symbols, {backward}+{anchor}+{forward} present)")]
    AnchorTruncated { syvc: u32, capacity: usize, backward: usize, anchor: usize, forward: usize },
    #[error("invalid vector store: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Symbol used for every string literal.
pub const STRING_SYMBOL: &str = "\"STR\"";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicSevc {
    pub syvc: u32,
    pub symbols: Vec<String>,
    /// Index of the first anchor symbol (= length of the backward part).
    pub anchor_start: usize,
    /// One past the last anchor symbol.
    pub anchor_end: usize,
}

impl SymbolicSevc {
    pub fn backward_len(&self) -> usize {
        self.anchor_start
    }

    pub fn anchor_len(&self) -> usize {
        self.anchor_end - self.anchor_start
    }

    pub fn forward_len(&self) -> usize {
        self.symbols.len() - self.anchor_end
    }
}

/// Renames user variables to `V1, V2, ...` and non-library callees to
/// `F1, F2, ...` in first-appearance order. Keywords, operators, constants,
/// call-list names, builtin type names and `NULL` are kept.
pub fn symbolize(sevc: &Sevc, set: &CharacteristicSet) -> Result<SymbolicSevc, VectorizeError> {
    let mut vars: BTreeMap<String, String> = BTreeMap::new();
    let mut funcs: BTreeMap<String, String> = BTreeMap::new();
    let mut symbols = Vec::new();
    let (mut anchor_start, mut anchor_end) = (0, 0);
    for stmt in &sevc.statements {
        let tokens = tokenize(&stmt.text)?;
        if stmt.region == Region::Anchor {
            let span = sevc.anchor_span;
            anchor_start = symbols.len() + span.start as usize;
            anchor_end = symbols.len() + span.end as usize;
        }
        for (k, t) in tokens.iter().enumerate() {
            let sym = match t.kind {
                TokenKind::StringLiteral => STRING_SYMBOL.to_string(),
                TokenKind::Identifier => {
                    let name = t.text.as_str();
                    if set.fc_calls.contains(name) || BUILTIN_TYPE_NAMES.contains(&name) || name == "NULL" {
                        name.to_string()
                    } else if tokens.get(k + 1).is_some_and(|n| n.is("(")) {
                        let next = funcs.len() + 1;
                        funcs.entry(name.to_string()).or_insert_with(|| format!("F{next}")).clone()
                    } else {
                        let next = vars.len() + 1;
                        vars.entry(name.to_string()).or_insert_with(|| format!("V{next}")).clone()
                    }
                }
                _ => t.text.clone(),
            };
            symbols.push(sym);
        }
    }
    Ok(SymbolicSevc { syvc: sevc.syvc, symbols, anchor_start, anchor_end })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    None,
    /// Forward part short: leftmost symbols dropped.
    Left,
    /// Backward part short: rightmost symbols dropped.
    Right,
    /// Both parts long: symbols dropped from both ends.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVector {
    pub syvc: u32,
    pub program: String,
    pub values: Vec<f32>,
    pub theta: usize,
    pub dim: usize,
    /// Symbol capacity `theta / dim`.
    pub capacity: usize,
    /// Symbols kept (the rest is zero padding).
    pub used: usize,
    pub backward: usize,
    pub anchor: usize,
    pub forward: usize,
    pub dropped_left: usize,
    pub dropped_right: usize,
    pub truncation: Truncation,
    pub label: Option<u8>,
}

/// Chooses how many symbols to drop on each side so that at most `capacity`
/// remain. Returns `(left, right, branch)`.
pub fn truncation_plan(
    backward: usize,
    anchor: usize,
    forward: usize,
    capacity: usize,
) -> Option<(usize, usize, Truncation)> {
    let n = backward + anchor + forward;
    if n <= capacity {
        return Some((0, 0, Truncation::None));
    }
    let e = n - capacity;
    let (left, right, branch) = if 2 * forward < capacity {
        (e, 0, Truncation::Left)
    } else if 2 * backward < capacity {
        (0, e, Truncation::Right)
    } else {
        (e.div_ceil(2), e / 2, Truncation::Both)
    };
    (left <= backward && right <= forward).then_some((left, right, branch))
}

/// Concatenates symbol vectors, truncating around the anchor or zero-padding
/// the tail so that the result has exactly `theta` values.
pub fn encode(sym: &SymbolicSevc, table: &EmbeddingTable, theta: usize) -> Result<SampleVector, VectorizeError> {
    let d = table.dim;
    if d == 0 || theta == 0 || !theta.is_multiple_of(d) {
        return Err(VectorizeError::Config(format!("theta {theta} is not a positive multiple of dim {d}")));
    }
    let capacity = theta / d;
    let (b, a, f) = (sym.backward_len(), sym.anchor_len(), sym.forward_len());
    let (left, right, truncation) = truncation_plan(b, a, f, capacity).ok_or(VectorizeError::AnchorTruncated {
        syvc: sym.syvc,
        capacity,
        backward: b,
        anchor: a,
        forward: f,
    })?;
    let kept = &sym.symbols[left..sym.symbols.len() - right];
    let mut values = Vec::with_capacity(theta);
    for s in kept {
        values.extend(table.lookup(s));
    }
    values.resize(theta, 0.0);
    Ok(SampleVector {
        syvc: sym.syvc,
        program: String::new(),
        values,
        theta,
        dim: d,
        capacity,
        used: kept.len(),
        backward: b - left,
        anchor: a,
        forward: f - right,
        dropped_left: left,
        dropped_right: right,
        truncation,
        label: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{StmtId, TokenSpan};
    use crate::slicer::{LabelSlot, SevcStatement};
    use crate::syvc::SyvcKind;

    fn sevc(texts: &[&str], anchor: usize, span: (u32, u32)) -> Sevc {
        let statements = texts
            .iter()
            .enumerate()
            .map(|(i, t)| SevcStatement {
                file: "t.c".into(),
                function: "f".into(),
                statement: StmtId(i as u32),
                line: i as u32 + 1,
                last_line: i as u32 + 1,
                text: t.to_string(),
                region: match i.cmp(&anchor) {
                    std::cmp::Ordering::Less => Region::Backward,
                    std::cmp::Ordering::Equal => Region::Anchor,
                    std::cmp::Ordering::Greater => Region::Forward,
                },
            })
            .collect();
        Sevc {
            syvc: 0,
            kind: SyvcKind::AE,
            program: "t.c".into(),
            anchor: StmtId(anchor as u32),
            anchor_span: TokenSpan { start: span.0, end: span.1 },
            statements,
            label: LabelSlot::Unset,
        }
    }

    fn table(dim: usize) -> EmbeddingTable {
        EmbeddingTable { dim, seed: 0, mode: TrainingMode::Hash, vocab: BTreeMap::new() }
    }

    fn symbolic(b: usize, a: usize, f: usize) -> SymbolicSevc {
        SymbolicSevc {
            syvc: 0,
            symbols: (0..b + a + f).map(|i| format!("s{i}")).collect(),
            anchor_start: b,
            anchor_end: b + a,
        }
    }

    #[test]
    fn user_names_are_numbered_by_first_appearance() {
        let s = sevc(&["int x = foo ( y ) ;"], 0, (0, 7));
        let sym = symbolize(&s, &CharacteristicSet::default()).unwrap();
        assert_eq!(sym.symbols, ["int", "V1", "=", "F1", "(", "V2", ")", ";"]);
    }

    #[test]
    fn library_calls_and_literals_survive() {
        let s = sevc(&["data = dataBuffer - 8 ;", "memset ( data , 'A' , 100 - 1 ) ;"], 0, (0, 6));
        let sym = symbolize(&s, &CharacteristicSet::default()).unwrap();
        assert_eq!(
            sym.symbols,
            ["V1", "=", "V2", "-", "8", ";", "memset", "(", "V1", ",", "'A'", ",", "100", "-", "1", ")", ";"]
        );
        assert_eq!((sym.anchor_start, sym.anchor_end), (0, 6));
    }

    #[test]
    fn alpha_renaming_invariance_and_strings() {
        let set = CharacteristicSet::default();
        let a = symbolize(&sevc(&["p = q ;", "printf ( \"%s\" , p ) ;"], 1, (0, 1)), &set).unwrap();
        let b = symbolize(&sevc(&["m = n ;", "printf ( \"other\" , m ) ;"], 1, (0, 1)), &set).unwrap();
        assert_eq!(a, b);
        assert!(a.symbols.contains(&STRING_SYMBOL.to_string()));
        assert_eq!(a.anchor_start, 4);
    }

    #[test]
    fn short_input_is_zero_padded() {
        let v = encode(&symbolic(1, 1, 1), &table(2), 10).unwrap();
        assert_eq!(v.values.len(), 10);
        assert!(v.values[..6].iter().any(|x| *x != 0.0));
        assert!(v.values[6..].iter().all(|x| *x == 0.0));
        assert_eq!(v.truncation, Truncation::None);
    }

    #[test]
    fn short_forward_drops_left() {
        let v = encode(&symbolic(6, 1, 1), &table(1), 6).unwrap();
        assert_eq!(v.truncation, Truncation::Left);
        assert_eq!((v.dropped_left, v.dropped_right), (2, 0));
        let t = table(1);
        let expected: Vec<f32> = (2..8).map(|i| t.lookup(&format!("s{i}"))[0]).collect();
        assert_eq!(v.values, expected);
    }

    #[test]
    fn long_both_sides_split_excess() {
        let v = encode(&symbolic(5, 1, 5), &table(1), 8).unwrap();
        assert_eq!(v.truncation, Truncation::Both);
        assert_eq!((v.dropped_left, v.dropped_right), (2, 1));
    }

    #[test]
    fn short_backward_drops_right() {
        let v = encode(&symbolic(1, 1, 9), &table(1), 6).unwrap();
        assert_eq!(v.truncation, Truncation::Right);
        assert_eq!((v.dropped_left, v.dropped_right, v.forward), (0, 5, 4));
    }

    #[test]
    fn oversized_anchor_is_an_error() {
        assert!(matches!(encode(&symbolic(0, 9, 0), &table(1), 4), Err(VectorizeError::AnchorTruncated { .. })));
        assert!(matches!(encode(&symbolic(1, 1, 1), &table(3), 10), Err(VectorizeError::Config(_))));
    }
}
