use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use vulncand_core::frontend::{FunctionDecl, ProgramModel, StatementKind, Token, TokenKind};
use vulncand_core::syvc::{extract_syvcs, match_characteristic, CharacteristicSet, SyvcKind};

use crate::{fixture, within, Outcome};

type Found = (String, u32, SyvcKind, String);

fn depth_change(t: &Token) -> i32 {
    match t.text.as_str() {
        "(" | "[" | "{" => 1,
        ")" | "]" | "}" => -1,
        _ => 0,
    }
}

/// Names declared by a declaration statement: for every top-level
/// comma-separated declarator, the last identifier before its first `[`,
/// `(` or `=`.
fn declared_names(tokens: &[Token]) -> Vec<&Token> {
    let mut names = Vec::new();
    let mut depth = 0;
    let mut current: Option<&Token> = None;
    let mut closed = false;
    for t in tokens {
        if depth == 0 && (t.is(",") || t.is(";")) {
            names.extend(current.take());
            closed = false;
            continue;
        }
        if depth == 0 && (t.is("[") || t.is("(") || t.is("=")) {
            closed = true;
        }
        if !closed && depth == 0 && t.kind == TokenKind::Identifier {
            current = Some(t);
        }
        depth += depth_change(t);
    }
    names.extend(current);
    names
}

fn oracle_function(f: &FunctionDecl, set: &CharacteristicSet, out: &mut Vec<Found>) {
    let params: BTreeSet<_> = f.params.iter().map(|p| p.statement).collect();
    let push = |out: &mut Vec<Found>, line: u32, kind: SyvcKind, text: String| {
        if set.kinds.contains(&kind) {
            out.push((f.name.clone(), line, kind, text));
        }
    };
    for s in f.body.iter().filter(|s| !params.contains(&s.id)) {
        let toks = &s.tokens;
        for (k, t) in toks.iter().enumerate() {
            if t.kind == TokenKind::Identifier
                && set.fc_calls.contains(&t.text)
                && toks.get(k + 1).is_some_and(|n| n.is("("))
            {
                push(out, t.line, SyvcKind::FC, t.text.clone());
            }
        }
        match s.kind {
            StatementKind::Declaration => {
                let brackets = toks.iter().any(|t| t.is("[")) && toks.iter().any(|t| t.is("]"));
                let star = toks.iter().any(|t| t.is("*"));
                for name in declared_names(toks) {
                    if brackets {
                        push(out, name.line, SyvcKind::AU, name.text.clone());
                    }
                    if star {
                        push(out, name.line, SyvcKind::PU, name.text.clone());
                    }
                }
            }
            StatementKind::Expression | StatementKind::Call => {
                if let Some(eq) = toks.iter().position(|t| t.is("=")) {
                    if toks[eq + 1..].iter().any(|t| t.kind == TokenKind::Identifier) {
                        push(out, toks[0].line, SyvcKind::AE, s.text());
                    }
                }
            }
            _ => {}
        }
    }
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let src = std::fs::read_to_string(fixture("syvc_corpus.c")).map_err(|e| e.to_string())?;
    let mut program = ProgramModel::new();
    program.add_source(&src, "syvc_corpus.c").map_err(|e| e.to_string())?;
    if program.functions.len() != 30 {
        return Err(format!("corpus has {} functions, expected 30", program.functions.len()));
    }
    let set = CharacteristicSet::default();
    let extracted = extract_syvcs(&program, &set);

    // Every (node, kind) pair, tested one at a time.
    let mut brute = Vec::new();
    for f in &program.functions {
        for node in &f.ast.nodes {
            for kind in SyvcKind::ALL {
                if node.statement.is_some() && match_characteristic(f, node.id, kind, &set) {
                    brute.push((f.id, node.id, kind));
                }
            }
        }
    }
    brute.sort();
    let mut got: Vec<_> = extracted.iter().map(|s| (s.function, s.node, s.kind)).collect();
    got.sort();
    if got != brute {
        return Err(format!("extraction has {} entries, node x kind enumeration has {}", got.len(), brute.len()));
    }

    // Independent token-level reading of the four characteristics.
    let mut expected = Vec::new();
    for f in &program.functions {
        oracle_function(f, &set, &mut expected);
    }
    expected.sort();
    let mut actual: Vec<Found> = extracted
        .iter()
        .map(|s| (program.function(s.function).name.clone(), s.line, s.kind, s.anchor_text.clone()))
        .collect();
    actual.sort();
    let missing: Vec<_> = expected.iter().filter(|e| !actual.contains(e)).collect();
    let extra: Vec<_> = actual.iter().filter(|a| !expected.contains(a)).collect();
    if !missing.is_empty() || !extra.is_empty() || expected.len() != actual.len() {
        return Err(format!("missing {missing:?}; unexpected {extra:?}"));
    }
    within(Duration::from_secs(5), start.elapsed())?;
    let kinds: BTreeSet<_> = actual.iter().map(|a| a.2).collect();
    if kinds.len() != 4 {
        return Err(format!("corpus only exercises {kinds:?}"));
    }
    Ok(format!("{} candidates over 30 functions, 0 discrepancies", actual.len()))
}
