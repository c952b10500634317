use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::vectorizer::{encode, EmbeddingTable, SymbolicSevc, Truncation, TrainingMode, VectorizeError};

use crate::{within, Outcome};

/// Symbol `k` embeds as `d` copies of `k + 1`, so kept symbols can be read
/// back from the values.
fn table(symbols: usize, d: usize) -> EmbeddingTable {
    let vocab: BTreeMap<String, Vec<f32>> = (0..symbols).map(|k| (format!("s{k}"), vec![(k + 1) as f32; d])).collect();
    EmbeddingTable { dim: d, seed: 0, mode: TrainingMode::Hash, vocab }
}

/// Expected `(dropped left, dropped right, branch)`, or `None` when the
/// anchor cannot survive.
fn expected(b: usize, a: usize, f: usize, l: usize) -> Option<(usize, usize, Truncation)> {
    let n = b + a + f;
    if n <= l {
        return Some((0, 0, Truncation::None));
    }
    let e = n - l;
    let half = l as f64 / 2.0;
    let plan = if (f as f64) < half {
        (e, 0, Truncation::Left)
    } else if (b as f64) < half {
        (0, e, Truncation::Right)
    } else {
        (e.div_ceil(2), e / 2, Truncation::Both)
    };
    (plan.0 <= b && plan.1 <= f).then_some(plan)
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut branches: BTreeMap<String, usize> = BTreeMap::new();
    for case in 0..1000 {
        let (b, a, f) = (rng.gen_range(0..=40), rng.gen_range(1..=4), rng.gen_range(0..=40));
        let l = rng.gen_range(1..=48);
        let d = rng.gen_range(1..=6);
        let theta = l * d;
        let n = b + a + f;
        let sym = SymbolicSevc {
            syvc: case,
            symbols: (0..n).map(|k| format!("s{k}")).collect(),
            anchor_start: b,
            anchor_end: b + a,
        };
        let got = encode(&sym, &table(n, d), theta);
        let ctx = format!("case {case} (b={b}, a={a}, f={f}, L={l}, d={d})");
        let Some((left, right, branch)) = expected(b, a, f, l) else {
            match got {
                Err(VectorizeError::AnchorTruncated { .. }) => {
                    *branches.entry("anchor-error".into()).or_default() += 1;
                    continue;
                }
                other => return Err(format!("{ctx}: expected an anchor error, got {other:?}")),
            }
        };
        let v = got.map_err(|e| format!("{ctx}: {e}"))?;
        if v.values.len() != theta {
            return Err(format!("{ctx}: {} values, theta {theta}", v.values.len()));
        }
        if v.truncation != branch || v.dropped_left != left || v.dropped_right != right {
            return Err(format!("{ctx}: branch {:?} dropping ({}, {}), expected {branch:?} ({left}, {right})", v.truncation, v.dropped_left, v.dropped_right));
        }
        let kept = n - left - right;
        let ids: Vec<usize> = v.values[..kept * d]
            .chunks(d)
            .map(|c| c[0] as usize - 1)
            .collect();
        if ids != (left..n - right).collect::<Vec<_>>() {
            return Err(format!("{ctx}: kept symbols {ids:?}"));
        }
        if v.values[kept * d..].iter().any(|x| *x != 0.0) {
            return Err(format!("{ctx}: padding tail is not all zeros"));
        }
        if !(b..b + a).all(|k| ids.contains(&k)) {
            return Err(format!("{ctx}: anchor symbols lost"));
        }
        match branch {
            Truncation::Left if right != 0 || v.forward != f => return Err(format!("{ctx}: left branch touched the forward part")),
            Truncation::Right if left != 0 || v.backward != b => return Err(format!("{ctx}: right branch touched the backward part")),
            _ => {}
        }
        *branches.entry(format!("{branch:?}")).or_default() += 1;
    }
    within(Duration::from_secs(10), start.elapsed())?;
    if branches.len() < 5 {
        return Err(format!("not every branch exercised: {branches:?}"));
    }
    Ok(format!("1000 configurations {branches:?}"))
}
