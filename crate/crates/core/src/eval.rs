//! Program-level train/test splits, confusion counts and detection metrics.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("need at least 2 programs to split, found {0}")]
    TooFewPrograms(usize),
    #[error("split ratio must lie in (0, 1), got {0}")]
    Ratio(String),
}

/// Partitions sample indices so that every program lands on exactly one side.
/// `programs[i]` is the program of sample `i`.
pub fn split_by_program<S: AsRef<str>>(
    programs: &[S],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::Ratio(ratio.to_string()));
    }
    let mut unique: Vec<&str> = programs.iter().map(AsRef::as_ref).collect::<BTreeSet<_>>().into_iter().collect();
    if unique.len() < 2 {
        return Err(EvalError::TooFewPrograms(unique.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..unique.len()).rev() {
        unique.swap(i, rng.gen_range(0..=i));
    }
    let n_train = ((unique.len() as f64 * ratio).round() as usize).clamp(1, unique.len() - 1);
    let train: BTreeSet<&str> = unique[..n_train].iter().copied().collect();
    let (mut tr, mut te) = (Vec::new(), Vec::new());
    for (i, p) in programs.iter().enumerate() {
        if train.contains(p.as_ref()) {
            tr.push(i);
        } else {
            te.push(i);
        }
    }
    Ok((tr, te))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    /// Counts `(prediction, label)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut c = Self::default();
        for (pred, label) in pairs {
            match (pred != 0, label != 0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Metrics with `None` for zero denominators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

/// `F1 = 2PR/(P+R)` with `R = 1 - FNR`, evaluated as `2TP/(2TP+FP+FN)`.
pub fn compute_metrics(c: &ConfusionCounts) -> MetricsReport {
    let precision = ratio(c.tp, c.tp + c.fp);
    let fnr = ratio(c.fn_, c.tp + c.fn_);
    let f1 = match (precision, fnr) {
        (Some(_), Some(_)) if c.tp > 0 => ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        _ => None,
    };
    MetricsReport {
        fpr: ratio(c.fp, c.fp + c.tn),
        fnr,
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        f1,
    }
}

pub fn format_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

/// Mean of the defined values; `None` when none are defined.
pub fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>8}", "metric", "value")?;
        for (name, v) in [
            ("FPR", self.fpr),
            ("FNR", self.fnr),
            ("A", self.accuracy),
            ("P", self.precision),
            ("F1", self.f1),
        ] {
            writeln!(f, "{name:<10} {:>8}", format_metric(v))?;
        }
        Ok(())
    }
}
