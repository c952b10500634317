use std::path::PathBuf;
use std::time::{Duration, Instant};

use vulncand_core::eval::format_metric;
use vulncand_core::model::{Preset, DEFAULT_DELTA};
use vulncand_core::pipeline::{Manifest, Pipeline, RunConfig, SplitRecord};

use crate::{within, Outcome};

const SEEDS: [u64; 3] = [1, 2, 3];

pub fn run() -> Outcome {
    let start = Instant::now();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/mini/manifest.json");
    let manifest = Manifest::load(&path).map_err(|e| e.to_string())?;
    let programs = manifest.programs.len();
    if !(35..=45).contains(&programs) {
        return Err(format!("mini-corpus has {programs} programs"));
    }
    let mut report = Vec::new();
    let mut failures = Vec::new();
    for seed in SEEDS {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let pipeline = Pipeline::new(Some(manifest.clone()), RunConfig::new(Preset::Desk, seed), out.path().into())
            .map_err(|e| e.to_string())?;
        let (_, metrics) = pipeline.run_all(DEFAULT_DELTA).map_err(|e| format!("seed {seed}: {e}"))?;
        let split: SplitRecord = serde_json::from_str(
            &std::fs::read_to_string(out.path().join("split.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        if split.train.len() + split.test.len() != programs || split.test.len() != programs / 5 {
            return Err(format!("seed {seed}: split {} / {}", split.train.len(), split.test.len()));
        }
        let f1 = metrics.metrics.f1;
        report.push(format!("seed {seed}: F1 {} on {} samples", format_metric(f1), metrics.samples));
        if f1.is_none_or(|f| f < 0.80) {
            failures.push(seed);
        }
    }
    within(Duration::from_secs(15 * 60), start.elapsed())?;
    if failures.is_empty() {
        Ok(report.join(", "))
    } else {
        Err(format!("F1 below 0.80 for seeds {failures:?}: {}", report.join(", ")))
    }
}
