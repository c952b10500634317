use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::eval::{compute_metrics, ConfusionCounts};
use vulncand_core::model::{predict_all, train, Example, Hyperparams};

use crate::{within, Outcome};

const D: usize = 4;
const L: usize = 10;

/// Random sequences in `[-1, 1]^4`; positives carry one marker step whose
/// first channel is 2.5, negatives one whose first channel is -2.5.
fn dataset(n: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let steps = rng.gen_range(2..=L);
            let mut inputs: Vec<f64> = (0..steps * D).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let at = rng.gen_range(0..steps);
            inputs[at * D] = if label == 1 { 2.5 } else { -2.5 };
            Example { inputs, steps, label }
        })
        .collect()
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let data = dataset(200, 77);
    let hp = Hyperparams {
        hidden: 8,
        dense_dim: 8,
        layers: 1,
        seq_len: L,
        input_dim: D,
        epochs: 200,
        learning_rate: 0.01,
        ..Hyperparams::desk(7)
    };
    let (model, report) = train(&data, &hp).map_err(|e| e.to_string())?;
    let first = &report.epoch_losses[..5];
    if !first.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("loss not strictly decreasing over the first 5 epochs: {first:?}"));
    }
    let preds = predict_all(&model, &data, hp.threshold).map_err(|e| e.to_string())?;
    let counts = ConfusionCounts::from_pairs(preds.iter().zip(&data).map(|(p, e)| (p.0, e.label)));
    let f1 = compute_metrics(&counts).f1.unwrap_or(0.0);
    if f1 < 0.95 {
        return Err(format!("F1 {f1:.3} after {} epochs", hp.epochs));
    }
    let (again, report2) = train(&data, &hp).map_err(|e| e.to_string())?;
    let same = model.params.len() == again.params.len()
        && model.params.iter().zip(&again.params).all(|(a, b)| a.to_bits() == b.to_bits())
        && report.epoch_losses.iter().zip(&report2.epoch_losses).all(|(a, b)| a.to_bits() == b.to_bits());
    if !same {
        return Err("same-seed retraining produced different parameters".into());
    }
    within(Duration::from_secs(300), start.elapsed())?;
    Ok(format!(
        "F1 {f1:.3} after {} epochs, first losses {:.4?}, retrain bit-identical",
        hp.epochs, first
    ))
}
