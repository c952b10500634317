use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::model::{Bgru, Example, Shape};

use crate::{within, Outcome};

const H: f64 = 1e-5;

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut worst_component = 0.0f64;
    let mut params = 0;
    for case in 0..20 {
        let shape = Shape {
            input_dim: rng.gen_range(1..=4),
            hidden: rng.gen_range(1..=8),
            layers: rng.gen_range(1..=2),
            dense_dim: rng.gen_range(1..=8),
        };
        let mut model = Bgru::init(shape, &mut rng);
        // Spread the weights so that gates leave their linear region.
        for p in &mut model.params {
            *p *= 3.0;
        }
        let batch: Vec<Example> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let steps = rng.gen_range(1..=10);
                Example {
                    inputs: (0..steps * shape.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    steps,
                    label: rng.gen_range(0..=1),
                }
            })
            .collect();
        let refs: Vec<&Example> = batch.iter().collect();
        let (_, analytic) = model.loss_and_gradients(&refs).map_err(|e| e.to_string())?;
        let mut numeric = vec![0.0; analytic.len()];
        for i in 0..model.params.len() {
            let orig = model.params[i];
            model.params[i] = orig + H;
            let up = model.loss_and_gradients(&refs).map_err(|e| e.to_string())?.0;
            model.params[i] = orig - H;
            let down = model.loss_and_gradients(&refs).map_err(|e| e.to_string())?.0;
            model.params[i] = orig;
            numeric[i] = (up - down) / (2.0 * H);
        }
        let diff = norm(analytic.iter().zip(&numeric).map(|(a, n)| a - n));
        let scale = norm(analytic.iter().copied()).max(norm(numeric.iter().copied()));
        let rel = if scale == 0.0 { diff } else { diff / scale };
        for (a, n) in analytic.iter().zip(&numeric) {
            let denom = a.abs().max(n.abs());
            if denom > 1e-6 {
                worst_component = worst_component.max((a - n).abs() / denom);
            }
        }
        if rel > 1e-4 {
            return Err(format!("case {case} {shape:?}: relative error {rel:.3e}"));
        }
        worst = worst.max(rel);
        params += analytic.len();
    }
    within(Duration::from_secs(60), start.elapsed())?;
    if worst_component > 1e-4 {
        return Err(format!("largest per-parameter relative error {worst_component:.3e}"));
    }
    Ok(format!("20 instances, {params} parameters, worst relative error {worst:.2e} (per parameter {worst_component:.2e})"))
}
