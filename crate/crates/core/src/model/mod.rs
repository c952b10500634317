//! Bidirectional GRU classifier: training with Adamax, prediction,
//! checkpoints and activation-delta explanations.
//!
//! Training minimizes binary cross-entropy on the output at the last
//! non-padding timestep. Sequences are packed: padding steps are not fed to
//! either direction. Dropout applies to layer outputs between stacked layers
//! only, so a single-layer network trains without it.

mod adamax;
mod bgru;
mod checkpoint;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vectorizer::SampleVector;

pub use adamax::Adamax;
pub use bgru::{ActivationTrace, Bgru, Shape};
pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite loss on sample {index}")]
    NonFiniteLoss { index: usize },
    #[error("invalid hyperparameters: {0}")]
    Config(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint built for theta={} dim={}, run uses theta={} dim={}", .found.0, .found.1, .expected.0, .expected.1)]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Paper,
    Desk,
    Custom,
}

impl FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Self::Paper),
            "desk" => Ok(Self::Desk),
            "custom" => Ok(Self::Custom),
            _ => Err(ModelError::Config(format!("unknown preset `{s}` (expected paper, desk or custom)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Desk => "desk",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dropout: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dense_dim: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub layers: usize,
    /// Sequence length L (symbols per sample).
    pub seq_len: usize,
    /// Symbol vector width d.
    pub input_dim: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Hyperparams {
    /// Full-scale settings: hidden 500, two layers, L = 500, d = 30.
    pub fn paper(seed: u64) -> Self {
        Self {
            dropout: 0.2,
            batch_size: 16,
            epochs: 20,
            dense_dim: 256,
            learning_rate: 0.002,
            hidden: 500,
            layers: 2,
            seq_len: 500,
            input_dim: 30,
            seed,
            threshold: 0.5,
        }
    }

    /// CPU-sized settings.
    pub fn desk(seed: u64) -> Self {
        Self {
            dropout: 0.2,
            batch_size: 16,
            epochs: 60,
            dense_dim: 32,
            learning_rate: 0.01,
            hidden: 32,
            layers: 1,
            seq_len: 100,
            input_dim: 30,
            seed,
            threshold: 0.5,
        }
    }

    pub fn preset(preset: Preset, seed: u64) -> Self {
        match preset {
            Preset::Paper => Self::paper(seed),
            Preset::Desk | Preset::Custom => Self::desk(seed),
        }
    }

    pub fn shape(&self) -> Shape {
        Shape { input_dim: self.input_dim, hidden: self.hidden, layers: self.layers, dense_dim: self.dense_dim }
    }

    pub fn theta(&self) -> usize {
        self.seq_len * self.input_dim
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("batch size", self.batch_size),
            ("epochs", self.epochs),
            ("dense dimension", self.dense_dim),
            ("hidden dimension", self.hidden),
            ("layers", self.layers),
            ("sequence length", self.seq_len),
            ("input dimension", self.input_dim),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::Config(format!("{name} must be positive")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config("dropout must lie in [0, 1)".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ModelError::Config("threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One packed input sequence: `steps` rows of `d` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub inputs: Vec<f64>,
    pub steps: usize,
    pub label: u8,
}

impl Example {
    /// Drops the zero-padding tail. An empty vector becomes one zero step.
    pub fn from_vector(v: &SampleVector) -> Self {
        let steps = v.used.max(1);
        let mut inputs: Vec<f64> = v.values.iter().take(v.used * v.dim).map(|x| f64::from(*x)).collect();
        inputs.resize(steps * v.dim, 0.0);
        Self { inputs, steps, label: v.label.unwrap_or(0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Minibatch training with seeded shuffling and Adamax.
pub fn train(data: &[Example], hp: &Hyperparams) -> Result<(Bgru, TrainReport), ModelError> {
    hp.validate()?;
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if let Some(ex) = data.iter().find(|e| e.steps > hp.seq_len) {
        return Err(ModelError::Shape(format!("sample has {} steps, L is {}", ex.steps, hp.seq_len)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut model = Bgru::init(hp.shape(), &mut rng);
    let mut opt = Adamax::new(model.params.len(), hp.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hp.epochs);
    for _ in 0..hp.epochs {
        shuffle(&mut order, &mut rng);
        let mut total = 0.0;
        for batch in order.chunks(hp.batch_size) {
            let seeds: Vec<u64> = batch.iter().map(|_| rng.gen()).collect();
            let results: Vec<Result<(f64, Vec<f64>), ModelError>> = batch
                .par_iter()
                .zip(seeds)
                .map(|(&i, seed)| {
                    let mut local = ChaCha8Rng::seed_from_u64(seed);
                    let (loss, g) = model.sample_gradient(&data[i], Some((hp.dropout, &mut local)))?;
                    if loss.is_finite() {
                        Ok((loss, g))
                    } else {
                        Err(ModelError::NonFiniteLoss { index: i })
                    }
                })
                .collect();
            let mut grad = vec![0.0; model.params.len()];
            for r in results {
                let (loss, g) = r?;
                total += loss;
                grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
            let n = batch.len() as f64;
            grad.iter_mut().for_each(|v| *v /= n);
            opt.step(&mut model.params, &grad);
        }
        epoch_losses.push(total / data.len() as f64);
    }
    Ok((model, TrainReport { seed: hp.seed, epoch_losses, steps: opt.t }))
}

fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

/// Predictions for many samples, in input order.
pub fn predict_all(model: &Bgru, data: &[Example], threshold: f64) -> Result<Vec<(u8, f64)>, ModelError> {
    data.par_iter().map(|ex| model.predict(ex, threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Influence {
    TowardVulnerable,
    TowardNotVulnerable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalToken {
    /// Zero-based timestep of the token.
    pub index: usize,
    pub symbol: String,
    pub change: f64,
    pub influence: Influence,
}

pub const DEFAULT_DELTA: f64 = 0.6;

/// Tokens whose activation jumps by at least `delta` from the previous step.
pub fn explain(trace: &ActivationTrace, symbols: &[String], delta: f64) -> Vec<CriticalToken> {
    let n = trace.outputs.len().min(symbols.len());
    (1..n)
        .filter_map(|t| {
            let change = trace.outputs[t] - trace.outputs[t - 1];
            let influence = if change >= delta {
                Influence::TowardVulnerable
            } else if change <= -delta {
                Influence::TowardNotVulnerable
            } else {
                return None;
            };
            Some(CriticalToken { index: t, symbol: symbols[t].clone(), change, influence })
        })
        .collect()
}
