//! Skip-gram with negative sampling, plus a hash-seeded fallback vector for
//! symbols outside the vocabulary.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VectorizeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingMode {
    Skipgram,
    Hash,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipGramConfig {
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f32,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self { window: 5, negatives: 5, epochs: 5, learning_rate: 0.025 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub seed: u64,
    pub mode: TrainingMode,
    pub vocab: BTreeMap<String, Vec<f32>>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic vector in `[-1, 1)^dim` derived from the symbol and seed.
pub fn hash_vector(symbol: &str, dim: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(symbol.as_bytes()) ^ seed);
    (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect()
}

impl EmbeddingTable {
    /// Vector for `symbol`; symbols outside the vocabulary get their hash vector.
    pub fn lookup(&self, symbol: &str) -> Vec<f32> {
        match self.vocab.get(symbol) {
            Some(v) => v.clone(),
            None => hash_vector(symbol, self.dim, self.seed),
        }
    }

    pub fn cosine(&self, a: &str, b: &str) -> f32 {
        let (x, y) = (self.lookup(a), self.lookup(b));
        let dot: f32 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let nx: f32 = x.iter().map(|v| v * v).sum::<f32>().sqrt();
        let ny: f32 = y.iter().map(|v| v * v).sum::<f32>().sqrt();
        dot / (nx * ny).max(f32::MIN_POSITIVE)
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains symbol embeddings over `corpus` (one symbol sequence per candidate).
pub fn train_embeddings(
    corpus: &[Vec<String>],
    dim: usize,
    seed: u64,
    mode: TrainingMode,
    config: &SkipGramConfig,
) -> Result<EmbeddingTable, VectorizeError> {
    if dim == 0 {
        return Err(VectorizeError::Config("embedding dimension must be positive".into()));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for sentence in corpus {
        for s in sentence {
            *counts.entry(s.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(VectorizeError::EmptyCorpus);
    }
    let words: Vec<&str> = counts.keys().copied().collect();
    let index: BTreeMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (*w, i)).collect();

    if mode == TrainingMode::Hash {
        let vocab = words.iter().map(|w| (w.to_string(), hash_vector(w, dim, seed))).collect();
        return Ok(EmbeddingTable { dim, seed, mode, vocab });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = words.len();
    let mut input: Vec<f32> = (0..v * dim).map(|_| (rng.gen::<f32>() - 0.5) / dim as f32).collect();
    let mut output = vec![0.0f32; v * dim];
    let weights: Vec<f64> = words.iter().map(|w| (counts[w] as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights).map_err(|e| VectorizeError::Config(e.to_string()))?;

    let ids: Vec<Vec<usize>> =
        corpus.iter().map(|s| s.iter().map(|w| index[w.as_str()]).collect()).collect();
    let total_steps = (config.epochs * ids.iter().map(Vec::len).sum::<usize>()).max(1);
    let mut step = 0usize;
    let mut grad = vec![0.0f32; dim];

    for _ in 0..config.epochs {
        for sentence in &ids {
            for (pos, &center) in sentence.iter().enumerate() {
                let progress = step as f32 / total_steps as f32;
                let lr = (config.learning_rate * (1.0 - progress)).max(config.learning_rate * 1e-4);
                step += 1;
                let shrink = if config.window > 1 { rng.gen_range(0..config.window) } else { 0 };
                let reach = config.window - shrink;
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sentence.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = sentence[ctx_pos];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let inp = context * dim;
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (center, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = target * dim;
                        let dot: f32 = (0..dim).map(|i| input[inp + i] * output[out + i]).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for i in 0..dim {
                            grad[i] += g * output[out + i];
                            output[out + i] += g * input[inp + i];
                        }
                    }
                    for i in 0..dim {
                        input[inp + i] += grad[i];
                    }
                }
            }
        }
    }

    let vocab = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.to_string(), input[i * dim..(i + 1) * dim].to_vec()))
        .collect();
    Ok(EmbeddingTable { dim, seed, mode, vocab })
}
