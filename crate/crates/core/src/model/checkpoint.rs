//! Checkpoint layout: 8-byte magic, `u32` version, `u32` header length, JSON
//! header, then `param_count` little-endian `f64` values.

use serde::{Deserialize, Serialize};

use super::{Bgru, Hyperparams, ModelError};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"BGRUCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub seed: u64,
    pub theta: usize,
    pub dim: usize,
    pub hyperparams: Hyperparams,
    pub param_count: usize,
}

pub fn write_checkpoint(model: &Bgru, hp: &Hyperparams, theta: usize) -> Vec<u8> {
    let header = CheckpointHeader {
        version: CHECKPOINT_VERSION,
        seed: hp.seed,
        theta,
        dim: hp.input_dim,
        hyperparams: hp.clone(),
        param_count: model.params.len(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + model.params.len() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in &model.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(msg.into())
}

/// Loads a checkpoint. With `expect = Some((theta, dim))` the stored
/// dimensions must match.
pub fn read_checkpoint(bytes: &[u8], expect: Option<(usize, usize)>) -> Result<(CheckpointHeader, Bgru), ModelError> {
    if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let json = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(json).map_err(|e| bad(format!("bad header: {e}")))?;
    if let Some((theta, dim)) = expect {
        if header.theta != theta || header.dim != dim {
            return Err(ModelError::DimensionMismatch {
                expected: (theta, dim),
                found: (header.theta, header.dim),
            });
        }
    }
    let shape = header.hyperparams.shape();
    if shape.param_count() != header.param_count {
        return Err(bad("parameter count disagrees with the hyperparameters"));
    }
    let body = &bytes[16 + len..];
    if body.len() != header.param_count * 8 {
        return Err(bad(format!("expected {} parameter bytes, found {}", header.param_count * 8, body.len())));
    }
    let params = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((header, Bgru { shape, params }))
}
