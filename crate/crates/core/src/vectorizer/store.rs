//! Binary vector store with a line-delimited sidecar index.
//!
//! Layout (little endian): 8-byte magic, `u32` version, `u32` theta, `u32`
//! dim, `u64` count, `u64` seed, then `count * theta` `f32` values.

use serde::{Deserialize, Serialize};

use super::{SampleVector, Truncation, VectorizeError};

pub const STORE_MAGIC: &[u8; 8] = b"SEVCVEC\0";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub version: u32,
    pub theta: u32,
    pub dim: u32,
    pub count: u64,
    pub seed: u64,
}

/// Per-vector metadata kept in the sidecar index, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreEntry {
    pub syvc: u32,
    pub program: String,
    pub used: usize,
    pub backward: usize,
    pub anchor: usize,
    pub forward: usize,
    pub dropped_left: usize,
    pub dropped_right: usize,
    pub truncation: Truncation,
    pub label: Option<u8>,
}

impl From<&SampleVector> for StoreEntry {
    fn from(v: &SampleVector) -> Self {
        Self {
            syvc: v.syvc,
            program: v.program.clone(),
            used: v.used,
            backward: v.backward,
            anchor: v.anchor,
            forward: v.forward,
            dropped_left: v.dropped_left,
            dropped_right: v.dropped_right,
            truncation: v.truncation,
            label: v.label,
        }
    }
}

/// Serializes `vectors` into the binary store and its index text.
pub fn write_store(
    vectors: &[SampleVector],
    theta: usize,
    dim: usize,
    seed: u64,
) -> Result<(Vec<u8>, String), VectorizeError> {
    let mut bin = Vec::with_capacity(36 + vectors.len() * theta * 4);
    bin.extend_from_slice(STORE_MAGIC);
    bin.extend_from_slice(&STORE_VERSION.to_le_bytes());
    bin.extend_from_slice(&(theta as u32).to_le_bytes());
    bin.extend_from_slice(&(dim as u32).to_le_bytes());
    bin.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    bin.extend_from_slice(&seed.to_le_bytes());
    let mut index = String::new();
    for v in vectors {
        if v.values.len() != theta || v.dim != dim {
            return Err(VectorizeError::Store(format!("vector {} has the wrong shape", v.syvc)));
        }
        for x in &v.values {
            bin.extend_from_slice(&x.to_le_bytes());
        }
        index.push_str(&serde_json::to_string(&StoreEntry::from(v)).expect("entry serializes"));
        index.push('\n');
    }
    Ok((bin, index))
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N], VectorizeError> {
    let slice = bytes.get(*at..*at + N).ok_or_else(|| VectorizeError::Store("truncated file".into()))?;
    *at += N;
    Ok(slice.try_into().expect("length checked"))
}

/// Reads a store written by [`write_store`].
pub fn read_store(bytes: &[u8], index: &str) -> Result<(StoreHeader, Vec<SampleVector>), VectorizeError> {
    let mut at = 0;
    if &take::<8>(bytes, &mut at)? != STORE_MAGIC {
        return Err(VectorizeError::Store("bad magic".into()));
    }
    let header = StoreHeader {
        version: u32::from_le_bytes(take(bytes, &mut at)?),
        theta: u32::from_le_bytes(take(bytes, &mut at)?),
        dim: u32::from_le_bytes(take(bytes, &mut at)?),
        count: u64::from_le_bytes(take(bytes, &mut at)?),
        seed: u64::from_le_bytes(take(bytes, &mut at)?),
    };
    if header.version != STORE_VERSION {
        return Err(VectorizeError::Store(format!("unsupported version {}", header.version)));
    }
    let entries: Vec<StoreEntry> = index
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| VectorizeError::Store(format!("bad index: {e}")))?;
    if entries.len() as u64 != header.count {
        return Err(VectorizeError::Store(format!(
            "index has {} entries, store has {}",
            entries.len(),
            header.count
        )));
    }
    let theta = header.theta as usize;
    let dim = header.dim as usize;
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let mut values = Vec::with_capacity(theta);
        for _ in 0..theta {
            values.push(f32::from_le_bytes(take(bytes, &mut at)?));
        }
        out.push(SampleVector {
            syvc: e.syvc,
            program: e.program,
            values,
            theta,
            dim,
            capacity: theta / dim.max(1),
            used: e.used,
            backward: e.backward,
            anchor: e.anchor,
            forward: e.forward,
            dropped_left: e.dropped_left,
            dropped_right: e.dropped_right,
            truncation: e.truncation,
            label: e.label,
        });
    }
    if at != bytes.len() {
        return Err(VectorizeError::Store("trailing bytes".into()));
    }
    Ok((header, out))
}
