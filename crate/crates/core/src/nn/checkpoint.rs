//! Binary checkpoint format.
//!
//! ```text
//! "FMW1" | version: u8 | layer count: u32 LE | (rows: u32 LE, cols: u32 LE) per layer
//! | parameters as f32 LE, layer by layer (weights row-major, then biases)
//! ```

use std::fs;
use std::path::Path;

use super::weights::{LayerShape, WeightVector};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"FMW1";
pub const CHECKPOINT_VERSION: u8 = 1;

pub fn encode(w: &WeightVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 8 * w.shapes().len() + 4 * w.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.push(CHECKPOINT_VERSION);
    out.extend_from_slice(&(w.shapes().len() as u32).to_le_bytes());
    for s in w.shapes() {
        out.extend_from_slice(&(s.rows as u32).to_le_bytes());
        out.extend_from_slice(&(s.cols as u32).to_le_bytes());
    }
    for &v in w.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<WeightVector> {
    let bad = |msg: &str| Error::Shape(format!("malformed checkpoint: {msg}"));
    let mut cursor = Reader { bytes, pos: 0 };
    if cursor.take(4).ok_or_else(|| bad("truncated header"))? != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = cursor.take(1).ok_or_else(|| bad("truncated header"))?[0];
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let layers = cursor.u32().ok_or_else(|| bad("truncated header"))? as usize;
    let mut shapes = Vec::with_capacity(layers.min(1024));
    for _ in 0..layers {
        let rows = cursor.u32().ok_or_else(|| bad("truncated layer table"))? as usize;
        let cols = cursor.u32().ok_or_else(|| bad("truncated layer table"))? as usize;
        shapes.push(LayerShape { rows, cols });
    }
    let n: usize = shapes.iter().map(LayerShape::num_params).sum();
    let payload = &bytes[cursor.pos..];
    if payload.len() != 4 * n {
        return Err(bad(&format!(
            "expected {} payload bytes, found {}",
            4 * n,
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    WeightVector::new(values, shapes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn write_checkpoint(path: &Path, w: &WeightVector) -> Result<()> {
    fs::write(path, encode(w)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<WeightVector> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
