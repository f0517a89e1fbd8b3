//! Model checkpoint layout (little endian):
//!
//! ```text
//! magic "PBM1" | u32 version | u32 layer count L | u32 dims[L + 1]
//! per layer: f64 weights[dims[l] * dims[l + 1]] (row-major), f64 biases[dims[l + 1]]
//! ```
//!
//! A JSON file next to it (`<name>.json`) echoes the training config.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::MlpModel;
use super::train::{TrainConfig, TrainReport};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PBM1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointInfo {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    pub param_checksum: String,
    pub dataset_checksum: String,
    pub config: TrainConfig,
    pub report: TrainReport,
}

pub fn config_echo_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn save_checkpoint(model: &MlpModel, path: &Path, info: &CheckpointInfo) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + model.param_count() * 8);
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.layers() as u32).to_le_bytes());
    for &d in &model.dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for (w, b) in model.weights.iter().zip(&model.biases) {
        for v in w.iter().chain(b.iter()) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    let echo = config_echo_path(path);
    let mut json = serde_json::to_vec_pretty(info).expect("info serializes");
    json.push(b'\n');
    fs::write(&echo, json).map_err(|e| Error::io(&echo, e))
}

pub fn load_checkpoint(path: &Path) -> Result<MlpModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let fmt = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    if bytes.len() < 12 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(fmt("not a PBM1 checkpoint"));
    }
    let u = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    if u(4) as u32 != CHECKPOINT_VERSION {
        return Err(fmt("unsupported checkpoint version"));
    }
    let layers = u(8);
    let head = 12 + 4 * (layers + 1);
    if layers == 0 || bytes.len() < head {
        return Err(fmt("truncated header"));
    }
    let dims: Vec<usize> = (0..=layers).map(|l| u(12 + 4 * l)).collect();
    let n: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if bytes.len() != head + 8 * n {
        return Err(fmt("parameter block has the wrong length"));
    }
    let mut vals = bytes[head..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in dims.windows(2) {
        let wv: Vec<f64> = vals.by_ref().take(w[0] * w[1]).collect();
        weights.push(Array2::from_shape_vec((w[0], w[1]), wv).unwrap());
        biases.push(Array1::from_iter(vals.by_ref().take(w[1])));
    }
    Ok(MlpModel { dims, weights, biases })
}
