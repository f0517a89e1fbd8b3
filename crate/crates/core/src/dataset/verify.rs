use std::fmt;

use serde::Serialize;

use super::build::{draw_split_params, params_file_name, read_params_file, write_params_file, ExampleParams};
use super::format::{sha256_file, TensorReader};
use super::manifest::{Dataset, FileEntry};
use super::read::ExampleId;
use crate::error::{Error, Result};
use crate::stimuli::{labels_for, param_space, split_of, Split};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Label parameters fall in another split's subset.
    WrongSubset { belongs_to: Split },
    /// A parameter lies outside its declared range.
    OutOfRange { name: String, value: i32 },
    /// Stored parameters differ from a replay of the seed.
    ReplayMismatch { expected: Vec<i32> },
    /// Stored labels differ from labels recomputed from the parameters.
    LabelMismatch { stored: Vec<f32>, expected: Vec<f32> },
    /// A pixel lies outside its background or foreground band.
    PixelOutOfBand { pixel: usize, value: f32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub id: ExampleId,
    pub params: Vec<i32>,
    pub kinds: Vec<ViolationKind>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} params {:?}:", self.id, self.params)?;
        for k in &self.kinds {
            match k {
                ViolationKind::WrongSubset { belongs_to } => write!(f, " belongs to {belongs_to}")?,
                ViolationKind::OutOfRange { name, value } => write!(f, " {name}={value} out of range")?,
                ViolationKind::ReplayMismatch { expected } => write!(f, " seed replays to {expected:?}")?,
                ViolationKind::LabelMismatch { .. } => write!(f, " label mismatch")?,
                ViolationKind::PixelOutOfBand { pixel, value } => write!(f, " pixel {pixel}={value}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub dataset_checksum: String,
    pub examples_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_file(ds: &Dataset, entry: &FileEntry) -> Result<()> {
    let path = ds.path_of(entry);
    let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
    let actual = sha256_file(&path)?;
    if actual != entry.sha256 || meta.len() != entry.bytes {
        return Err(Error::Integrity {
            path,
            reason: format!(
                "sha256 {actual} ({} bytes) does not match manifest {} ({} bytes)",
                meta.len(),
                entry.sha256,
                entry.bytes
            ),
        });
    }
    Ok(())
}

/// Checks every example of every split: its label parameters must belong to
/// the split's subset, lie in range, replay from its seed, and agree with the
/// stored labels; its pixels must lie in their bands. Any checksum mismatch
/// aborts with an integrity error before examples are looked at.
pub fn verify_split_disjointness(ds: &Dataset) -> Result<VerifyReport> {
    let m = &ds.manifest;
    for split in Split::ALL {
        check_file(ds, &m.files(split).tensors)?;
        check_file(ds, &m.files(split).params)?;
    }
    let dims = param_space(m.task, m.variant);
    let mut violations = Vec::new();
    let mut checked = 0;
    for split in Split::ALL {
        let files = m.files(split);
        let count = m.split_counts.get(split);
        let params_path = ds.path_of(&files.params);
        let stored = read_params_file(&params_path)?;
        if stored.len() != count {
            return Err(Error::LengthMismatch {
                path: params_path,
                expected: count as u64,
                actual: stored.len() as u64,
            });
        }
        let replay = draw_split_params(m.task, m.variant, m.base_seed, split, count, m.unique_params)?;
        let mut tensors = TensorReader::open(&ds.path_of(&files.tensors))?;
        if tensors.header.count as usize != count {
            return Err(Error::LengthMismatch {
                path: ds.path_of(&files.tensors),
                expected: count as u64,
                actual: tensors.header.count as u64,
            });
        }
        for (ex, want) in stored.iter().zip(&replay) {
            let (image, labels) = tensors.read_record()?.ok_or_else(|| {
                Error::Format(format!("{}: truncated", files.tensors.path))
            })?;
            let kinds = check_example(m.task, split, ex, want, &dims, &image.values, &labels);
            checked += 1;
            if !kinds.is_empty() {
                violations.push(Violation {
                    id: ExampleId { split, index: ex.index },
                    params: ex.params.clone(),
                    kinds,
                });
            }
        }
    }
    Ok(VerifyReport {
        dataset_checksum: ds.checksum(),
        examples_checked: checked,
        violations,
    })
}

fn check_example(
    task: crate::stimuli::TaskKind,
    split: Split,
    ex: &ExampleParams,
    replay: &ExampleParams,
    dims: &[crate::stimuli::ParamDim],
    pixels: &[f32],
    labels: &[f32],
) -> Vec<ViolationKind> {
    let mut kinds = Vec::new();
    if ex.params.len() != dims.len() {
        kinds.push(ViolationKind::ReplayMismatch {
            expected: replay.params.clone(),
        });
        return kinds;
    }
    let mut in_range = true;
    for (d, &v) in dims.iter().zip(&ex.params) {
        if v < d.lo || v > d.hi {
            in_range = false;
            kinds.push(ViolationKind::OutOfRange {
                name: d.name.clone(),
                value: v,
            });
        }
    }
    let belongs_to = split_of(task, &ex.params);
    if belongs_to != split {
        kinds.push(ViolationKind::WrongSubset { belongs_to });
    }
    if ex.params != replay.params || ex.seed != replay.seed || ex.index != replay.index {
        kinds.push(ViolationKind::ReplayMismatch {
            expected: replay.params.clone(),
        });
    }
    if in_range {
        {
            let expected: Vec<f32> = labels_for(task, &ex.params).iter().map(|&l| l as f32).collect();
            if expected != labels {
                kinds.push(ViolationKind::LabelMismatch {
                    stored: labels.to_vec(),
                    expected,
                });
            }
        }
    }
    if let Some((pixel, &value)) = pixels
        .iter()
        .enumerate()
        .find(|(_, &v)| !((-0.5..-0.45).contains(&v) || (v > 0.45 && v <= 0.5)))
    {
        kinds.push(ViolationKind::PixelOutOfBand { pixel, value });
    }
    kinds
}

/// Overwrites the stored parameters of one example and re-seals the manifest
/// so checksums still match. Used to inject faults when testing the verifier.
pub fn rewrite_example_params(ds: &mut Dataset, split: Split, index: usize, params: Vec<i32>) -> Result<()> {
    let m = &ds.manifest;
    let path = ds.path_of(&m.files(split).params);
    let mut examples = read_params_file(&path)?;
    let ex = examples.get_mut(index).ok_or_else(|| {
        Error::Config(format!("{split} has no example {index}"))
    })?;
    ex.params = params;
    debug_assert_eq!(params_file_name(split), m.files(split).params.path);
    let entry = write_params_file(&ds.dir, split, m.task, m.variant, &examples)?;
    ds.manifest.files_mut(split).params = entry;
    ds.manifest.write(&ds.dir)?;
    Ok(())
}
