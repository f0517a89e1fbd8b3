use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{read_dataset, sha256_bytes, Dataset, ExampleId};
use crate::error::{Error, Result};
use crate::stimuli::Split;

pub const PREDICTION_FORMAT_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 3] = ["example_id", "dim", "value"];

/// Who produced a prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Producer {
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
}

/// Contents of the `.meta.json` sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionMeta {
    pub format_version: u32,
    pub dataset_checksum: String,
    pub split: Split,
    pub label_dim: usize,
    pub producer: Producer,
}

/// Model outputs keyed by example id, in normalized label space.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub meta: PredictionMeta,
    pub entries: BTreeMap<ExampleId, Vec<f64>>,
}

/// `preds.csv` -> `preds.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().unwrap_or_default().to_string_lossy();
    csv.with_file_name(format!("{stem}.meta.json"))
}

impl PredictionSet {
    pub fn new(meta: PredictionMeta) -> Self {
        PredictionSet {
            meta,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: ExampleId, values: Vec<f64>) -> Result<()> {
        if values.len() != self.meta.label_dim {
            return Err(Error::Shape(format!(
                "{id}: {} values for label_dim {}",
                values.len(),
                self.meta.label_dim
            )));
        }
        if id.split != self.meta.split {
            return Err(Error::Pairing(format!(
                "{id} is not in split {}",
                self.meta.split
            )));
        }
        self.entries.insert(id, values);
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = String::from("example_id,dim,value\n");
        for (id, values) in &self.entries {
            for (d, v) in values.iter().enumerate() {
                out.push_str(&format!("{id},{d},{v:?}\n"));
            }
        }
        out.into_bytes()
    }

    /// SHA-256 of the CSV body; identifies the file in reports.
    pub fn checksum(&self) -> String {
        sha256_bytes(&self.to_csv_bytes())
    }

    /// Writes `path` and its sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_csv_bytes()).map_err(|e| Error::io(path, e))?;
        let side = sidecar_path(path);
        let mut json = serde_json::to_vec_pretty(&self.meta).expect("meta serializes");
        json.push(b'\n');
        fs::write(&side, json).map_err(|e| Error::io(&side, e))
    }

    /// Reads a CSV and its sidecar. Rows may come in any order but every
    /// example must carry each dimension exactly once.
    pub fn read(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let bytes = fs::read(&side).map_err(|e| Error::io(&side, e))?;
        let meta: PredictionMeta = serde_json::from_slice(&bytes).map_err(|e| Error::Json {
            path: side.clone(),
            source: e,
        })?;
        if meta.format_version != PREDICTION_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: format_version {} (supported: {PREDICTION_FORMAT_VERSION})",
                side.display(),
                meta.format_version
            )));
        }
        let csv_err = |e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Format(format!(
                "{}: header {:?}, expected example_id,dim,value",
                path.display(),
                header
            )));
        }
        let mut partial: BTreeMap<ExampleId, Vec<Option<f64>>> = BTreeMap::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let bad = |what: &str| Error::Format(format!("{}: bad {what} in {:?}", path.display(), rec));
            let id: ExampleId = rec[0].trim().parse()?;
            if id.split != meta.split {
                return Err(Error::Pairing(format!("{id} is not in split {}", meta.split)));
            }
            let dim: usize = rec[1].trim().parse().map_err(|_| bad("dim"))?;
            let value: f64 = rec[2].trim().parse().map_err(|_| bad("value"))?;
            if dim >= meta.label_dim {
                return Err(Error::Shape(format!("{id}: dim {dim} >= label_dim {}", meta.label_dim)));
            }
            let slot = &mut partial.entry(id).or_insert_with(|| vec![None; meta.label_dim])[dim];
            if slot.replace(value).is_some() {
                return Err(Error::Format(format!("{}: duplicate row {id} dim {dim}", path.display())));
            }
        }
        let mut entries = BTreeMap::new();
        for (id, vals) in partial {
            let vals: Option<Vec<f64>> = vals.into_iter().collect();
            let vals = vals.ok_or_else(|| Error::Shape(format!("{id}: missing dimensions")))?;
            entries.insert(id, vals);
        }
        Ok(PredictionSet { meta, entries })
    }
}

/// Ground-truth labels of one dataset split.
#[derive(Debug, Clone, PartialEq)]
pub struct Truths {
    pub dataset_checksum: String,
    pub split: Split,
    pub label_dim: usize,
    pub labels: Vec<Vec<f64>>,
}

impl Truths {
    pub fn load(ds: &Dataset, split: Split) -> Result<Self> {
        let labels = read_dataset(ds, split)?
            .map(|r| r.map(|rec| rec.labels.iter().map(|&l| l as f64).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Truths {
            dataset_checksum: ds.checksum(),
            split,
            label_dim: ds.manifest.label_dim,
            labels,
        })
    }
}
