use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::sha256_bytes;
use crate::error::{Error, Result};
use crate::stimuli::{PartitionSpec, Split, TaskKind, Variant, CANVAS_SIZE};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    /// 0.6 : 0.2 : 0.2. Validation and test get `round(total / 5)` each and
    /// train absorbs the remainder, which keeps every split within one
    /// example of its exact share.
    pub fn for_total(total: usize) -> Self {
        let val = (total + 2) / 5;
        let test = val;
        SplitCounts {
            train: total - val - test,
            val,
            test,
        }
    }

    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFiles {
    pub tensors: FileEntry,
    pub params: FileEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub task: TaskKind,
    pub variant: Variant,
    pub total_count: usize,
    pub split_counts: SplitCounts,
    pub label_dim: usize,
    pub base_seed: u64,
    pub unique_params: bool,
    pub image: ImageShape,
    pub seed_derivation: String,
    pub noise: String,
    pub parameter_partition: PartitionSpec,
    pub train: SplitFiles,
    pub val: SplitFiles,
    pub test: SplitFiles,
}

impl DatasetManifest {
    pub fn files(&self, split: Split) -> &SplitFiles {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn files_mut(&mut self, split: Split) -> &mut SplitFiles {
        match split {
            Split::Train => &mut self.train,
            Split::Val => &mut self.val,
            Split::Test => &mut self.test,
        }
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("manifest serializes");
        v.push(b'\n');
        v
    }

    /// SHA-256 of the canonical JSON bytes; identifies the dataset in
    /// prediction files and reports.
    pub fn checksum(&self) -> String {
        sha256_bytes(&self.to_json_bytes())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.to_json_bytes()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn default_image() -> ImageShape {
        ImageShape {
            height: CANVAS_SIZE,
            width: CANVAS_SIZE,
        }
    }
}

/// A manifest together with the directory holding its files.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
}

impl Dataset {
    /// Opens `path`, which may be the dataset directory or its manifest.
    pub fn open(path: &Path) -> Result<Self> {
        let (dir, file) = if path.is_dir() {
            (path.to_path_buf(), path.join(MANIFEST_FILE))
        } else {
            (
                path.parent().map(Path::to_path_buf).unwrap_or_default(),
                path.to_path_buf(),
            )
        };
        let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
        let manifest: DatasetManifest =
            serde_json::from_slice(&bytes).map_err(|e| Error::Json {
                path: file.clone(),
                source: e,
            })?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: format_version {} (supported: {FORMAT_VERSION})",
                file.display(),
                manifest.format_version
            )));
        }
        Ok(Dataset { dir, manifest })
    }

    pub fn path_of(&self, entry: &FileEntry) -> PathBuf {
        self.dir.join(&entry.path)
    }

    pub fn checksum(&self) -> String {
        self.manifest.checksum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_count_examples() {
        assert_eq!(
            SplitCounts::for_total(100_000),
            SplitCounts { train: 60_000, val: 20_000, test: 20_000 }
        );
        assert_eq!(SplitCounts::for_total(10), SplitCounts { train: 6, val: 2, test: 2 });
        assert_eq!(SplitCounts::for_total(7), SplitCounts { train: 5, val: 1, test: 1 });
        assert_eq!(SplitCounts::for_total(9), SplitCounts { train: 5, val: 2, test: 2 });
    }

    #[test]
    fn proportions_within_one_over_total() {
        for n in 5..3000usize {
            let c = SplitCounts::for_total(n);
            assert_eq!(c.total(), n);
            let t = n as f64;
            assert!((c.train as f64 / t - 0.6).abs() <= 1.0 / t + 1e-12, "{n}");
            assert!((c.val as f64 / t - 0.2).abs() <= 1.0 / t + 1e-12);
            assert!((c.test as f64 / t - 0.2).abs() <= 1.0 / t + 1e-12);
        }
    }
}
