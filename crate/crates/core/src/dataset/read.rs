use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::format::{sha256_file, TensorReader};
use super::image::FloatImage;
use super::manifest::Dataset;
use crate::error::{Error, Result};
use crate::stimuli::Split;

/// `(split, index)`, written as `split:index` (e.g. `test:17`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExampleId {
    pub split: Split,
    pub index: usize,
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.split, self.index)
    }
}

impl FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (split, index) = s.split_once(':').ok_or_else(|| Error::Unknown {
            what: "example id",
            value: s.to_string(),
        })?;
        Ok(ExampleId {
            split: split.parse()?,
            index: index.parse().map_err(|_| Error::Unknown {
                what: "example id",
                value: s.to_string(),
            })?,
        })
    }
}

impl Serialize for ExampleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExampleId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRecord {
    pub id: ExampleId,
    pub image: FloatImage,
    pub labels: Vec<f32>,
}

/// Iterator over one split's records in index order.
pub struct SplitReader {
    split: Split,
    reader: TensorReader,
    index: usize,
}

impl Iterator for SplitReader {
    type Item = Result<ExampleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.reader.read_record() {
            Ok(Some((image, labels))) => {
                let id = ExampleId {
                    split: self.split,
                    index: self.index,
                };
                self.index += 1;
                Some(Ok(ExampleRecord { id, image, labels }))
            }
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Opens a split after checking its checksum and record count against the
/// manifest.
pub fn read_dataset(ds: &Dataset, split: Split) -> Result<SplitReader> {
    let entry = &ds.manifest.files(split).tensors;
    let path = ds.path_of(entry);
    let reader = TensorReader::open(&path)?;
    let expected = ds.manifest.split_counts.get(split) as u64;
    if reader.header.count as u64 != expected {
        return Err(Error::LengthMismatch {
            path,
            expected,
            actual: reader.header.count as u64,
        });
    }
    if reader.header.label_dim as usize != ds.manifest.label_dim {
        return Err(Error::Integrity {
            path,
            reason: format!(
                "label_dim {} differs from manifest {}",
                reader.header.label_dim, ds.manifest.label_dim
            ),
        });
    }
    let actual = sha256_file(&path)?;
    if actual != entry.sha256 {
        return Err(Error::Integrity {
            path,
            reason: format!("sha256 {actual} does not match manifest {}", entry.sha256),
        });
    }
    Ok(SplitReader {
        split,
        reader,
        index: 0,
    })
}

/// Reads a whole split into memory.
pub fn load_split(ds: &Dataset, split: Split) -> Result<Vec<ExampleRecord>> {
    read_dataset(ds, split)?.collect()
}
