//! "PBT1" tensor files.
//!
//! ```text
//! magic      4 bytes  "PBT1"
//! count      u32 LE
//! height     u32 LE
//! width      u32 LE
//! label_dim  u32 LE
//! records    count × (height·width f32 LE row-major image, label_dim f32 LE labels)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::image::FloatImage;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PBT1";
pub const HEADER_LEN: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorHeader {
    pub count: u32,
    pub height: u32,
    pub width: u32,
    pub label_dim: u32,
}

impl TensorHeader {
    pub fn record_len(&self) -> u64 {
        4 * (self.height as u64 * self.width as u64 + self.label_dim as u64)
    }

    pub fn file_len(&self) -> u64 {
        HEADER_LEN + self.count as u64 * self.record_len()
    }

    fn to_bytes(self) -> [u8; 20] {
        let mut b = [0u8; 20];
        b[..4].copy_from_slice(MAGIC);
        b[4..8].copy_from_slice(&self.count.to_le_bytes());
        b[8..12].copy_from_slice(&self.height.to_le_bytes());
        b[12..16].copy_from_slice(&self.width.to_le_bytes());
        b[16..20].copy_from_slice(&self.label_dim.to_le_bytes());
        b
    }
}

/// Streaming writer that hashes everything it writes.
pub struct TensorWriter {
    path: PathBuf,
    out: BufWriter<File>,
    hasher: Sha256,
    header: TensorHeader,
    written: u32,
    bytes: u64,
}

impl TensorWriter {
    pub fn create(path: &Path, header: TensorHeader) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TensorWriter {
            path: path.to_path_buf(),
            out: BufWriter::with_capacity(1 << 20, file),
            hasher: Sha256::new(),
            header,
            written: 0,
            bytes: 0,
        };
        w.put(&header.to_bytes())?;
        Ok(w)
    }

    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.hasher.update(bytes);
        self.bytes += bytes.len() as u64;
        self.out.write_all(bytes).map_err(|e| Error::io(&self.path, e))
    }

    pub fn write_record(&mut self, image: &FloatImage, labels: &[f32]) -> Result<()> {
        if image.width as u32 != self.header.width
            || image.height as u32 != self.header.height
            || labels.len() as u32 != self.header.label_dim
        {
            return Err(Error::Shape(format!(
                "record {}x{} with {} labels does not match header {:?}",
                image.width,
                image.height,
                labels.len(),
                self.header
            )));
        }
        let mut buf = Vec::with_capacity(self.header.record_len() as usize);
        for v in image.values.iter().chain(labels) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.put(&buf)?;
        self.written += 1;
        Ok(())
    }

    /// Flushes and returns `(sha256 hex, byte length)`.
    pub fn finish(mut self) -> Result<(String, u64)> {
        if self.written != self.header.count {
            return Err(Error::LengthMismatch {
                path: self.path.clone(),
                expected: self.header.count as u64,
                actual: self.written as u64,
            });
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok((hex::encode(self.hasher.finalize()), self.bytes))
    }
}

/// Sequential record reader. Validates the header and the exact file
/// length before yielding anything.
pub struct TensorReader {
    path: PathBuf,
    input: BufReader<File>,
    pub header: TensorHeader,
    next: u32,
}

impl TensorReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let actual_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        let mut input = BufReader::with_capacity(1 << 20, file);
        let mut h = [0u8; 20];
        input.read_exact(&mut h).map_err(|_| Error::LengthMismatch {
            path: path.to_path_buf(),
            expected: HEADER_LEN,
            actual: actual_len,
        })?;
        if &h[..4] != MAGIC {
            return Err(Error::Format(format!(
                "{}: bad magic {:?}, expected PBT1",
                path.display(),
                String::from_utf8_lossy(&h[..4])
            )));
        }
        let u = |i: usize| u32::from_le_bytes(h[i..i + 4].try_into().unwrap());
        let header = TensorHeader {
            count: u(4),
            height: u(8),
            width: u(12),
            label_dim: u(16),
        };
        if actual_len != header.file_len() {
            let rec = header.record_len().max(1);
            return Err(Error::LengthMismatch {
                path: path.to_path_buf(),
                expected: header.count as u64,
                actual: actual_len.saturating_sub(HEADER_LEN) / rec,
            });
        }
        Ok(TensorReader {
            path: path.to_path_buf(),
            input,
            header,
            next: 0,
        })
    }

    pub fn read_record(&mut self) -> Result<Option<(FloatImage, Vec<f32>)>> {
        if self.next == self.header.count {
            return Ok(None);
        }
        let mut buf = vec![0u8; self.header.record_len() as usize];
        self.input
            .read_exact(&mut buf)
            .map_err(|e| Error::io(&self.path, e))?;
        let floats: Vec<f32> = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let npx = (self.header.height * self.header.width) as usize;
        let image = FloatImage {
            width: self.header.width as usize,
            height: self.header.height as usize,
            values: floats[..npx].to_vec(),
        };
        self.next += 1;
        Ok(Some((image, floats[npx..].to_vec())))
    }
}

/// SHA-256 hex digest of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
