use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} outside range [{lo}, {hi}]")]
    RangeViolation {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("invalid stimulus values: {0}")]
    InvalidValues(String),

    #[error("parameter subset for {split} has {cardinality} unique tuples, {requested} requested")]
    Capacity {
        split: String,
        cardinality: u128,
        requested: u128,
    },

    #[error("unknown {what} `{value}`")]
    Unknown { what: &'static str, value: String },

    #[error("integrity check failed for {path}: {reason}")]
    Integrity { path: PathBuf, reason: String },

    #[error("{path}: expected {expected} records, found {actual}")]
    LengthMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("prediction pairing failed: {0}")]
    Pairing(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("need at least {needed} runs, got {got}")]
    InsufficientRuns { needed: usize, got: usize },

    #[error("runs score different datasets: {0} vs {1}")]
    MixedDatasets(String, String),

    #[error("no tasks in common with reference {0}")]
    DisjointTasks(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("quadrature did not converge: achieved {achieved:e}, target {target:e}")]
    Accuracy { achieved: f64, target: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("external trainer failed: {0}")]
    External(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RangeViolation { .. } => "range-violation",
            Error::InvalidValues(_) => "invalid-values",
            Error::Capacity { .. } => "capacity",
            Error::Unknown { .. } => "unknown",
            Error::Integrity { .. } => "integrity",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
            Error::Pairing(_) => "pairing",
            Error::Empty(_) => "empty",
            Error::InsufficientRuns { .. } => "insufficient-runs",
            Error::MixedDatasets(..) => "mixed-datasets",
            Error::DisjointTasks(_) => "disjoint-tasks",
            Error::DegenerateVariance(_) => "degenerate-variance",
            Error::Accuracy { .. } => "accuracy",
            Error::Shape(_) => "shape",
            Error::Config(_) => "config",
            Error::Divergence { .. } => "divergence",
            Error::External(_) => "external",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
