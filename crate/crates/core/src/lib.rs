//! Deterministic benchmark harness for graphical-perception regression.
//!
//! The pipeline: [`stimuli`] rasterizes parameterized visual tasks,
//! [`dataset`] turns them into split, noised, checksummed tensor files,
//! [`baseline`] trains a from-scratch MLP, [`metrics`] scores prediction
//! files with MLAE, [`stats`] compares groups with ANOVA and Tukey HSD,
//! [`crossgen`] runs train-on-one/test-on-all parameterization matrices and
//! [`report`] renders everything with reference comparisons.

pub mod baseline;
pub mod crossgen;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod stats;
pub mod stimuli;

pub use error::{Error, Result};
pub use exec::Exec;
