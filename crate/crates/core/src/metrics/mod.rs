//! MLAE scoring, confidence intervals, aggregation over runs and ranking.

mod prediction;

use serde::{Deserialize, Serialize};

pub use prediction::{
    sidecar_path, PredictionMeta, PredictionSet, Producer, Truths, CSV_HEADER,
    PREDICTION_FORMAT_VERSION,
};

use crate::dataset::ExampleId;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Offset inside the logarithm; an exact prediction scores log2(0.125) = -3.
pub const MLAE_OFFSET: f64 = 0.125;
pub const CI_Z: f64 = 1.96;
/// Runs per condition used when nothing else is requested.
pub const DEFAULT_RUNS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Arithmetic mean over all (example, dimension) pairs.
    #[default]
    Mean,
    /// Mean of the central half after sorting (interquartile mean).
    Midmean,
}

/// log2(|100 p - 100 t| + 0.125) for one judgment.
pub fn log_abs_error(pred: f64, truth: f64) -> f64 {
    ((100.0 * pred - 100.0 * truth).abs() + MLAE_OFFSET).log2()
}

fn reduce(mut terms: Vec<f64>, how: Aggregation) -> f64 {
    match how {
        Aggregation::Mean => terms.iter().sum::<f64>() / terms.len() as f64,
        Aggregation::Midmean => {
            terms.sort_by(f64::total_cmp);
            let cut = terms.len() / 4;
            let mid = &terms[cut..terms.len() - cut];
            mid.iter().sum::<f64>() / mid.len() as f64
        }
    }
}

/// MLAE over paired flat slices.
pub fn mlae_values(preds: &[f64], truths: &[f64], how: Aggregation) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(Error::Pairing(format!(
            "{} predictions for {} labels",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    Ok(reduce(
        preds.iter().zip(truths).map(|(&p, &t)| log_abs_error(p, t)).collect(),
        how,
    ))
}

fn list_ids(ids: &[ExampleId]) -> String {
    let shown: Vec<String> = ids.iter().take(10).map(ToString::to_string).collect();
    if ids.len() > 10 {
        format!("{} (+{} more)", shown.join(", "), ids.len() - 10)
    } else {
        shown.join(", ")
    }
}

/// Scores a prediction set against the labels of the split it names.
pub fn mlae(preds: &PredictionSet, truths: &Truths) -> Result<f64> {
    mlae_with(preds, truths, Aggregation::Mean)
}

pub fn mlae_with(preds: &PredictionSet, truths: &Truths, how: Aggregation) -> Result<f64> {
    if preds.meta.dataset_checksum != truths.dataset_checksum {
        return Err(Error::MixedDatasets(
            preds.meta.dataset_checksum.clone(),
            truths.dataset_checksum.clone(),
        ));
    }
    if preds.meta.split != truths.split || preds.meta.label_dim != truths.label_dim {
        return Err(Error::Pairing(format!(
            "predictions are for {} with label_dim {}, truths are {} with label_dim {}",
            preds.meta.split, preds.meta.label_dim, truths.split, truths.label_dim
        )));
    }
    if truths.labels.is_empty() || preds.entries.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    let missing: Vec<ExampleId> = (0..truths.labels.len())
        .map(|index| ExampleId {
            split: truths.split,
            index,
        })
        .filter(|id| !preds.entries.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Pairing(format!(
            "{} example ids missing: {}",
            missing.len(),
            list_ids(&missing)
        )));
    }
    let extra: Vec<ExampleId> = preds
        .entries
        .keys()
        .filter(|id| id.index >= truths.labels.len())
        .copied()
        .collect();
    if !extra.is_empty() {
        return Err(Error::Pairing(format!(
            "{} example ids not in the split: {}",
            extra.len(),
            list_ids(&extra)
        )));
    }
    let mut p = Vec::with_capacity(truths.labels.len() * truths.label_dim);
    let mut t = Vec::with_capacity(p.capacity());
    for (id, values) in &preds.entries {
        p.extend_from_slice(values);
        t.extend_from_slice(&truths.labels[id.index]);
    }
    mlae_values(&p, &t, how)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// mean ± 1.96 sample standard deviations.
pub fn ci95(values: &[f64]) -> Result<Interval> {
    if values.len() < 2 {
        return Err(Error::InsufficientRuns {
            needed: 2,
            got: values.len(),
        });
    }
    let m = mean(values);
    let half = CI_Z * sample_std(values);
    Ok(Interval {
        lo: m - half,
        hi: m + half,
    })
}

/// MLAE of one task aggregated over independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task: String,
    pub runs: Vec<f64>,
    pub mean: f64,
    /// Absent for a single run.
    pub std: Option<f64>,
    /// Absent for a single run.
    pub ci95: Option<Interval>,
    pub n_runs: usize,
    pub dataset_checksum: String,
    pub prediction_checksums: Vec<String>,
}

impl TaskScore {
    /// Builds a score from already computed per-run values.
    pub fn from_runs(task: &str, runs: Vec<f64>, dataset_checksum: String, prediction_checksums: Vec<String>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Empty("runs"));
        }
        let (std, ci) = if runs.len() >= 2 {
            (Some(sample_std(&runs)), Some(ci95(&runs)?))
        } else {
            (None, None)
        };
        Ok(TaskScore {
            task: task.to_string(),
            mean: mean(&runs),
            std,
            ci95: ci,
            n_runs: runs.len(),
            runs,
            dataset_checksum,
            prediction_checksums,
        })
    }
}

/// Scores every run and aggregates. All runs must target the same dataset.
pub fn aggregate_task_report(task: &str, runs: &[PredictionSet], truths: &Truths, exec: Exec) -> Result<TaskScore> {
    let first = runs.first().ok_or(Error::Empty("runs"))?;
    if let Some(other) = runs
        .iter()
        .find(|r| r.meta.dataset_checksum != first.meta.dataset_checksum)
    {
        return Err(Error::MixedDatasets(
            first.meta.dataset_checksum.clone(),
            other.meta.dataset_checksum.clone(),
        ));
    }
    let values = exec.try_map_indexed(runs.len(), |i| mlae(&runs[i], truths))?;
    let checksums = exec.map_indexed(runs.len(), |i| runs[i].checksum());
    TaskScore::from_runs(task, values, truths.dataset_checksum.clone(), checksums)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub task: String,
    pub score: f64,
    /// Shares its score with another task.
    pub tied: bool,
}

/// Orders tasks by ascending score; rank 1 is the lowest error. Ties are
/// ordered by name and flagged.
pub fn rank_tasks(scores: &[(String, f64)]) -> Vec<RankEntry> {
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    sorted
        .iter()
        .enumerate()
        .map(|(i, (task, score))| RankEntry {
            rank: i + 1,
            task: task.clone(),
            score: *score,
            tied: scores.iter().filter(|(_, s)| s == score).count() > 1,
        })
        .collect()
}
