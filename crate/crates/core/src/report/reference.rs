use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Published MLAE constants, one row per table cell:
/// `table,source,task,mean,std`.
pub const REFERENCE_CSV: &str = include_str!("../../data/reference_scores.csv");

/// Sources that are people rather than models.
const HUMAN_SOURCES: [&str; 2] = ["Human", "Humans"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub table: String,
    pub source: String,
    pub task: String,
    pub mean: f64,
    pub std: Option<f64>,
}

/// All constants of one (table, source) pair, e.g. "Table 3 Swin".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScores {
    pub table: String,
    pub source: String,
    pub scores: BTreeMap<String, (f64, Option<f64>)>,
}

impl ReferenceScores {
    pub fn id(&self) -> String {
        format!("{} {}", self.table, self.source)
    }

    pub fn is_human(&self) -> bool {
        HUMAN_SOURCES.contains(&self.source.as_str())
    }
}

pub fn reference_entries() -> &'static [ReferenceEntry] {
    static ENTRIES: OnceLock<Vec<ReferenceEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        let mut r = csv::Reader::from_reader(REFERENCE_CSV.as_bytes());
        r.records()
            .map(|rec| {
                let rec = rec.expect("bundled reference table is valid CSV");
                ReferenceEntry {
                    table: rec[0].to_string(),
                    source: rec[1].to_string(),
                    task: rec[2].to_string(),
                    mean: rec[3].parse().expect("reference mean"),
                    std: (!rec[4].is_empty()).then(|| rec[4].parse().expect("reference std")),
                }
            })
            .collect()
    })
}

/// Every (table, source) group in file order.
pub fn reference_sources() -> Vec<ReferenceScores> {
    let mut out: Vec<ReferenceScores> = Vec::new();
    for e in reference_entries() {
        let idx = match out.iter().position(|s| s.table == e.table && s.source == e.source) {
            Some(i) => i,
            None => {
                out.push(ReferenceScores {
                    table: e.table.clone(),
                    source: e.source.clone(),
                    scores: BTreeMap::new(),
                });
                out.len() - 1
            }
        };
        out[idx].scores.insert(e.task.clone(), (e.mean, e.std));
    }
    out
}

/// Looks up a source by id such as "Table 3 Swin" (case-insensitive).
pub fn reference(id: &str) -> Result<ReferenceScores> {
    reference_sources()
        .into_iter()
        .find(|s| s.id().eq_ignore_ascii_case(id.trim()))
        .ok_or_else(|| Error::Unknown {
            what: "reference source",
            value: id.to_string(),
        })
}

/// Highest published model (non-human) MLAE per task across all tables.
pub fn weakest_published() -> BTreeMap<String, (f64, String)> {
    let mut out: BTreeMap<String, (f64, String)> = BTreeMap::new();
    for s in reference_sources().iter().filter(|s| !s.is_human()) {
        for (task, &(mean, _)) in &s.scores {
            let e = out.entry(task.clone()).or_insert((f64::NEG_INFINITY, String::new()));
            if mean > e.0 {
                *e = (mean, s.id());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub task: String,
    pub harness: f64,
    pub reference: f64,
    /// harness - reference
    pub delta: f64,
    /// Harness is worse than every published model on this task.
    pub worse_than_weakest: bool,
    pub weakest: Option<(f64, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    pub reference: String,
    pub rows: Vec<DeltaRow>,
}

/// Per-task deltas against `reference` for the tasks both sides have.
pub fn compare_to_reference(scores: &BTreeMap<String, f64>, reference: &ReferenceScores) -> Result<DeltaTable> {
    let weakest = weakest_published();
    let rows: Vec<DeltaRow> = scores
        .iter()
        .filter_map(|(task, &harness)| {
            let &(r, _) = reference.scores.get(task)?;
            let w = weakest.get(task).cloned();
            Some(DeltaRow {
                task: task.clone(),
                harness,
                reference: r,
                delta: harness - r,
                worse_than_weakest: w.as_ref().is_some_and(|(m, _)| harness > *m),
                weakest: w,
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::DisjointTasks(reference.id()));
    }
    Ok(DeltaTable {
        reference: reference.id(),
        rows,
    })
}
