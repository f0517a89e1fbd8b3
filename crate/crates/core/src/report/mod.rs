//! Evaluation reports, reference comparisons and SVG rendering.

mod reference;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use reference::{
    compare_to_reference, reference, reference_entries, reference_sources, weakest_published,
    DeltaRow, DeltaTable, ReferenceEntry, ReferenceScores, REFERENCE_CSV,
};
pub use svg::{bar_chart, heatmap, ramp, ranking_ladder};

use crate::crossgen::CrossMatrix;
use crate::error::{Error, Result};
use crate::metrics::{rank_tasks, RankEntry, TaskScore};
use crate::stats::{AnovaResult, TukeyResult};

pub const HARNESS_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRef {
    pub path: String,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSection {
    pub anova: AnovaResult,
    pub tukey: TukeyResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub harness_version: String,
    pub manifests: Vec<ManifestRef>,
    pub scores: Vec<TaskScore>,
    #[serde(default)]
    pub stats: Option<StatsSection>,
    pub rankings: Vec<RankEntry>,
    #[serde(default)]
    pub reference: Option<DeltaTable>,
    #[serde(default)]
    pub cross_matrices: Vec<CrossMatrix>,
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl EvalReport {
    /// Report over `scores` with rankings filled in.
    pub fn new(manifests: Vec<ManifestRef>, scores: Vec<TaskScore>) -> Self {
        let rankings = rank_tasks(&scores.iter().map(|s| (s.task.clone(), s.mean)).collect::<Vec<_>>());
        EvalReport {
            harness_version: HARNESS_VERSION.to_string(),
            manifests,
            scores,
            stats: None,
            rankings,
            reference: None,
            cross_matrices: vec![],
            artifacts: vec![],
        }
    }

    pub fn means(&self) -> BTreeMap<String, f64> {
        self.scores.iter().map(|s| (s.task.clone(), s.mean)).collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// The report's charts as (file name, SVG text). Heatmaps appear once per
/// cross matrix.
pub fn render_report_svg(report: &EvalReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if !report.scores.is_empty() {
        out.push(("scores.svg".to_string(), bar_chart(&report.scores)));
    }
    if !report.rankings.is_empty() {
        out.push(("ranking.svg".to_string(), ranking_ladder(&report.rankings)));
    }
    for m in &report.cross_matrices {
        out.push((format!("crossgen-{}.svg", m.task), heatmap(m)));
    }
    out
}

/// Writes every chart into `dir` and returns the paths.
pub fn write_report_svg(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    render_report_svg(report)
        .into_iter()
        .map(|(name, svg)| {
            let p = dir.join(name);
            fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
            Ok(p)
        })
        .collect()
}
