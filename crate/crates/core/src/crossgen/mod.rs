//! Train-on-one, test-on-all parameterization matrices.

mod external;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use external::{ExternalTrainer, VIT_TRAINER_ENV};

use crate::baseline::{prediction_set, train_on_dataset, Examples, TrainConfig};
use crate::dataset::{build_dataset, BuildOptions, Dataset, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metrics::{mean, mlae, PredictionSet, Producer, Truths};
use crate::stimuli::{Split, TaskKind, Variant};

/// Rows and columns of every matrix, in this order.
pub fn enumerate_parameterizations(_task: TaskKind) -> Vec<Variant> {
    Variant::ALL.to_vec()
}

/// Anything that can train on one dataset and predict the test split of
/// others.
pub trait Trainer: Sync {
    fn name(&self) -> String;

    fn config_hash(&self) -> String;

    /// Returns one prediction set per entry of `eval`, for its test split.
    fn train_and_predict(&self, train: &Dataset, seed: u64, eval: &[Dataset], work_dir: &Path) -> Result<Vec<PredictionSet>>;
}

/// The built-in MLP baseline.
#[derive(Debug, Clone)]
pub struct MlpTrainer {
    pub config: TrainConfig,
    pub exec: Exec,
}

impl Trainer for MlpTrainer {
    fn name(&self) -> String {
        "mlp".into()
    }

    fn config_hash(&self) -> String {
        self.config.hash()
    }

    fn train_and_predict(&self, train: &Dataset, seed: u64, eval: &[Dataset], _work_dir: &Path) -> Result<Vec<PredictionSet>> {
        let config = TrainConfig {
            seed,
            ..self.config.clone()
        };
        let (model, _) = train_on_dataset(train, &config, self.exec)?;
        let producer = Producer {
            model: self.name(),
            seed,
            config_hash: config.hash(),
        };
        eval.iter()
            .map(|ds| {
                let test = Examples::load(ds, Split::Test)?;
                prediction_set(&model, ds, &test, producer.clone(), self.exec)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    Failed { cause: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub train: Variant,
    pub test: Variant,
    /// Mean over seeds; absent when the cell failed.
    pub mlae: Option<f64>,
    /// One value per seed, in seed order.
    pub runs: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(flatten)]
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub task: TaskKind,
    pub model: String,
    pub config_hash: String,
    pub variants: Vec<Variant>,
    /// Manifest checksum per variant, same order as `variants`.
    pub dataset_checksums: Vec<String>,
    /// `cells[train][test]`.
    pub cells: Vec<Vec<Cell>>,
    /// Rows whose mean is below their diagonal entry.
    pub findings: Vec<String>,
}

impl CrossMatrix {
    pub fn cell(&self, train: Variant, test: Variant) -> Option<&Cell> {
        let r = self.variants.iter().position(|&v| v == train)?;
        let c = self.variants.iter().position(|&v| v == test)?;
        Some(&self.cells[r][c])
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().flatten().all(|c| c.status == CellStatus::Ok)
    }

    /// Rows are training variants, columns testing variants; failed cells
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("train\\test");
        for v in &self.variants {
            out.push(',');
            out.push_str(v.id());
        }
        out.push('\n');
        for (r, row) in self.cells.iter().enumerate() {
            out.push_str(self.variants[r].id());
            for c in row {
                out.push(',');
                if let Some(v) = c.mlae {
                    out.push_str(&format!("{v:?}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join(format!("{stem}.csv"));
        fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let json = dir.join(format!("{stem}.json"));
        let mut bytes = serde_json::to_vec_pretty(self).expect("matrix serializes");
        bytes.push(b'\n');
        fs::write(&json, bytes).map_err(|e| Error::io(&json, e))?;
        Ok((csv, json))
    }
}

#[derive(Debug, Clone)]
pub struct CrossConfig {
    pub task: TaskKind,
    /// Examples per variant dataset.
    pub dataset_size: usize,
    pub dataset_seed: u64,
    /// Training seeds; each cell averages one run per seed.
    pub seeds: Vec<u64>,
    /// Datasets are built here, or reused when already present.
    pub data_dir: PathBuf,
    /// Cells (training jobs) run concurrently through this.
    pub exec: Exec,
}

pub fn dataset_dir(data_dir: &Path, task: TaskKind, variant: Variant) -> PathBuf {
    data_dir.join(format!("{task}-{}", variant.slug()))
}

/// Opens the dataset for `variant` if it matches the request, otherwise
/// builds it.
pub fn ensure_dataset(cfg: &CrossConfig, variant: Variant) -> Result<Dataset> {
    let dir = dataset_dir(&cfg.data_dir, cfg.task, variant);
    if dir.join(MANIFEST_FILE).exists() {
        let ds = Dataset::open(&dir)?;
        let m = &ds.manifest;
        if m.task == cfg.task && m.variant == variant && m.total_count == cfg.dataset_size && m.base_seed == cfg.dataset_seed {
            return Ok(ds);
        }
    }
    build_dataset(
        cfg.task,
        variant,
        cfg.dataset_size,
        cfg.dataset_seed,
        &dir,
        BuildOptions::default(),
    )
}

/// Trains one model per (training variant, seed), scores it on every
/// variant's test split and assembles the matrix. A failed job marks its
/// row failed with the cause; the other rows still complete.
pub fn run_cross_matrix(cfg: &CrossConfig, trainer: &dyn Trainer) -> Result<CrossMatrix> {
    if cfg.seeds.is_empty() {
        return Err(Error::Empty("seeds"));
    }
    let variants = enumerate_parameterizations(cfg.task);
    let datasets = variants
        .iter()
        .map(|&v| ensure_dataset(cfg, v))
        .collect::<Result<Vec<_>>>()?;
    let truths = datasets
        .iter()
        .map(|ds| Truths::load(ds, Split::Test))
        .collect::<Result<Vec<_>>>()?;

    let nv = variants.len();
    let ns = cfg.seeds.len();
    let work = cfg.data_dir.join("work");
    // job j trains on variant j / ns with seed j % ns
    let jobs = cfg.exec.map_indexed(nv * ns, |j| -> Result<Vec<f64>> {
        let (r, s) = (j / ns, j % ns);
        let seed = cfg.seeds[s];
        let dir = work.join(format!("{}-{seed}", variants[r].slug()));
        let preds = trainer.train_and_predict(&datasets[r], seed, &datasets, &dir)?;
        if preds.len() != nv {
            return Err(Error::External(format!("trainer returned {} prediction sets for {nv} datasets", preds.len())));
        }
        preds.iter().zip(&truths).map(|(p, t)| mlae(p, t)).collect()
    });

    let mut cells = Vec::with_capacity(nv);
    for (r, &train) in variants.iter().enumerate() {
        let row_jobs = &jobs[r * ns..(r + 1) * ns];
        let failure = row_jobs.iter().find_map(|j| j.as_ref().err()).map(|e| e.to_string());
        let row = variants
            .iter()
            .enumerate()
            .map(|(c, &test)| match &failure {
                Some(cause) => Cell {
                    train,
                    test,
                    mlae: None,
                    runs: vec![],
                    seeds: cfg.seeds.clone(),
                    status: CellStatus::Failed { cause: cause.clone() },
                },
                None => {
                    let runs: Vec<f64> = row_jobs.iter().map(|j| j.as_ref().unwrap()[c]).collect();
                    Cell {
                        train,
                        test,
                        mlae: Some(mean(&runs)),
                        runs,
                        seeds: cfg.seeds.clone(),
                        status: CellStatus::Ok,
                    }
                }
            })
            .collect();
        cells.push(row);
    }

    let findings = cells
        .iter()
        .enumerate()
        .filter_map(|(r, row): (usize, &Vec<Cell>)| {
            let vals: Vec<f64> = row.iter().filter_map(|c| c.mlae).collect();
            let diag = row[r].mlae?;
            let row_mean = mean(&vals);
            (vals.len() == nv && row_mean < diag).then(|| {
                format!(
                    "trained on {}: row mean {row_mean:.3} below in-parameter score {diag:.3}",
                    variants[r]
                )
            })
        })
        .collect();

    Ok(CrossMatrix {
        task: cfg.task,
        model: trainer.name(),
        config_hash: trainer.config_hash(),
        variants,
        dataset_checksums: datasets.iter().map(Dataset::checksum).collect(),
        cells,
        findings,
    })
}

/// Standalone in-parameter score: train on `ds` once per seed, score its
/// own test split, average. Matches the matrix diagonal.
pub fn standalone_score(ds: &Dataset, trainer: &dyn Trainer, seeds: &[u64], work_dir: &Path) -> Result<f64> {
    let truths = Truths::load(ds, Split::Test)?;
    let runs = seeds
        .iter()
        .map(|&s| {
            let preds = trainer.train_and_predict(ds, s, std::slice::from_ref(ds), work_dir)?;
            mlae(&preds[0], &truths)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&runs))
}
