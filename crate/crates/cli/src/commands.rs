use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::{json, Value};

use percept_core::baseline::{
    prediction_set, save_checkpoint, train, CheckpointInfo, Examples, MlpModel, TrainConfig,
    CHECKPOINT_VERSION,
};
use percept_core::crossgen::{run_cross_matrix, CrossConfig, CrossMatrix, ExternalTrainer, MlpTrainer, Trainer};
use percept_core::dataset::{build_dataset, read_dataset, verify_split_disjointness, BuildOptions, Dataset};
use percept_core::metrics::{mlae_with, Aggregation, PredictionSet, Producer, TaskScore, Truths};
use percept_core::report::{compare_to_reference, reference, write_report_svg, EvalReport, ManifestRef, StatsSection};
use percept_core::stats::{anova_oneway, tukey_hsd, GroupSample};
use percept_core::stimuli::{Split, TaskKind, Variant};
use percept_core::Exec;

use crate::preview::write_png;
use crate::Global;

pub struct Output {
    pub json: Value,
    pub text: String,
    /// False turns into exit status 1 even though the command ran.
    pub ok: bool,
}

fn done(json: Value, text: String) -> Result<Output> {
    Ok(Output { json, text, ok: true })
}

fn exec(g: Global) -> Exec {
    if g.sequential {
        Exec::Sequential
    } else {
        Exec::auto()
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad list item `{p}`: {e}")))
        .collect()
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Task id, e.g. length, position-angle-pie, point-cloud-100.
    #[arg(long)]
    task: TaskKind,
    /// base, +pos, +size or +pos+size.
    #[arg(long, default_value = "base")]
    variant: Variant,
    /// Total examples over all splits.
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Require distinct parameter tuples within each split.
    #[arg(long)]
    unique: bool,
    /// Also write the first N training images as PNG into <out>/preview.
    #[arg(long, value_name = "N")]
    preview: Option<usize>,
}

pub fn generate(a: GenerateArgs, g: Global) -> Result<Output> {
    let opts = BuildOptions {
        unique_params: a.unique,
        exec: exec(g),
    };
    let ds = build_dataset(a.task, a.variant, a.count, a.seed, &a.out, opts)?;
    let mut previews = Vec::new();
    if let Some(n) = a.preview {
        let dir = a.out.join("preview");
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for rec in read_dataset(&ds, Split::Train)?.take(n) {
            let rec = rec?;
            let p = dir.join(format!("train-{:05}.png", rec.id.index));
            write_png(&rec.image, &p)?;
            previews.push(p.display().to_string());
        }
    }
    let m = &ds.manifest;
    let c = m.split_counts;
    let json = json!({
        "command": "generate",
        "dataset": a.out.display().to_string(),
        "manifest_checksum": ds.checksum(),
        "task": m.task,
        "variant": m.variant,
        "split_counts": c,
        "previews": previews,
    });
    let text = format!(
        "wrote {} ({} train, {} val, {} test) to {}\nmanifest sha256 {}\n",
        m.task,
        c.train,
        c.val,
        c.test,
        a.out.display(),
        ds.checksum()
    );
    done(json, text)
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    dataset: PathBuf,
}

pub fn verify(a: VerifyArgs, _g: Global) -> Result<Output> {
    let ds = Dataset::open(&a.dataset)?;
    let r = verify_split_disjointness(&ds)?;
    let mut text = format!("checked {} examples: {} violations\n", r.examples_checked, r.violations.len());
    for v in r.violations.iter().take(20) {
        text.push_str(&format!("  {v}\n"));
    }
    Ok(Output {
        ok: r.is_clean(),
        json: json!({
            "command": "verify",
            "dataset_checksum": r.dataset_checksum,
            "examples_checked": r.examples_checked,
            "clean": r.is_clean(),
            "violations": r.violations,
        }),
        text,
    })
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Directory for the checkpoint, its config echo and predictions.
    #[arg(long)]
    out: PathBuf,
    /// Hidden layer sizes; empty for a linear model.
    #[arg(long, default_value = "256,128")]
    hidden: String,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 1e-6)]
    weight_decay: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    patience: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainArgs {
    fn config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            hidden: parse_list(&self.hidden)?,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            max_epochs: self.epochs,
            patience: self.patience,
            seed: self.seed,
        })
    }
}

pub fn train_baseline(a: TrainArgs, g: Global) -> Result<Output> {
    let ex = exec(g);
    let cfg = a.config()?;
    cfg.validate()?;
    let ds = Dataset::open(&a.dataset)?;
    let train_set = Examples::load(&ds, Split::Train)?;
    let val_set = Examples::load(&ds, Split::Val)?;
    let model = MlpModel::init(&cfg.dims(train_set.x.ncols(), ds.manifest.label_dim), cfg.seed)?;
    let (model, report) = train(model, &train_set, &val_set, &cfg, ex)?;

    let ckpt = a.out.join("model.pbm");
    let info = CheckpointInfo {
        format: "PBM1".into(),
        version: CHECKPOINT_VERSION,
        dims: model.dims.clone(),
        param_checksum: model.checksum(),
        dataset_checksum: ds.checksum(),
        config: cfg.clone(),
        report: report.clone(),
    };
    save_checkpoint(&model, &ckpt, &info)?;
    let test = Examples::load(&ds, Split::Test)?;
    let producer = Producer {
        model: "mlp".into(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
    };
    let preds = prediction_set(&model, &ds, &test, producer, ex)?;
    let pred_path = a.out.join("predictions-test.csv");
    preds.write(&pred_path)?;
    let truths = Truths::load(&ds, Split::Test)?;
    let score = mlae_with(&preds, &truths, Aggregation::Mean)?;

    let text = format!(
        "trained {} epochs (best {}), val MSE {:.6}, test MLAE {score:.4}\ncheckpoint {}\npredictions {}\n",
        report.epochs.len(),
        report.best_epoch,
        report.best_val_mse,
        ckpt.display(),
        pred_path.display()
    );
    done(
        json!({
            "command": "train-baseline",
            "checkpoint": ckpt.display().to_string(),
            "predictions": pred_path.display().to_string(),
            "test_mlae": score,
            "report": report,
        }),
        text,
    )
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// One prediction CSV per run (each with its .meta.json sidecar).
    #[arg(long, num_args = 1.., required = true)]
    predictions: Vec<PathBuf>,
    /// Name recorded for the task; defaults to the dataset's task id.
    #[arg(long)]
    task_name: Option<String>,
    /// Use the interquartile mean instead of the arithmetic mean.
    #[arg(long)]
    midmean: bool,
}

pub fn evaluate(a: EvaluateArgs, _g: Global) -> Result<Output> {
    let ds = Dataset::open(&a.dataset)?;
    let sets = a
        .predictions
        .iter()
        .map(|p| PredictionSet::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let split = sets[0].meta.split;
    let truths = Truths::load(&ds, split)?;
    let how = if a.midmean { Aggregation::Midmean } else { Aggregation::Mean };
    let runs = sets
        .iter()
        .map(|s| mlae_with(s, &truths, how))
        .collect::<percept_core::Result<Vec<_>>>()?;
    let task = a.task_name.unwrap_or_else(|| ds.manifest.task.to_string());
    let score = TaskScore::from_runs(
        &task,
        runs,
        ds.checksum(),
        sets.iter().map(PredictionSet::checksum).collect(),
    )?;
    let mut text = format!("{task}: MLAE {:.4} over {} run(s)", score.mean, score.n_runs);
    if let Some(c) = score.ci95 {
        text.push_str(&format!(", 95% CI [{:.4}, {:.4}]", c.lo, c.hi));
    }
    text.push('\n');
    done(
        json!({
            "command": "evaluate",
            "task": task,
            "mlae": score.mean,
            "aggregation": how,
            "dataset": { "path": a.dataset.display().to_string(), "checksum": ds.checksum() },
            "score": score,
        }),
        text,
    )
}

#[derive(Args)]
pub struct CrossgenArgs {
    #[arg(long)]
    task: TaskKind,
    /// Examples per variant dataset.
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    dataset_seed: u64,
    /// Training seeds, comma separated.
    #[arg(long, default_value = "0,1,2,3")]
    seeds: String,
    /// `mlp` or `vit:<arch>` (vvit, cvt, swin).
    #[arg(long, default_value = "mlp")]
    model: String,
    /// Where variant datasets are built or reused.
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "256,128")]
    hidden: String,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    patience: usize,
}

pub fn crossgen(a: CrossgenArgs, g: Global) -> Result<Output> {
    let ex = exec(g);
    let trainer: Box<dyn Trainer> = match a.model.split_once(':') {
        None if a.model == "mlp" => Box::new(MlpTrainer {
            config: TrainConfig {
                hidden: parse_list(&a.hidden)?,
                max_epochs: a.epochs,
                patience: a.patience,
                ..TrainConfig::default()
            },
            exec: Exec::Sequential,
        }),
        Some(("vit", arch)) if ["vvit", "cvt", "swin"].contains(&arch) => Box::new(ExternalTrainer::vit(arch)),
        _ => bail!("unknown model `{}` (expected mlp or vit:vvit|cvt|swin)", a.model),
    };
    let cfg = CrossConfig {
        task: a.task,
        dataset_size: a.count,
        dataset_seed: a.dataset_seed,
        seeds: parse_list(&a.seeds)?,
        data_dir: a.data_dir,
        exec: ex,
    };
    let m = run_cross_matrix(&cfg, trainer.as_ref())?;
    let (csv, json_path) = m.write(&a.out, &format!("crossgen-{}", m.task))?;
    let mut text = m.to_csv();
    for f in &m.findings {
        text.push_str(&format!("finding: {f}\n"));
    }
    Ok(Output {
        ok: m.is_complete(),
        json: json!({
            "command": "crossgen",
            "csv": csv.display().to_string(),
            "json": json_path.display().to_string(),
            "complete": m.is_complete(),
            "matrix": m,
        }),
        text,
    })
}

#[derive(Args)]
pub struct StatsArgs {
    /// CSV with header `group,value`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

pub fn stats(a: StatsArgs, _g: Global) -> Result<Output> {
    let mut r = csv::Reader::from_path(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut groups: Vec<GroupSample> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let (id, v) = (rec.get(0).context("missing group")?, rec.get(1).context("missing value")?);
        let v: f64 = v.trim().parse().with_context(|| format!("bad value `{v}`"))?;
        match groups.iter_mut().find(|g| g.id == id) {
            Some(g) => g.observations.push(v),
            None => groups.push(GroupSample::new(id, vec![v])),
        }
    }
    let anova = anova_oneway(&groups)?;
    let tukey = tukey_hsd(&groups, a.alpha)?;
    let mut text = format!(
        "ANOVA F({}, {}) = {:.4}, p = {:.4e}\n",
        anova.df_between, anova.df_within, anova.f, anova.p
    );
    for e in tukey.entries.iter().filter(|e| e.difference >= 0.0 && e.a != e.b) {
        text.push_str(&format!(
            "  {} - {}: diff {:.4}, q {:.4}, p {:.4}{}\n",
            e.a,
            e.b,
            e.difference,
            e.q,
            e.p,
            if e.significant { " *" } else { "" }
        ));
    }
    done(json!({ "command": "stats", "anova": anova, "tukey": tukey }), text)
}

#[derive(Args)]
pub struct ReportArgs {
    /// JSON written by `evaluate --json`.
    #[arg(long, num_args = 1..)]
    evaluation: Vec<PathBuf>,
    /// Cross matrix JSON written by `crossgen`.
    #[arg(long)]
    crossgen: Vec<PathBuf>,
    /// JSON written by `stats --json`.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Reference source such as "Table 3 Swin".
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn read_json(p: &PathBuf) -> Result<Value> {
    let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", p.display()))
}

pub fn report(a: ReportArgs, _g: Global) -> Result<Output> {
    let mut scores = Vec::new();
    let mut manifests: BTreeMap<String, ManifestRef> = BTreeMap::new();
    for p in &a.evaluation {
        let v = read_json(p)?;
        let score: TaskScore = serde_json::from_value(v["score"].clone()).with_context(|| format!("{}: no score", p.display()))?;
        if let (Some(path), Some(sum)) = (v["dataset"]["path"].as_str(), v["dataset"]["checksum"].as_str()) {
            manifests.insert(
                sum.to_string(),
                ManifestRef {
                    path: path.to_string(),
                    checksum: sum.to_string(),
                },
            );
        }
        scores.push(score);
    }
    let mut rep = EvalReport::new(manifests.into_values().collect(), scores);
    for p in &a.crossgen {
        let m: CrossMatrix = serde_json::from_value(read_json(p)?).with_context(|| format!("{}: not a cross matrix", p.display()))?;
        rep.cross_matrices.push(m);
    }
    if let Some(p) = &a.stats {
        let v = read_json(p)?;
        rep.stats = Some(StatsSection {
            anova: serde_json::from_value(v["anova"].clone())?,
            tukey: serde_json::from_value(v["tukey"].clone())?,
        });
    }
    if let Some(id) = &a.reference {
        rep.reference = Some(compare_to_reference(&rep.means(), &reference(id)?)?);
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let svgs = write_report_svg(&rep, &a.out)?;
    rep.artifacts = svgs.iter().map(|p| p.display().to_string()).collect();
    let path = a.out.join("report.json");
    rep.write(&path)?;
    let mut text = String::new();
    for r in &rep.rankings {
        text.push_str(&format!("{:>3}. {} {:.3}{}\n", r.rank, r.task, r.score, if r.tied { " (tied)" } else { "" }));
    }
    if let Some(d) = &rep.reference {
        for r in &d.rows {
            text.push_str(&format!(
                "{} vs {}: {:+.3}{}\n",
                r.task,
                d.reference,
                r.delta,
                if r.worse_than_weakest { " (worse than every published model)" } else { "" }
            ));
        }
    }
    text.push_str(&format!("report {}\n", path.display()));
    done(
        json!({
            "command": "report",
            "report": path.display().to_string(),
            "svg": rep.artifacts,
            "rankings": rep.rankings,
            "reference": rep.reference,
        }),
        text,
    )
}
