//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs at full size (10,000-example datasets, real
//! training), so expect several minutes in the test profile.
//!
//! Set PERCEPT_ACCEPTANCE=<substring> to run only matching criteria.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use percept_core::baseline::{gradient_check, predict, train, Examples, MlpModel, TrainConfig};
use percept_core::crossgen::{dataset_dir, run_cross_matrix, standalone_score, CrossConfig, MlpTrainer};
use percept_core::dataset::{
    build_dataset, draw_split_params, read_split_params, rewrite_example_params, verify_split_disjointness,
    BuildOptions, Dataset, ViolationKind,
};
use percept_core::metrics::{log_abs_error, mlae, mlae_values, Aggregation, PredictionMeta, PredictionSet, Producer, Truths, PREDICTION_FORMAT_VERSION};
use percept_core::report::{reference, reference_sources};
use percept_core::stats::{anova_oneway, tukey_hsd, GroupSample};
use percept_core::stimuli::{
    param_space, render, split_of, validate_label_values, CloudBase, Elementary, FrameStyle, Split, StimulusSpec,
    TaskKind, Variant,
};
use percept_core::Exec;

const BIN: &str = env!("CARGO_BIN_EXE_percept-bench");
const LENGTH: TaskKind = TaskKind::Elementary(Elementary::Length);

// Tolerances and sizes, pinned.
const IDENTITY_TOL: f64 = 1e-9;
const LOG2_2_125: f64 = 1.087_462_841_250_339_4; // mpmath, 30 digits
const FULL_SIZE: usize = 10_000;
const PIXEL_SAMPLES: usize = 1_000;
const GRAD_PAIRS: u64 = 20;
const GRAD_TOL: f64 = 1e-4;
const GRAD_EPS: f64 = 1e-5;
const GRAD_SAMPLES: usize = 100;
const EFFICACY_MAX_MLAE: f64 = 3.0;
const EFFICACY_MARGIN: f64 = 1.0;
const EFFICACY_EPOCHS: usize = 20;
const TUKEY_TOL: f64 = 1e-3;
const AFFINE_TOL: f64 = 1e-9;
const CROSS_SIZE: usize = 1_000;
const CROSS_SEEDS: [u64; 2] = [0, 1];
const CROSS_EPOCHS: usize = 10;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn mlae_identities() -> Outcome {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let ds = build_dataset(LENGTH, Variant::Base, 50, 1, dir.path(), BuildOptions::default()).map_err(e2s)?;
    let truths = Truths::load(&ds, Split::Test).map_err(e2s)?;
    let mut exact = PredictionSet::new(PredictionMeta {
        format_version: PREDICTION_FORMAT_VERSION,
        dataset_checksum: ds.checksum(),
        split: Split::Test,
        label_dim: 1,
        producer: Producer { model: "oracle".into(), seed: 0, config_hash: String::new() },
    });
    for (i, t) in truths.labels.iter().enumerate() {
        exact.insert(format!("test:{i}").parse().map_err(e2s)?, t.clone()).map_err(e2s)?;
    }
    let zero = mlae(&exact, &truths).map_err(e2s)?;
    ensure(zero == -3.0, || format!("zero-error set scored {zero}"))?;
    let one = mlae_values(&[0.27], &[0.25], Aggregation::Mean).map_err(e2s)?;
    ensure((one - LOG2_2_125).abs() < IDENTITY_TOL, || format!("2-percent error scored {one}"))?;
    ensure(log_abs_error(0.5, 0.5) == -3.0, || "log_abs_error(0.5, 0.5) != -3".into())?;
    Ok(format!("zero error {zero}, 2% error {one:.12} (|diff| {:.1e})", (one - LOG2_2_125).abs()))
}

fn files_of(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
        }
    }
    out
}

fn generate_cli(task: TaskKind, seed: u64, out: &Path) -> Result<(), String> {
    let o = Command::new(BIN)
        .args(["generate", "--task", &task.to_string(), "--count", &FULL_SIZE.to_string()])
        .args(["--seed", &seed.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(e2s)?;
    ensure(o.status.success(), || format!("generate {task}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn determinism(root: &Path) -> Outcome {
    let mut files = 0;
    for (k, task) in TaskKind::kinds().into_iter().enumerate() {
        let seed = 1000 + k as u64;
        let (a, b) = (root.join(format!("{task}-a")), root.join(format!("{task}-b")));
        generate_cli(task, seed, &a)?;
        generate_cli(task, seed, &b)?;
        let (fa, fb) = (files_of(&a), files_of(&b));
        ensure(fa.len() == 7, || format!("{task}: expected 7 files, found {}", fa.len()))?;
        for (name, bytes) in &fa {
            ensure(fb.get(name) == Some(bytes), || format!("{task}: {name} differs between runs"))?;
        }
        files += fa.len();
        std::fs::remove_dir_all(&b).map_err(e2s)?;
    }
    Ok(format!("13 kinds x {FULL_SIZE} examples, {files} file pairs byte-identical"))
}

// Moves train:0 into another split's subset by changing its label
// parameters while keeping them valid for the task. Position-angle values
// must sum to 100, so mass is shifted between the first two values.
fn inject_leak(ds: &mut Dataset, task: TaskKind, variant: Variant) -> Result<(), String> {
    let p = read_split_params(ds, Split::Train).map_err(e2s)?[0].params.clone();
    let dims = param_space(task, variant);
    let n = task.label_param_count();
    let paired = matches!(task, TaskKind::PositionAngle(_));
    let leaks = |q: &Vec<i32>| {
        dims[..n].iter().zip(q).all(|(d, &v)| d.contains(v))
            && split_of(task, q) != Split::Train
            && validate_label_values(task, &q[..n]).is_ok()
    };
    let q = (-100..=100)
        .filter(|&d| d != 0)
        .map(|d| {
            let mut q = p.clone();
            q[0] += d;
            if paired {
                q[1] -= d;
            }
            q
        })
        .find(leaks)
        .ok_or_else(|| format!("{task}: no leaking value for {}", dims[0].name))?;
    rewrite_example_params(ds, Split::Train, 0, q).map_err(e2s)
}

fn split_integrity(root: &Path) -> Outcome {
    let mut checked = 0;
    for (k, task) in TaskKind::kinds().into_iter().enumerate() {
        for variant in Variant::ALL {
            let reuse = root.join(format!("{task}-a"));
            let mut ds = if variant == Variant::Base && reuse.is_dir() {
                Dataset::open(&reuse).map_err(e2s)?
            } else {
                let dir = root.join(format!("{task}-{}", variant.slug()));
                build_dataset(task, variant, FULL_SIZE, 2000 + k as u64, &dir, BuildOptions::default()).map_err(e2s)?
            };
            let r = verify_split_disjointness(&ds).map_err(e2s)?;
            ensure(r.examples_checked == FULL_SIZE, || format!("{task} {variant:?}: checked {}", r.examples_checked))?;
            ensure(r.is_clean(), || format!("{task} {variant:?}: {} violations, first {}", r.violations.len(), r.violations[0]))?;
            checked += r.examples_checked;

            if variant == Variant::Base {
                inject_leak(&mut ds, task, variant)?;
                let r = verify_split_disjointness(&ds).map_err(e2s)?;
                ensure(r.violations.len() == 1, || format!("{task}: injected leak gave {} violations", r.violations.len()))?;
                let v = &r.violations[0];
                ensure(
                    v.id.to_string() == "train:0"
                        && v.kinds.iter().any(|k| matches!(k, ViolationKind::WrongSubset { .. })),
                    || format!("{task}: unexpected violation {v}"),
                )?;
            }
            std::fs::remove_dir_all(&ds.dir).map_err(e2s)?;
        }
    }
    Ok(format!("52 datasets, {checked} examples, 0 violations; 13 injected leaks caught exactly once"))
}

fn lit_rows(c: &percept_core::stimuli::Canvas) -> usize {
    (0..c.height() as i32).filter(|&y| (0..c.width() as i32).any(|x| c.get(x, y))).count()
}

// Contiguous runs of non-empty columns.
fn column_runs(c: &percept_core::stimuli::Canvas) -> Vec<(i32, i32)> {
    let lit: Vec<bool> = (0..c.width() as i32).map(|x| (0..c.height() as i32).any(|y| c.get(x, y))).collect();
    let mut runs = Vec::new();
    let mut start = None;
    for (x, &on) in lit.iter().chain([false].iter()).enumerate() {
        match (on, start) {
            (true, None) => start = Some(x as i32),
            (false, Some(s)) => {
                runs.push((s, x as i32 - 1));
                start = None;
            }
            _ => {}
        }
    }
    runs
}

fn column_count(c: &percept_core::stimuli::Canvas, x: i32) -> usize {
    (0..c.height() as i32).filter(|&y| c.get(x, y)).count()
}

fn samples(task: TaskKind, variant: Variant, seed: u64, n: usize) -> Result<Vec<StimulusSpec>, String> {
    let mut out = Vec::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        let k = if split == Split::Train { n - 2 * (n / 5) } else { n / 5 };
        for ex in draw_split_params(task, variant, seed, split, k, false).map_err(e2s)? {
            out.push(StimulusSpec { task, variant, params: ex.params, seed: ex.seed });
        }
    }
    Ok(out)
}

fn pixel_label_consistency() -> Outcome {
    // length: lit rows are the segment length
    for spec in samples(LENGTH, Variant::PosSize, 31, PIXEL_SAMPLES)? {
        let s = render(&spec).map_err(e2s)?;
        let measured = lit_rows(&s.canvas) as f64 / 92.0;
        ensure(measured == s.labels[0], || format!("length {:?}: measured {measured}, label {}", spec.params, s.labels[0]))?;
    }
    // bars: two column runs; plain bars are solid, framed bars add one
    // frame pixel above and below in every inner column
    for (i, style) in [FrameStyle::Bar, FrameStyle::Framed].into_iter().enumerate() {
        let task = TaskKind::BarsFramed(style);
        for spec in samples(task, Variant::PosSize, 32 + i as u64, PIXEL_SAMPLES / 2)? {
            let s = render(&spec).map_err(e2s)?;
            let runs = column_runs(&s.canvas);
            ensure(runs.len() == 2, || format!("{task} {:?}: {} column runs", spec.params, runs.len()))?;
            let frame = if style == FrameStyle::Framed { 2 } else { 0 };
            let h: Vec<usize> = runs.iter().map(|&(a, b)| column_count(&s.canvas, (a + b) / 2) - frame).collect();
            let ratio = h[0].min(h[1]) as f64 / h[0].max(h[1]) as f64;
            ensure(ratio == s.labels[0], || format!("{task} {:?}: heights {h:?}, label {}", spec.params, s.labels[0]))?;
        }
    }
    // point cloud: lit pixels are base + delta
    for (i, base) in [CloudBase::Ten, CloudBase::Hundred, CloudBase::Thousand].into_iter().enumerate() {
        let task = TaskKind::PointCloud(base);
        let n = if i == 0 { PIXEL_SAMPLES - 2 * (PIXEL_SAMPLES / 3) } else { PIXEL_SAMPLES / 3 };
        for spec in samples(task, Variant::PosSize, 40 + i as u64, n)? {
            let s = render(&spec).map_err(e2s)?;
            let count = s.canvas.count_set();
            let delta = count as i64 - base.count() as i64;
            ensure(delta as f64 / 10.0 == s.labels[0] && delta == spec.params[0] as i64, || {
                format!("{task} {:?}: {count} dots, label {}", spec.params, s.labels[0])
            })?;
        }
    }
    Ok(format!("{PIXEL_SAMPLES} each of length, bars-framed, point-cloud: all exact"))
}

fn gradient_correctness() -> Outcome {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let ds = build_dataset(LENGTH, Variant::PosSize, 100, 5, dir.path(), BuildOptions::default()).map_err(e2s)?;
    let data = Examples::load(&ds, Split::Train).map_err(e2s)?;
    let dims = TrainConfig::default().dims(data.x.ncols(), 1);
    let mut worst: f64 = 0.0;
    for pair in 0..GRAD_PAIRS {
        let model = MlpModel::init(&dims, 100 + pair).map_err(e2s)?;
        let (x, y) = data.batch(&[(pair as usize * 7) % data.len()], Exec::Sequential);
        let err = gradient_check(&model, x.view(), y.view(), GRAD_EPS, GRAD_SAMPLES, pair).map_err(e2s)?;
        worst = worst.max(err);
    }
    ensure(worst < GRAD_TOL, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("{GRAD_PAIRS} pairs on {dims:?}, max relative error {worst:.3e}"))
}

fn baseline_efficacy(root: &Path) -> Outcome {
    let dir = root.join("efficacy");
    let ds = build_dataset(LENGTH, Variant::Base, FULL_SIZE, 7, &dir, BuildOptions::default()).map_err(e2s)?;
    let c = ds.manifest.split_counts;
    ensure((c.train, c.val, c.test) == (6000, 2000, 2000), || format!("split counts {c:?}"))?;
    let cfg = TrainConfig { max_epochs: EFFICACY_EPOCHS, ..TrainConfig::default() };
    let train_set = Examples::load(&ds, Split::Train).map_err(e2s)?;
    let val_set = Examples::load(&ds, Split::Val).map_err(e2s)?;
    let model = MlpModel::init(&cfg.dims(train_set.x.ncols(), 1), cfg.seed).map_err(e2s)?;
    let (model, report) = train(model, &train_set, &val_set, &cfg, Exec::auto()).map_err(e2s)?;
    drop((train_set, val_set));
    let test = Examples::load(&ds, Split::Test).map_err(e2s)?;
    let pred = predict(&model, &test, Exec::auto()).map_err(e2s)?;
    let truths: Vec<f64> = test.y.column(0).to_vec();
    let score = mlae_values(&pred.column(0).to_vec(), &truths, Aggregation::Mean).map_err(e2s)?;

    // Brute-force oracle: best constant on a 0.001 grid, scored on the
    // test labels themselves with an independent loop.
    let oracle = |c: f64| truths.iter().map(|t| ((100.0 * c - 100.0 * t).abs() + 0.125).log2()).sum::<f64>() / truths.len() as f64;
    let best_const = (0..=1000).map(|i| oracle(i as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
    let _ = std::fs::remove_dir_all(&dir);

    let detail = format!(
        "test MLAE {score:.3} after {} epochs (best {}), best constant {best_const:.3}, margin {:.3}",
        report.epochs.len(),
        report.best_epoch,
        best_const - score
    );
    ensure(score <= EFFICACY_MAX_MLAE && best_const - score >= EFFICACY_MARGIN, || detail.clone())?;
    Ok(detail)
}

fn group(data: &[&[f64]], f: impl Fn(f64) -> f64) -> Vec<GroupSample> {
    data.iter()
        .enumerate()
        .map(|(i, v)| GroupSample::new(format!("g{i}"), v.iter().map(|&x| f(x)).collect()))
        .collect()
}

fn stats_oracle() -> Outcome {
    let hand = anova_oneway(&group(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]], |x| x)).map_err(e2s)?;
    ensure(hand.f == 1.5 && hand.df_between == 1 && hand.df_within == 4, || format!("{hand:?}"))?;

    // scipy 1.15.3 stats.tukey_hsd
    const GROUPS: [&[f64]; 3] = [&[2.1, 2.5, 1.9, 2.8, 2.3], &[1.2, 0.8, 1.5, 1.1, 0.9], &[2.0, 2.6, 2.9, 2.4, 3.1]];
    const REF: [(usize, usize, f64, f64); 3] = [
        (0, 1, 7.644_934_674_541_732, 4.305_706_113_786_334e-4),
        (0, 2, 1.754_575_171_206_297_6, 0.453_242_627_905_778_3),
        (1, 2, 9.399_509_845_748_03, 6.528_871_210_242_926e-5),
    ];
    let base = tukey_hsd(&group(&GROUPS, |x| x), 0.05).map_err(e2s)?;
    let mut worst: f64 = 0.0;
    for (i, j, q, p) in REF {
        let e = base.entry(&format!("g{i}"), &format!("g{j}")).ok_or("missing pair")?;
        worst = worst.max((e.q - q).abs()).max((e.p - p).abs());
    }
    ensure(worst < TUKEY_TOL, || format!("max |diff| vs scipy {worst:.2e}"))?;

    let f0 = anova_oneway(&group(&GROUPS, |x| x)).map_err(e2s)?.f;
    for (a, b) in [(1.0, 100.0), (3.7, -12.0), (-0.25, 5.0), (1e3, 0.0)] {
        let g = group(&GROUPS, |x| a * x + b);
        let f = anova_oneway(&g).map_err(e2s)?.f;
        ensure(((f - f0) / f0).abs() < AFFINE_TOL, || format!("F moved under x -> {a}x + {b}: {f0} vs {f}"))?;
        let t = tukey_hsd(&g, 0.05).map_err(e2s)?;
        for e in &base.entries {
            let o = t.entry(&e.a, &e.b).ok_or("missing pair")?;
            ensure((o.q - e.q).abs() <= AFFINE_TOL * e.q.max(1.0), || format!("q moved for {}-{}: {} vs {}", e.a, e.b, e.q, o.q))?;
        }
    }
    Ok(format!("F = 1.5 with df (1, 4); Tukey max |diff| vs scipy {worst:.2e}; affine-invariant"))
}

fn cross_matrix(root: &Path) -> Outcome {
    let cfg = CrossConfig {
        task: LENGTH,
        dataset_size: CROSS_SIZE,
        dataset_seed: 11,
        seeds: CROSS_SEEDS.to_vec(),
        data_dir: root.join("cross"),
        exec: Exec::auto(),
    };
    let trainer = MlpTrainer {
        config: TrainConfig { max_epochs: CROSS_EPOCHS, ..TrainConfig::default() },
        exec: Exec::Sequential,
    };
    let m = run_cross_matrix(&cfg, &trainer).map_err(e2s)?;
    let done = m.cells.iter().flatten().filter(|c| c.mlae.is_some()).count();
    ensure(m.is_complete() && done == 16, || format!("{done}/16 cells completed"))?;
    for v in Variant::ALL {
        let ds = Dataset::open(&dataset_dir(&cfg.data_dir, LENGTH, v)).map_err(e2s)?;
        let alone = standalone_score(&ds, &trainer, &cfg.seeds, &cfg.data_dir).map_err(e2s)?;
        let cell = m.cell(v, v).and_then(|c| c.mlae).ok_or("missing diagonal")?;
        ensure(cell.to_bits() == alone.to_bits(), || format!("{}: cell {cell} vs standalone {alone}", v.id()))?;
    }
    let diag: Vec<String> = Variant::ALL.iter().map(|&v| format!("{:.3}", m.cell(v, v).unwrap().mlae.unwrap())).collect();
    Ok(format!("16/16 cells; diagonal {} equals standalone bit-exactly", diag.join(" ")))
}

fn reference_constants() -> Outcome {
    let swin = reference("Table 3 Swin").map_err(e2s)?;
    let avg = swin.scores.get("elementary-average").map(|s| s.0);
    ensure(avg == Some(0.95), || format!("Swin elementary average {avg:?}"))?;
    let human = reference("Table 2 Humans").map_err(e2s)?;
    ensure(human.scores.get("position-length-average").map(|s| s.0) == Some(2.01), || "human position-length average".into())?;
    let sources = reference_sources();
    let tables: std::collections::BTreeSet<&str> = sources.iter().map(|s| s.table.as_str()).collect();
    Ok(format!(
        "{} reference sources over {} tables shipped as constants; Swin elementary average 0.95 (not reproduced, needs multi-day GPU training)",
        sources.len(),
        tables.len()
    ))
}

fn main() {
    let only = std::env::var("PERCEPT_ACCEPTANCE").ok();
    let root = tempfile::tempdir().expect("tempdir");
    let r = root.path();
    let criteria: Vec<Criterion> = vec![
        ("mlae-identities", Box::new(mlae_identities)),
        ("determinism", Box::new(|| determinism(r))),
        ("split-integrity", Box::new(|| split_integrity(r))),
        ("pixel-label-consistency", Box::new(pixel_label_consistency)),
        ("gradient-correctness", Box::new(gradient_correctness)),
        ("baseline-efficacy", Box::new(|| baseline_efficacy(r))),
        ("statistics-oracle", Box::new(stats_oracle)),
        ("cross-matrix-bookkeeping", Box::new(|| cross_matrix(r))),
        ("reference-constants", Box::new(reference_constants)),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if only.as_deref().is_some_and(|o| !name.contains(o)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
