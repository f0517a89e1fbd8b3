use std::path::Path;

use percept_core::baseline::TrainConfig;
use percept_core::crossgen::{
    dataset_dir, enumerate_parameterizations, run_cross_matrix, standalone_score, CellStatus,
    CrossConfig, ExternalTrainer, MlpTrainer,
};
use percept_core::dataset::Dataset;
use percept_core::stimuli::{Elementary, TaskKind, Variant};
use percept_core::Exec;

const LENGTH: TaskKind = TaskKind::Elementary(Elementary::Length);

fn config(dir: &Path, exec: Exec) -> CrossConfig {
    CrossConfig {
        task: LENGTH,
        dataset_size: 60,
        dataset_seed: 17,
        seeds: vec![1, 2],
        data_dir: dir.to_path_buf(),
        exec,
    }
}

fn mlp() -> MlpTrainer {
    MlpTrainer {
        config: TrainConfig {
            hidden: vec![8],
            max_epochs: 2,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        },
        exec: Exec::Sequential,
    }
}

#[test]
fn canonical_variant_order() {
    let v = enumerate_parameterizations(LENGTH);
    let ids: Vec<&str> = v.iter().map(|v| v.id()).collect();
    assert_eq!(ids, ["base", "+pos", "+size", "+pos+size"]);
    assert_eq!(v, enumerate_parameterizations(LENGTH));
    for id in ids {
        assert!(id.parse::<Variant>().is_ok());
    }
}

#[test]
fn matrix_is_complete_deterministic_and_matches_standalone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), Exec::Parallel);
    let m = run_cross_matrix(&cfg, &mlp()).unwrap();
    assert!(m.is_complete());
    assert_eq!(m.cells.iter().flatten().count(), 16);
    assert!(m.cells.iter().flatten().all(|c| c.runs.len() == 2));

    let again = run_cross_matrix(&config(dir.path(), Exec::Sequential), &mlp()).unwrap();
    assert_eq!(m, again);

    for v in Variant::ALL {
        let ds = Dataset::open(&dataset_dir(dir.path(), LENGTH, v)).unwrap();
        let alone = standalone_score(&ds, &mlp(), &cfg.seeds, dir.path()).unwrap();
        assert_eq!(m.cell(v, v).unwrap().mlae.unwrap().to_bits(), alone.to_bits());
    }

    let (csv, json) = m.write(&dir.path().join("out"), "length").unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("train\\test,base,+pos,+size,+pos+size\n"));
    assert!(json.exists());
}

#[test]
fn failed_jobs_mark_cells_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let broken = ExternalTrainer {
        arch: "vvit".into(),
        command: vec!["false".into()],
        extra_args: vec![],
    };
    let m = run_cross_matrix(&config(dir.path(), Exec::auto()), &broken).unwrap();
    assert_eq!(m.cells.iter().flatten().count(), 16);
    for c in m.cells.iter().flatten() {
        assert!(matches!(&c.status, CellStatus::Failed { cause } if cause.contains("vit:vvit")));
        assert!(c.mlae.is_none());
    }
    assert!(m.to_csv().lines().nth(1).unwrap().ends_with(",,,"));
}

#[test]
fn external_trainer_contract() {
    if std::process::Command::new("python3").arg("--version").output().is_err() {
        eprintln!("python3 not available; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/constant_trainer.py");
    let t = ExternalTrainer {
        arch: "vvit".into(),
        command: vec!["python3".into(), script.display().to_string()],
        extra_args: vec![],
    };
    let mut cfg = config(dir.path(), Exec::auto());
    cfg.seeds = vec![0];
    let m = run_cross_matrix(&cfg, &t).unwrap();
    assert!(m.is_complete(), "{:?}", m.cells[0][0].status);
    assert_eq!(m.model, "vit:vvit");
    // a constant predictor scores the same however it was trained
    let row0: Vec<f64> = m.cells.iter().map(|r| r[0].mlae.unwrap()).collect();
    assert!(row0.windows(2).all(|w| w[0] == w[1]));
}
