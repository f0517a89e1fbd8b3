use std::path::Path;
use std::process::Command;

use super::Trainer;
use crate::dataset::{sha256_bytes, Dataset, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::metrics::PredictionSet;

/// Overrides the command used to launch the ViT trainer.
pub const VIT_TRAINER_ENV: &str = "PERCEPT_VIT_TRAINER";
const DEFAULT_COMMAND: &str = "python3 -m vit_trainer";

/// Runs a separate trainer process per job:
///
/// ```text
/// <command> run --arch <arch> --seed <seed> --train-manifest <path>
///     --eval-manifest <path> ... --out-dir <dir>
/// ```
///
/// and expects `<dir>/pred-<i>.csv` plus its `.meta.json` sidecar for the
/// test split of the i-th eval manifest.
#[derive(Debug, Clone)]
pub struct ExternalTrainer {
    pub arch: String,
    pub command: Vec<String>,
    pub extra_args: Vec<String>,
}

impl ExternalTrainer {
    /// Uses `PERCEPT_VIT_TRAINER` when set, else `python3 -m vit_trainer`.
    pub fn vit(arch: &str) -> Self {
        let cmd = std::env::var(VIT_TRAINER_ENV).unwrap_or_else(|_| DEFAULT_COMMAND.to_string());
        ExternalTrainer {
            arch: arch.to_string(),
            command: cmd.split_whitespace().map(String::from).collect(),
            extra_args: vec![],
        }
    }
}

impl Trainer for ExternalTrainer {
    fn name(&self) -> String {
        format!("vit:{}", self.arch)
    }

    fn config_hash(&self) -> String {
        sha256_bytes(format!("{}|{}", self.arch, self.extra_args.join(" ")).as_bytes())
    }

    fn train_and_predict(&self, train: &Dataset, seed: u64, eval: &[Dataset], work_dir: &Path) -> Result<Vec<PredictionSet>> {
        let (prog, pre) = self
            .command
            .split_first()
            .ok_or_else(|| Error::Config("empty trainer command".into()))?;
        std::fs::create_dir_all(work_dir).map_err(|e| Error::io(work_dir, e))?;
        let mut cmd = Command::new(prog);
        cmd.args(pre)
            .arg("run")
            .args(["--arch", &self.arch])
            .args(["--seed", &seed.to_string()])
            .arg("--train-manifest")
            .arg(train.dir.join(MANIFEST_FILE));
        for ds in eval {
            cmd.arg("--eval-manifest").arg(ds.dir.join(MANIFEST_FILE));
        }
        cmd.arg("--out-dir").arg(work_dir).args(&self.extra_args);
        let out = cmd
            .output()
            .map_err(|e| Error::External(format!("cannot launch {prog}: {e}")))?;
        if !out.status.success() {
            let tail: String = String::from_utf8_lossy(&out.stderr)
                .lines()
                .rev()
                .take(5)
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect::<Vec<_>>()
                .join(" | ");
            return Err(Error::External(format!("{} exited with {}: {tail}", self.name(), out.status)));
        }
        (0..eval.len())
            .map(|i| PredictionSet::read(&work_dir.join(format!("pred-{i}.csv"))))
            .collect()
    }
}
