use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::MlpModel;
use crate::dataset::{read_dataset, sha256_bytes, Dataset, ExampleId};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metrics::{PredictionMeta, PredictionSet, Producer, PREDICTION_FORMAT_VERSION};
use crate::stimuli::Split;

pub const DEFAULT_HIDDEN: [usize; 2] = [256, 128];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: DEFAULT_HIDDEN.to_vec(),
            batch_size: 32,
            learning_rate: 1e-4,
            momentum: 0.9,
            weight_decay: 1e-6,
            max_epochs: 50,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        // zero is accepted so a run can be checked for parameter drift
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be finite and >= 0", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum {} outside [0, 1)", self.momentum));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay {} must be finite and >= 0", self.weight_decay));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return bad("max_epochs and patience must be positive".into());
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer of size 0".into());
        }
        Ok(())
    }

    /// Layer dimensions for a given input and output size.
    pub fn dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut d = vec![input];
        d.extend(&self.hidden);
        d.push(output);
        d
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_bytes(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// In-memory examples: one flattened image per row.
#[derive(Debug, Clone)]
pub struct Examples {
    pub split: Split,
    pub x: Array2<f32>,
    pub y: Array2<f64>,
}

impl Examples {
    pub fn load(ds: &Dataset, split: Split) -> Result<Self> {
        let n = ds.manifest.split_counts.get(split);
        let img = &ds.manifest.image;
        let mut x = Array2::<f32>::zeros((n, img.height * img.width));
        let mut y = Array2::<f64>::zeros((n, ds.manifest.label_dim));
        for rec in read_dataset(ds, split)? {
            let rec = rec?;
            let i = rec.id.index;
            x.row_mut(i).assign(&ArrayView2::from_shape((1, rec.image.values.len()), &rec.image.values).unwrap().row(0));
            for (d, &l) in rec.labels.iter().enumerate() {
                y[[i, d]] = l as f64;
            }
        }
        Ok(Examples { split, x, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gathers rows `idx` in order; `exec` only changes who copies them.
    pub fn batch(&self, idx: &[usize], exec: Exec) -> (Array2<f64>, Array2<f64>) {
        let cols = self.x.ncols();
        let rows = exec.map_indexed(idx.len(), |j| self.x.row(idx[j]).mapv(f64::from));
        let mut x = Array2::zeros((idx.len(), cols));
        for (j, r) in rows.into_iter().enumerate() {
            x.row_mut(j).assign(&r);
        }
        let y = self.y.select(Axis(0), idx);
        (x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch whose model is returned.
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub param_checksum: String,
    pub config_hash: String,
    pub wall_clock_secs: f64,
}

/// Mean squared error of `model` over `data`, evaluated in chunks.
pub fn evaluate_mse(model: &MlpModel, data: &Examples, exec: Exec) -> Result<f64> {
    let preds = predict(model, data, exec)?;
    Ok((&preds - &data.y).iter().map(|d| d * d).sum::<f64>() / preds.len() as f64)
}

/// Predictions for every row of `data`, in row order.
pub fn predict(model: &MlpModel, data: &Examples, exec: Exec) -> Result<Array2<f64>> {
    const CHUNK: usize = 256;
    let n = data.len();
    let mut out = Array2::zeros((n, model.output_dim()));
    let mut lo = 0;
    while lo < n {
        let hi = (lo + CHUNK).min(n);
        let idx: Vec<usize> = (lo..hi).collect();
        let (x, _) = data.batch(&idx, exec);
        out.slice_mut(ndarray::s![lo..hi, ..]).assign(&model.forward(x.view())?);
        lo = hi;
    }
    Ok(out)
}

/// Mini-batch SGD with momentum and coupled weight decay:
/// v <- m v + g, p <- p - lr (v + wd p). Returns the model from the epoch
/// with the lowest validation MSE.
pub fn train(
    mut model: MlpModel,
    train_set: &Examples,
    val_set: &Examples,
    config: &TrainConfig,
    exec: Exec,
) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Empty("training or validation split"));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5348_5546_464C_4521);
    let mut vel_w: Vec<Array2<f64>> = model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
    let mut vel_b: Vec<ndarray::Array1<f64>> = model.biases.iter().map(|b| ndarray::Array1::zeros(b.raw_dim())).collect();
    let (lr, m, wd) = (config.learning_rate, config.momentum, config.weight_decay);

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::new();
    let mut best = (f64::INFINITY, 0usize, model.clone());
    let mut stale = 0;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let (x, y) = train_set.batch(idx, exec);
            let (loss, g) = model.loss_and_gradients(x.view(), y.view())?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch: b, loss });
            }
            sum += loss * idx.len() as f64;
            for l in 0..model.layers() {
                ndarray::Zip::from(&mut model.weights[l])
                    .and(&mut vel_w[l])
                    .and(&g.weights[l])
                    .for_each(|p, v, &g| {
                        *v = m * *v + g;
                        *p -= lr * (*v + wd * *p);
                    });
                ndarray::Zip::from(&mut model.biases[l])
                    .and(&mut vel_b[l])
                    .and(&g.biases[l])
                    .for_each(|p, v, &g| {
                        *v = m * *v + g;
                        *p -= lr * (*v + wd * *p);
                    });
            }
        }
        let train_mse = sum / train_set.len() as f64;
        let val_mse = evaluate_mse(&model, val_set, exec)?;
        if !val_mse.is_finite() || !model.all_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: order.len().div_ceil(config.batch_size),
                loss: val_mse,
            });
        }
        epochs.push(EpochStats { epoch, train_mse, val_mse });
        if val_mse < best.0 {
            best = (val_mse, epoch, model.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    let (best_val_mse, best_epoch, best_model) = best;
    let report = TrainReport {
        epochs,
        best_epoch,
        best_val_mse,
        param_checksum: best_model.checksum(),
        config_hash: config.hash(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    Ok((best_model, report))
}

/// Loads the dataset splits, initializes from `config.seed` and trains.
pub fn train_on_dataset(ds: &Dataset, config: &TrainConfig, exec: Exec) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    let train_set = Examples::load(ds, Split::Train)?;
    let val_set = Examples::load(ds, Split::Val)?;
    let dims = config.dims(train_set.x.ncols(), ds.manifest.label_dim);
    let model = MlpModel::init(&dims, config.seed)?;
    train(model, &train_set, &val_set, config, exec)
}

/// Predicts every example of `data` and packages the result.
pub fn prediction_set(
    model: &MlpModel,
    ds: &Dataset,
    data: &Examples,
    producer: Producer,
    exec: Exec,
) -> Result<PredictionSet> {
    let preds = predict(model, data, exec)?;
    let mut set = PredictionSet::new(PredictionMeta {
        format_version: PREDICTION_FORMAT_VERSION,
        dataset_checksum: ds.checksum(),
        split: data.split,
        label_dim: ds.manifest.label_dim,
        producer,
    });
    for (i, row) in preds.rows().into_iter().enumerate() {
        set.insert(ExampleId { split: data.split, index: i }, row.to_vec())?;
    }
    Ok(set)
}

/// Writes predictions for one split to `path` (plus sidecar).
pub fn write_predictions(
    model: &MlpModel,
    ds: &Dataset,
    split: Split,
    path: &Path,
    producer: Producer,
    exec: Exec,
) -> Result<PredictionSet> {
    let data = Examples::load(ds, split)?;
    let set = prediction_set(model, ds, &data, producer, exec)?;
    set.write(path)?;
    Ok(set)
}
