use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Fully connected regressor: ReLU on hidden layers, identity on the output.
/// With no hidden layers it is a linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dims: Vec<usize>,
    /// `weights[l]` has shape (dims[l], dims[l + 1]).
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Gradients with the same layout as the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Forward activations kept for backpropagation. `acts[0]` is the input.
pub struct Trace {
    acts: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().unwrap()
    }
}

impl MlpModel {
    /// Xavier-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer dimensions {dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let bound = (6.0 / (w[0] + w[1]) as f64).sqrt();
            let u = Uniform::new_inclusive(-bound, bound);
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || u.sample(&mut rng)));
            biases.push(Array1::zeros(w[1]));
        }
        Ok(MlpModel {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    }

    /// All parameters zero.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let mut m = Self::init(dims, 0)?;
        m.weights.iter_mut().for_each(|w| w.fill(0.0));
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, model expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub fn forward_trace(&self, x: ArrayView2<f64>) -> Result<Trace> {
        self.check_input(&x)?;
        let mut acts = Vec::with_capacity(self.layers() + 1);
        acts.push(x.to_owned());
        for l in 0..self.layers() {
            let mut z = acts[l].dot(&self.weights[l]);
            z += &self.biases[l];
            if l + 1 < self.layers() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        Ok(Trace { acts })
    }

    /// Predictions for a batch laid out one example per row.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut a = x.dot(&self.weights[0]);
        a += &self.biases[0];
        for l in 1..self.layers() {
            a.mapv_inplace(|v| v.max(0.0));
            a = a.dot(&self.weights[l]);
            a += &self.biases[l];
        }
        Ok(a)
    }

    /// Mean squared error over every (example, output) entry and its
    /// gradient.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<(f64, Gradients)> {
        let trace = self.forward_trace(x)?;
        let out = trace.output();
        if out.dim() != y.dim() {
            return Err(Error::Shape(format!("targets {:?} vs outputs {:?}", y.dim(), out.dim())));
        }
        let diff = out - &y;
        let n = diff.len() as f64;
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
        let mut delta = diff * (2.0 / n);
        let mut gw = Vec::with_capacity(self.layers());
        let mut gb = Vec::with_capacity(self.layers());
        for l in (0..self.layers()).rev() {
            gw.push(trace.acts[l].t().dot(&delta));
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l].t());
                back.zip_mut_with(&trace.acts[l], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = back;
            }
        }
        gw.reverse();
        gb.reverse();
        Ok((loss, Gradients { weights: gw, biases: gb }))
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
        let out = self.forward(x)?;
        Ok((&out - &y).iter().map(|d| d * d).sum::<f64>() / out.len() as f64)
    }

    /// Flat index over weights then biases, layer by layer.
    pub fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in 0..self.layers() {
            let nw = self.weights[l].len();
            if i < nw {
                let cols = self.dims[l + 1];
                return &mut self.weights[l][[i / cols, i % cols]];
            }
            i -= nw;
            let nb = self.biases[l].len();
            if i < nb {
                return &mut self.biases[l][i];
            }
            i -= nb;
        }
        panic!("parameter index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// SHA-256 over dimensions and little-endian parameter bytes.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for &d in &self.dims {
            h.update((d as u64).to_le_bytes());
        }
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for v in w.iter().chain(b.iter()) {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

impl Gradients {
    /// Same flat indexing as [`MlpModel::param_mut`].
    pub fn get(&self, mut i: usize) -> f64 {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if i < w.len() {
                let cols = w.ncols();
                return w[[i / cols, i % cols]];
            }
            i -= w.len();
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("gradient index out of range");
    }
}

/// Largest relative error between analytic and central-difference
/// gradients over `samples` random parameters, measured on one example.
pub fn gradient_check(
    model: &MlpModel,
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(Error::Config(format!("epsilon {epsilon} outside [1e-6, 1e-3]")));
    }
    let (_, grads) = model.loss_and_gradients(x, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = Uniform::new(0, model.param_count());
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for _ in 0..samples.max(100) {
        let i = pick.sample(&mut rng);
        let orig = *probe.param_mut(i);
        *probe.param_mut(i) = orig + epsilon;
        let up = probe.loss(x, y)?;
        *probe.param_mut(i) = orig - epsilon;
        let down = probe.loss(x, y)?;
        *probe.param_mut(i) = orig;
        let numeric = (up - down) / (2.0 * epsilon);
        let analytic = grads.get(i);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Converts a batch of f32 rows to the f64 layout the model consumes.
pub fn to_f64_rows(rows: ArrayView2<f32>) -> Array2<f64> {
    rows.mapv(f64::from)
}
