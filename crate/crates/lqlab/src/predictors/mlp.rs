//! One-hidden-layer feedforward network: logistic hidden units, softmax
//! output, cross-entropy loss, mini-batch gradient descent.
//!
//! Training refuses to start unless analytic gradients match central finite
//! differences on a small probe (relative error <= 1e-4).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRADIENT_CHECK_TOLERANCE: f64 = 1e-4;
pub const GRADIENT_CHECK_PROBE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig { hidden_units: 16, epochs: 200, learning_rate: 0.05, batch_size: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// hidden x input
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// output x hidden
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl MlpModel {
    fn init(n_in: usize, hidden: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale1 = 1.0 / (n_in as f64).sqrt();
        let scale2 = 1.0 / (hidden as f64).sqrt();
        let mat = |rows: usize, cols: usize, s: f64, rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-s..s)).collect())
                .collect()
        };
        MlpModel {
            w1: mat(hidden, n_in, scale1, rng),
            b1: vec![0.0; hidden],
            w2: mat(n_out, hidden, scale2, rng),
            b2: vec![0.0; n_out],
        }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b))
            .collect();
        let z: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(w, b)| w.iter().zip(&h).map(|(wi, hi)| wi * hi).sum::<f64>() + b)
            .collect();
        (h, softmax(&z))
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        let (_, p) = self.forward(x);
        argmax(&p)
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).1
    }

    /// Mean cross-entropy loss over a batch.
    fn loss(&self, xs: &[&[f64]], ys: &[u8]) -> f64 {
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let (_, p) = self.forward(x);
            total += -(p[y as usize].max(1e-300)).ln();
        }
        total / xs.len() as f64
    }

    /// Mean-loss gradients over a batch, same shapes as the parameters.
    #[allow(clippy::needless_range_loop)] // indices couple several matrices
    fn gradients(&self, xs: &[&[f64]], ys: &[u8]) -> MlpModel {
        let n_out = self.w2.len();
        let hidden = self.w1.len();
        let n_in = self.w1[0].len();
        let mut g = MlpModel {
            w1: vec![vec![0.0; n_in]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; n_out],
            b2: vec![0.0; n_out],
        };
        let inv_n = 1.0 / xs.len() as f64;
        for (x, &y) in xs.iter().zip(ys) {
            let (h, p) = self.forward(x);
            let dz: Vec<f64> = (0..n_out)
                .map(|t| (p[t] - if t == y as usize { 1.0 } else { 0.0 }) * inv_n)
                .collect();
            for t in 0..n_out {
                for j in 0..hidden {
                    g.w2[t][j] += dz[t] * h[j];
                }
                g.b2[t] += dz[t];
            }
            for j in 0..hidden {
                let dh: f64 = (0..n_out).map(|t| self.w2[t][j] * dz[t]).sum();
                let da = dh * h[j] * (1.0 - h[j]);
                for i in 0..n_in {
                    g.w1[j][i] += da * x[i];
                }
                g.b1[j] += da;
            }
        }
        g
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut v: Vec<&mut f64> = Vec::new();
        for row in &mut self.w1 {
            v.extend(row.iter_mut());
        }
        v.extend(self.b1.iter_mut());
        for row in &mut self.w2 {
            v.extend(row.iter_mut());
        }
        v.extend(self.b2.iter_mut());
        v
    }

    fn params_flat(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for row in &self.w1 {
            v.extend(row.iter().copied());
        }
        v.extend(self.b1.iter().copied());
        for row in &self.w2 {
            v.extend(row.iter().copied());
        }
        v.extend(self.b2.iter().copied());
        v
    }
}

fn argmax(p: &[f64]) -> u8 {
    let mut best = 0usize;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best as u8
}

/// Compare analytic gradients against central finite differences on a probe.
/// Returns the maximum relative error over all parameters.
pub fn gradient_check(model: &MlpModel, xs: &[&[f64]], ys: &[u8]) -> f64 {
    const H: f64 = 1e-5;
    let analytic = model.gradients(xs, ys).params_flat();
    let mut max_rel = 0.0f64;
    let mut work = model.clone();
    let n_params = analytic.len();
    #[allow(clippy::needless_range_loop)] // idx addresses both parameter views
    for idx in 0..n_params {
        let orig = *work.params_mut()[idx];
        *work.params_mut()[idx] = orig + H;
        let lp = work.loss(xs, ys);
        *work.params_mut()[idx] = orig - H;
        let lm = work.loss(xs, ys);
        *work.params_mut()[idx] = orig;
        let numeric = (lp - lm) / (2.0 * H);
        let a = analytic[idx];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        max_rel = max_rel.max(rel);
    }
    max_rel
}

/// Train the network. Runs the finite-difference gradient gate on a probe of
/// up to [`GRADIENT_CHECK_PROBE`] samples first and refuses to train if it
/// fails.
pub fn fit(
    x: &[Vec<f64>],
    y: &[u8],
    n_classes: usize,
    cfg: &MlpConfig,
    rng: &mut ChaCha8Rng,
) -> Result<MlpModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput("mlp fit: no samples".into()));
    }
    let n_in = x[0].len();
    let mut model = MlpModel::init(n_in, cfg.hidden_units, n_classes, rng);

    let probe_n = x.len().min(GRADIENT_CHECK_PROBE);
    let probe_x: Vec<&[f64]> = x[..probe_n].iter().map(|v| v.as_slice()).collect();
    let max_rel = gradient_check(&model, &probe_x, &y[..probe_n]);
    if max_rel > GRADIENT_CHECK_TOLERANCE {
        return Err(Error::GradientCheck { max_rel_err: max_rel, tolerance: GRADIENT_CHECK_TOLERANCE });
    }

    let mut order: Vec<usize> = (0..x.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| x[i].as_slice()).collect();
            let ys: Vec<u8> = batch.iter().map(|&i| y[i]).collect();
            let g = model.gradients(&xs, &ys);
            let lr = cfg.learning_rate;
            for (w, gw) in model.w1.iter_mut().zip(&g.w1) {
                for (wi, gi) in w.iter_mut().zip(gw) {
                    *wi -= lr * gi;
                }
            }
            for (b, gb) in model.b1.iter_mut().zip(&g.b1) {
                *b -= lr * gb;
            }
            for (w, gw) in model.w2.iter_mut().zip(&g.w2) {
                for (wi, gi) in w.iter_mut().zip(gw) {
                    *wi -= lr * gi;
                }
            }
            for (b, gb) in model.b2.iter_mut().zip(&g.b2) {
                *b -= lr * gb;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn toy_data() -> (Vec<Vec<f64>>, Vec<u8>) {
        // two separable blobs
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 / 20.0;
            x.push(vec![t * 0.3, 1.0 - t * 0.3]);
            y.push(0u8);
            x.push(vec![0.7 + t * 0.3, t * 0.3]);
            y.push(1u8);
        }
        (x, y)
    }

    #[test]
    fn gradient_check_passes_on_fresh_model() {
        let (x, y) = toy_data();
        let mut r = rng::master_stream(3);
        let model = MlpModel::init(2, 8, 2, &mut r);
        let xs: Vec<&[f64]> = x[..10].iter().map(|v| v.as_slice()).collect();
        let rel = gradient_check(&model, &xs, &y[..10]);
        assert!(rel <= GRADIENT_CHECK_TOLERANCE, "rel err {rel}");
    }

    #[test]
    fn finite_differences_detect_wrong_gradients() {
        // a corrupted gradient vector would fail the same relative-error
        // criterion the gate applies
        let (x, y) = toy_data();
        let mut r = rng::master_stream(3);
        let model = MlpModel::init(2, 4, 2, &mut r);
        let xs: Vec<&[f64]> = x[..10].iter().map(|v| v.as_slice()).collect();
        let analytic = model.gradients(&xs, &y[..10]).params_flat();
        let corrupted: Vec<f64> = analytic.iter().map(|g| g * 1.5 + 0.01).collect();
        let max_rel = analytic
            .iter()
            .zip(&corrupted)
            .map(|(a, c)| (a - c).abs() / (a.abs() + c.abs()).max(1e-8))
            .fold(0.0f64, f64::max);
        assert!(max_rel > GRADIENT_CHECK_TOLERANCE);
    }

    #[test]
    fn learns_separable_blobs() {
        let (x, y) = toy_data();
        let mut r = rng::master_stream(4);
        let cfg = MlpConfig { hidden_units: 8, epochs: 300, learning_rate: 0.5, batch_size: 8 };
        let model = fit(&x, &y, 2, &cfg, &mut r).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, &yi)| model.predict(xi) == yi)
            .count();
        assert!(correct as f64 / x.len() as f64 >= 0.95, "acc {}", correct);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = toy_data();
        let cfg = MlpConfig { epochs: 20, ..Default::default() };
        let a = fit(&x, &y, 2, &cfg, &mut rng::master_stream(9)).unwrap();
        let b = fit(&x, &y, 2, &cfg, &mut rng::master_stream(9)).unwrap();
        assert_eq!(a, b);
    }
}
