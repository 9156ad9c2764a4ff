//! Logistic regression by full-batch gradient descent on standardized
//! features.

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogregParams {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams {
            lr: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 1 for constant columns.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

fn dot(w: &[f64], z: &[f64]) -> f64 {
    w.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// Mean logistic loss plus `l2/2 · |w|²` (the bias is not penalized).
pub fn logistic_loss(w: &[f64], b: f64, z: &[Vec<f64>], y: &[bool], l2: f64) -> f64 {
    let n = z.len() as f64;
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(r, t)| {
            let s = dot(w, r) + b;
            softplus(s) - if *t { s } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`] as (weights, bias).
pub fn logistic_gradient(w: &[f64], b: f64, z: &[Vec<f64>], y: &[bool], l2: f64) -> (Vec<f64>, f64) {
    let n = z.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (r, t) in z.iter().zip(y) {
        let err = sigmoid(dot(w, r) + b) - if *t { 1.0 } else { 0.0 };
        for (g, x) in gw.iter_mut().zip(r) {
            *g += err * x;
        }
        gb += err;
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    (gw, gb / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogregModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, &self.standardizer.apply(row)) + self.bias)
    }
}

/// Starts from zero weights. A step that would raise the loss is rejected
/// and the learning rate halved, so the loss never increases.
pub fn train_logreg(x: &[Vec<f64>], y: &[bool], params: &LogregParams) -> Result<LogregModel> {
    let standardizer = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
    let d = standardizer.mean.len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut lr = params.lr;
    let mut loss = logistic_loss(&w, b, &z, y, params.l2);
    for _ in 0..params.epochs {
        let (gw, gb) = logistic_gradient(&w, b, &z, y, params.l2);
        let w2: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - lr * g).collect();
        let b2 = b - lr * gb;
        let loss2 = logistic_loss(&w2, b2, &z, y, params.l2);
        if !loss2.is_finite() {
            return Err(KgError::NonFinite("logistic loss".into()));
        }
        if loss2 <= loss {
            w = w2;
            b = b2;
            loss = loss2;
        } else {
            lr /= 2.0;
        }
    }
    Ok(LogregModel {
        standardizer,
        weights: w,
        bias: b,
    })
}
