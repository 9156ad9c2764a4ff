//! Precision, recall and F-beta scores.

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_05: f64,
    pub f_1: f64,
    pub f_2: f64,
}

/// `(1+β²)PR / (β²P + R)`, 0 when the denominator is 0.
pub fn f_beta(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / den
    }
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        EvalReport {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f_05: f_beta(precision, recall, 0.5),
            f_1: f_beta(precision, recall, 1.0),
            f_2: f_beta(precision, recall, 2.0),
        }
    }
}

pub fn evaluate(preds: &[bool], truth: &[bool]) -> Result<EvalReport> {
    if preds.len() != truth.len() {
        return Err(KgError::LengthMismatch {
            left: preds.len(),
            right: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (p, t) in preds.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_, tn))
}
