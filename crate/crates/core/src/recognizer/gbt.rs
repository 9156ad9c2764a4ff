//! Gradient-boosted regression trees on the logistic loss.

use serde::{Deserialize, Serialize};

use crate::recognizer::logreg::sigmoid;
use crate::recognizer::tree::{build_tree, Criterion, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub depth: usize,
    pub shrinkage: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 100,
            depth: 3,
            shrinkage: 0.1,
            lambda: 1.0,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTree {
    pub weight: f64,
    pub tree: Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Prior log-odds of the positive class.
    pub base: f64,
    pub trees: Vec<WeightedTree>,
}

impl GbtModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base + self.trees.iter().map(|t| t.weight * t.tree.eval(row)).sum::<f64>()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

fn mean_logloss(margins: &[f64], y: &[bool]) -> f64 {
    margins
        .iter()
        .zip(y)
        .map(|(m, t)| {
            let s = if *t { -m } else { *m };
            s.max(0.0) + (-s.abs()).exp().ln_1p()
        })
        .sum::<f64>()
        / margins.len() as f64
}

/// Each round fits a Newton regression tree to the loss gradients. If adding
/// it at the current weight would raise the training loss the weight is
/// halved (up to 30 times); a tree that never helps ends training.
pub fn train_gbt(x: &[Vec<f64>], y: &[bool], params: &GbtParams) -> GbtModel {
    let pos = y.iter().filter(|v| **v).count() as f64;
    let p0 = pos / y.len() as f64;
    let base = (p0 / (1.0 - p0)).ln();
    let mut model = GbtModel {
        base,
        trees: Vec::new(),
    };
    if params.shrinkage == 0.0 {
        return model;
    }
    let mut margins = vec![base; x.len()];
    let mut loss = mean_logloss(&margins, y);
    let tree_params = TreeParams {
        max_depth: params.depth,
        min_leaf: params.min_leaf,
    };
    for _ in 0..params.rounds {
        let p: Vec<f64> = margins.iter().map(|m| sigmoid(*m)).collect();
        let g: Vec<f64> = p.iter().zip(y).map(|(p, t)| p - if *t { 1.0 } else { 0.0 }).collect();
        let h: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let crit = Criterion::Newton {
            g: &g,
            h: &h,
            lambda: params.lambda,
        };
        let tree = build_tree(x, (0..x.len()).collect(), &crit, &tree_params);
        let step: Vec<f64> = x.iter().map(|r| tree.eval(r)).collect();
        let mut weight = params.shrinkage;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = margins.iter().zip(&step).map(|(m, s)| m + weight * s).collect();
            let trial_loss = mean_logloss(&trial, y);
            if trial_loss < loss {
                accepted = Some((trial, trial_loss));
                break;
            }
            weight /= 2.0;
        }
        let Some((trial, trial_loss)) = accepted else {
            break;
        };
        margins = trial;
        loss = trial_loss;
        model.trees.push(WeightedTree { weight, tree });
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Vec<Vec<f64>>, Vec<bool>) {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let y = (0..40).map(|i| i >= 25 || i % 9 == 0).collect();
        (x, y)
    }

    #[test]
    fn zero_rounds_predicts_prior() {
        let (x, y) = data();
        let m = train_gbt(&x, &y, &GbtParams { rounds: 0, ..GbtParams::default() });
        assert!(m.trees.is_empty());
        let prior = y.iter().filter(|v| **v).count() as f64 / y.len() as f64;
        assert!((m.score(&x[0]) - prior).abs() < 1e-12);
    }

    #[test]
    fn zero_shrinkage_equals_zero_rounds() {
        let (x, y) = data();
        let a = train_gbt(&x, &y, &GbtParams { shrinkage: 0.0, ..GbtParams::default() });
        let b = train_gbt(&x, &y, &GbtParams { rounds: 0, ..GbtParams::default() });
        assert_eq!(a, b);
    }

    #[test]
    fn loss_never_increases() {
        let (x, y) = data();
        let m = train_gbt(&x, &y, &GbtParams { rounds: 30, ..GbtParams::default() });
        let mut margins = vec![m.base; x.len()];
        let mut last = mean_logloss(&margins, &y);
        for t in &m.trees {
            for (mi, r) in margins.iter_mut().zip(&x) {
                *mi += t.weight * t.tree.eval(r);
            }
            let now = mean_logloss(&margins, &y);
            assert!(now <= last);
            last = now;
        }
        let acc = x.iter().zip(&y).filter(|(r, t)| (m.score(r) >= 0.5) == **t).count();
        assert!(acc >= 38);
    }
}
