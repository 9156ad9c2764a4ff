//! CART trees: Gini classification trees and the Newton-step regression
//! trees used by boosting.
//!
//! Thresholds are midpoints between consecutive distinct values; rows with
//! `x <= threshold` go left. Among equally good splits the lowest feature
//! index wins, then the lowest threshold.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes in build order; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

pub(crate) enum Criterion<'a> {
    /// Leaf value is the positive fraction; splits may have zero gain.
    Gini(&'a [bool]),
    /// Leaf value is `-G / (H + λ)`; splits need positive gain.
    Newton { g: &'a [f64], h: &'a [f64], lambda: f64 },
}

const TIE: f64 = 1e-12;

struct Stats {
    a: f64,
    b: f64,
    n: usize,
}

impl Criterion<'_> {
    /// Per-row sufficient statistics: (positives, 1) for Gini, (g, h) for Newton.
    fn stat(&self, i: usize) -> (f64, f64) {
        match self {
            Criterion::Gini(y) => (if y[i] { 1.0 } else { 0.0 }, 1.0),
            Criterion::Newton { g, h, .. } => (g[i], h[i]),
        }
    }

    fn leaf_value(&self, s: &Stats) -> f64 {
        match self {
            Criterion::Gini(_) => s.a / s.n as f64,
            Criterion::Newton { lambda, .. } => -s.a / (s.b + lambda),
        }
    }

    /// Impurity-like score to minimize (Gini) or structure score to maximize (Newton),
    /// expressed so that larger is better.
    fn score(&self, s: &Stats) -> f64 {
        match self {
            Criterion::Gini(_) => {
                let n = s.n as f64;
                let p = s.a / n;
                -(n * 2.0 * p * (1.0 - p))
            }
            Criterion::Newton { lambda, .. } => s.a * s.a / (s.b + lambda),
        }
    }

    fn is_pure(&self, s: &Stats) -> bool {
        match self {
            Criterion::Gini(_) => s.a == 0.0 || s.a == s.n as f64,
            Criterion::Newton { .. } => false,
        }
    }

    fn accepts(&self, gain: f64) -> bool {
        match self {
            Criterion::Gini(_) => gain >= -TIE,
            Criterion::Newton { .. } => gain > TIE,
        }
    }
}

pub(crate) fn build_tree(x: &[Vec<f64>], rows: Vec<usize>, crit: &Criterion<'_>, params: &TreeParams) -> Tree {
    let mut nodes = Vec::new();
    grow(x, rows, crit, params, 0, &mut nodes);
    Tree { nodes }
}

fn totals(rows: &[usize], crit: &Criterion<'_>) -> Stats {
    let mut s = Stats { a: 0.0, b: 0.0, n: rows.len() };
    for &i in rows {
        let (a, b) = crit.stat(i);
        s.a += a;
        s.b += b;
    }
    s
}

fn grow(
    x: &[Vec<f64>],
    rows: Vec<usize>,
    crit: &Criterion<'_>,
    params: &TreeParams,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let me = nodes.len();
    let all = totals(&rows, crit);
    nodes.push(Node::Leaf {
        value: crit.leaf_value(&all),
    });
    let min_leaf = params.min_leaf.max(1);
    if depth >= params.max_depth || crit.is_pure(&all) || rows.len() < 2 * min_leaf {
        return me;
    }
    let parent_score = crit.score(&all);
    let d = x.first().map_or(0, Vec::len);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..d {
        let mut sorted = rows.clone();
        sorted.sort_by(|i, j| x[*i][f].total_cmp(&x[*j][f]).then(i.cmp(j)));
        let mut left = Stats { a: 0.0, b: 0.0, n: 0 };
        for k in 0..sorted.len() - 1 {
            let (a, b) = crit.stat(sorted[k]);
            left.a += a;
            left.b += b;
            left.n += 1;
            let (lo, hi) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            if lo == hi || left.n < min_leaf || sorted.len() - left.n < min_leaf {
                continue;
            }
            let right = Stats {
                a: all.a - left.a,
                b: all.b - left.b,
                n: all.n - left.n,
            };
            let gain = crit.score(&left) + crit.score(&right) - parent_score;
            if !crit.accepts(gain) {
                continue;
            }
            if best.is_none_or(|(g, _, _)| gain > g + TIE) {
                best = Some((gain, f, lo + (hi - lo) / 2.0));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return me;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|i| x[*i][feature] <= threshold);
    let left = grow(x, l, crit, params, depth + 1, nodes);
    let right = grow(x, r, crit, params, depth + 1, nodes);
    nodes[me] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    me
}

/// Gini classification tree; leaves hold the positive fraction.
pub fn train_tree(x: &[Vec<f64>], y: &[bool], params: &TreeParams) -> Tree {
    build_tree(x, (0..x.len()).collect(), &Criterion::Gini(y), params)
}
