//! Trained models, their JSON file format, and prediction.
//!
//! ```json
//! {"format": "kgext-model", "version": 1, "layout": "schema", "seed": 42,
//!  "params": {"kind": "logreg", ...}, "body": {"kind": "logreg", ...}}
//! ```
//!
//! Floats are written with round-trip precision, so a reloaded model scores
//! bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};
use crate::recognizer::features::{Dataset, FeatureVector, Layout};
use crate::recognizer::gbt::{train_gbt, GbtModel, GbtParams};
use crate::recognizer::logreg::{train_logreg, LogregModel, LogregParams};
use crate::recognizer::tree::{train_tree, Tree, TreeParams};

pub const MODEL_FORMAT: &str = "kgext-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Logreg(LogregParams),
    Tree(TreeParams),
    Gbt(GbtParams),
}

impl ModelParams {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelParams::Logreg(_) => "logreg",
            ModelParams::Tree(_) => "tree",
            ModelParams::Gbt(_) => "gbt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelBody {
    Logreg(LogregModel),
    Tree(Tree),
    Gbt(GbtModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub layout: Layout,
    pub seed: u64,
    pub params: ModelParams,
    pub body: ModelBody,
}

impl TrainedModel {
    /// A tree with one leaf of 1.0: accepts every pair.
    pub fn always_accept(layout: Layout) -> Self {
        TrainedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            layout,
            seed: 0,
            params: ModelParams::Tree(TreeParams::default()),
            body: ModelBody::Tree(Tree::leaf(1.0)),
        }
    }

    /// Probability of the positive class; the row must match the layout width.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        match &self.body {
            ModelBody::Logreg(m) => m.score(row),
            ModelBody::Tree(t) => t.eval(row),
            ModelBody::Gbt(m) => m.score(row),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT {
            return Err(KgError::InvalidInput(format!("not a model file (format `{}`)", m.format)));
        }
        if m.version != MODEL_VERSION {
            return Err(KgError::InvalidInput(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Train on a labelled dataset. Training is single-threaded and, for equal
/// data order and parameters, deterministic; `seed` is recorded in the model.
pub fn train(data: &Dataset, params: &ModelParams, seed: u64) -> Result<TrainedModel> {
    let y = data.labels()?;
    let pos = y.iter().filter(|v| **v).count();
    if pos == 0 || pos == y.len() {
        return Err(KgError::DegenerateData(format!(
            "training needs both classes, got {pos} positive of {}",
            y.len()
        )));
    }
    if let Some(bad) = data.x.iter().find(|r| r.len() != data.layout.width()) {
        return Err(KgError::LayoutMismatch {
            expected: format!("{} values", data.layout.width()),
            found: format!("{} values", bad.len()),
        });
    }
    if data.x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(KgError::NonFinite("training features".into()));
    }
    let body = match params {
        ModelParams::Logreg(p) => ModelBody::Logreg(train_logreg(&data.x, y, p)?),
        ModelParams::Tree(p) => ModelBody::Tree(train_tree(&data.x, y, p)),
        ModelParams::Gbt(p) => ModelBody::Gbt(train_gbt(&data.x, y, p)),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        layout: data.layout,
        seed,
        params: *params,
        body,
    })
}

/// (label, score) with label = score >= cutoff.
pub fn predict(m: &TrainedModel, fv: &FeatureVector, cutoff: f64) -> Result<(bool, f64)> {
    if fv.layout != m.layout || fv.values.len() != m.layout.width() {
        return Err(KgError::LayoutMismatch {
            expected: m.layout.to_string(),
            found: format!("{} ({} values)", fv.layout, fv.values.len()),
        });
    }
    let score = m.score_row(&fv.values);
    if !score.is_finite() {
        return Err(KgError::NonFinite(format!("{} model score", m.params.kind())));
    }
    Ok((score >= cutoff, score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{CandidatePair, PairKind};
    use crate::model::ConceptRef;
    use crate::recognizer::logreg::sigmoid;

    fn toy() -> Dataset {
        let n = 30;
        Dataset {
            layout: Layout::Instance,
            kind: PairKind::EtypeEntity,
            pairs: (0..n)
                .map(|i| CandidatePair::new(ConceptRef::EntityType("T".into()), ConceptRef::Entity(format!("e{i}"))))
                .collect(),
            x: (0..n).map(|i| vec![i as f64 / 7.0, (i % 3) as f64, 0.1 * i as f64]).collect(),
            y: Some((0..n).map(|i| i > 12).collect()),
        }
    }

    fn all_params() -> [ModelParams; 3] {
        [
            ModelParams::Logreg(LogregParams::default()),
            ModelParams::Tree(TreeParams::default()),
            ModelParams::Gbt(GbtParams::default()),
        ]
    }

    #[test]
    fn reload_scores_bit_exactly() {
        let d = toy();
        for p in all_params() {
            let m = train(&d, &p, 9).unwrap();
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
            for r in &d.x {
                assert_eq!(back.score_row(r).to_bits(), m.score_row(r).to_bits());
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let d = toy();
        for p in all_params() {
            assert_eq!(train(&d, &p, 1).unwrap().to_json(), train(&d, &p, 1).unwrap().to_json());
        }
    }

    #[test]
    fn cutoff_boundary_and_layout_check() {
        let m = TrainedModel {
            body: ModelBody::Tree(Tree::leaf(0.5)),
            ..TrainedModel::always_accept(Layout::Instance)
        };
        let fv = FeatureVector { layout: Layout::Instance, values: vec![0.0; 3] };
        assert_eq!(predict(&m, &fv, 0.5).unwrap(), (true, 0.5));
        let bad = FeatureVector { layout: Layout::Schema, values: vec![0.0; 12] };
        assert!(matches!(predict(&m, &bad, 0.5), Err(KgError::LayoutMismatch { .. })));
    }

    #[test]
    fn non_finite_score_is_an_error() {
        let mut m = train(&toy(), &ModelParams::Logreg(LogregParams::default()), 0).unwrap();
        let ModelBody::Logreg(lr) = &mut m.body else { unreachable!() };
        lr.standardizer.scale[0] = 0.0;
        let values = lr.standardizer.mean.clone();
        let fv = FeatureVector { layout: Layout::Instance, values };
        assert!(matches!(predict(&m, &fv, 0.5), Err(KgError::NonFinite(_))));
    }

    #[test]
    fn logreg_zero_features_score_sigmoid_bias() {
        let m = train(&toy(), &ModelParams::Logreg(LogregParams::default()), 0).unwrap();
        let ModelBody::Logreg(lr) = &m.body else { unreachable!() };
        let at_mean = lr.standardizer.mean.clone();
        assert_eq!(m.score_row(&at_mean), sigmoid(lr.bias));
    }

    #[test]
    fn degenerate_labels_rejected() {
        let mut d = toy();
        d.y = Some(vec![true; d.len()]);
        for p in all_params() {
            assert!(matches!(train(&d, &p, 0), Err(KgError::DegenerateData(_))));
        }
    }

    #[test]
    fn wrong_format_rejected() {
        let text = TrainedModel::always_accept(Layout::Instance).to_json().replace("kgext-model", "other");
        assert!(TrainedModel::from_json(&text).is_err());
    }
}
