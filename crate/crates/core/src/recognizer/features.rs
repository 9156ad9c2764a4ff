//! Feature layouts, pair featurization and the feature CSV.

use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};
use crate::ingest::normalize::Normalizer;
use crate::lexsim::{
    embedding_cos, lcs_sim, levenshtein_sim, needleman_wunsch_sim, ngram_dice, substring_sim, wu_palmer_sim,
    EmbeddingStore, TaxonomyStore,
};
use crate::matcher::{CandidatePair, PairKind};
use crate::model::{ConceptRef, KnowledgeGraph};
use crate::propsim::SimTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Schema,
    Instance,
}

pub const SCHEMA_FEATURES: [&str; 12] = [
    "ngram",
    "lcs",
    "levenshtein",
    "substring",
    "needleman_wunsch",
    "wu_palmer",
    "embedding_cos",
    "sim_h",
    "sim_v",
    "sim_i",
    "wu_palmer_missing",
    "embedding_missing",
];

pub const INSTANCE_FEATURES: [&str; 3] = ["sim_h", "sim_v", "sim_i"];

impl Layout {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Layout::Schema => &SCHEMA_FEATURES,
            Layout::Instance => &INSTANCE_FEATURES,
        }
    }

    pub fn width(self) -> usize {
        self.names().len()
    }

    pub fn for_kind(kind: PairKind) -> Self {
        match kind {
            PairKind::EtypeEtype => Layout::Schema,
            PairKind::EtypeEntity => Layout::Instance,
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Schema => "schema",
            Layout::Instance => "instance",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub layout: Layout,
    pub values: Vec<f64>,
}

/// Featurizes pairs between graph `a` (left, entity types) and `b`.
pub struct Featurizer<'a> {
    pub a: &'a KnowledgeGraph,
    pub b: &'a KnowledgeGraph,
    pub normalizer: &'a Normalizer,
    pub embeddings: Option<&'a EmbeddingStore>,
    pub taxonomy: Option<&'a TaxonomyStore>,
    /// Normalized similarities of the pair batch.
    pub sims: &'a SimTable,
}

fn label_of(g: &KnowledgeGraph, c: &ConceptRef) -> Result<String> {
    Ok(match c {
        ConceptRef::EntityType(id) => g.etype(id)?.label.clone(),
        ConceptRef::Entity(id) => g.entity(id)?.label.clone(),
    })
}

impl Featurizer<'_> {
    pub fn featurize(&self, pair: &CandidatePair, layout: Layout) -> Result<FeatureVector> {
        let s = self.sims.get(pair.left.id(), pair.right.id())?;
        let values = match layout {
            Layout::Instance => vec![s.sim_h, s.sim_v, s.sim_i],
            Layout::Schema => {
                let ta = self.normalizer.normalize(&label_of(self.a, &pair.left)?);
                let tb = self.normalizer.normalize(&label_of(self.b, &pair.right)?);
                let (ja, jb) = (ta.join(" "), tb.join(" "));
                let wp = self.taxonomy.and_then(|t| wu_palmer_sim(&ta, &tb, t));
                let emb = self.embeddings.and_then(|e| embedding_cos(&ta, &tb, e));
                vec![
                    ngram_dice(&ja, &jb, 2),
                    lcs_sim(&ja, &jb),
                    levenshtein_sim(&ja, &jb),
                    substring_sim(&ja, &jb),
                    needleman_wunsch_sim(&ja, &jb),
                    wp.unwrap_or(0.0),
                    emb.unwrap_or(0.0),
                    s.sim_h,
                    s.sim_v,
                    s.sim_i,
                    if wp.is_none() { 1.0 } else { 0.0 },
                    if emb.is_none() { 1.0 } else { 0.0 },
                ]
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KgError::NonFinite(format!("features of ({}, {})", pair.left.id(), pair.right.id())));
        }
        Ok(FeatureVector { layout, values })
    }

    pub fn featurize_all(&self, pairs: &[CandidatePair], layout: Layout) -> Result<Vec<FeatureVector>> {
        pairs.par_iter().map(|p| self.featurize(p, layout)).collect()
    }
}

/// Feature rows with optional labels, as used for training and prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub layout: Layout,
    pub kind: PairKind,
    pub pairs: Vec<CandidatePair>,
    pub x: Vec<Vec<f64>>,
    pub y: Option<Vec<bool>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn labels(&self) -> Result<&[bool]> {
        self.y
            .as_deref()
            .ok_or_else(|| KgError::InvalidInput("dataset has no label column".into()))
    }

    /// CSV: `left_id,right_id,<layout names>[,label]`.
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["left_id", "right_id"];
        header.extend(self.layout.names());
        if self.y.is_some() {
            header.push("label");
        }
        w.write_record(&header)?;
        for (i, row) in self.x.iter().enumerate() {
            let mut rec = vec![self.pairs[i].left.id().to_string(), self.pairs[i].right.id().to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            if let Some(y) = &self.y {
                rec.push(if y[i] { "1" } else { "0" }.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 ids")
    }

    /// The layout is recognized from the header.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "left_id" || header[1] != "right_id" {
            return Err(KgError::parse(1, 1, "header must start with left_id,right_id"));
        }
        let labelled = header.last().map(String::as_str) == Some("label");
        let names = &header[2..header.len() - usize::from(labelled)];
        let layout = [Layout::Schema, Layout::Instance]
            .into_iter()
            .find(|l| l.names() == names)
            .ok_or_else(|| KgError::parse(1, 3, format!("unknown feature layout {names:?}")))?;
        let kind = match layout {
            Layout::Schema => PairKind::EtypeEtype,
            Layout::Instance => PairKind::EtypeEntity,
        };
        let mut ds = Dataset {
            layout,
            kind,
            pairs: Vec::new(),
            x: Vec::new(),
            y: labelled.then(Vec::new),
        };
        for (n, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = n + 2;
            if rec.len() != header.len() {
                return Err(KgError::parse(line, 1, "wrong field count"));
            }
            ds.pairs.push(CandidatePair::new(
                ConceptRef::EntityType(rec[0].to_string()),
                kind.right_concept(&rec[1]),
            ));
            let row = (2..2 + layout.width())
                .map(|k| {
                    rec[k]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| KgError::parse(line, k + 1, format!("bad value `{}`", &rec[k])))
                })
                .collect::<Result<Vec<_>>>()?;
            ds.x.push(row);
            if let Some(y) = &mut ds.y {
                y.push(match &rec[header.len() - 1] {
                    "1" => true,
                    "0" => false,
                    other => return Err(KgError::parse(line, header.len(), format!("label `{other}` is not 0/1"))),
                });
            }
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fca::{formalize, Scope};
    use crate::matcher::{gen_pairs, match_properties, MatchParams};
    use crate::model::fixtures::*;
    use crate::propsim::{normalize_batch, sim_raw, PropsimParams, SimInputs, SpecificityTable};

    fn table(a: &KnowledgeGraph, b: &KnowledgeGraph, kind: PairKind) -> (Vec<CandidatePair>, SimTable) {
        let pm = match_properties(a, b, &MatchParams::default(), None);
        let scope_b = if kind == PairKind::EtypeEtype { Scope::Schema } else { Scope::Instance };
        let (ca, cb) = (formalize(a, Scope::Schema), formalize(b, scope_b));
        let p = PropsimParams::default();
        let (sa, sb) = (SpecificityTable::compute(a, &p), SpecificityTable::compute(b, &p));
        let inp = SimInputs { ctx_a: &ca, ctx_b: &cb, spec_a: &sa, spec_b: &sb, pm: &pm };
        let pairs = gen_pairs(a, b, kind).pairs;
        let norm = normalize_batch(&sim_raw(&inp, &pairs).unwrap()).unwrap();
        (pairs, SimTable::new(kind, true, norm.triples).unwrap())
    }

    #[test]
    fn identical_types_in_cloned_graphs() {
        let (a, b) = (toy_a(), toy_a());
        let (pairs, sims) = table(&a, &b, PairKind::EtypeEtype);
        let n = Normalizer::default();
        let f = Featurizer { a: &a, b: &b, normalizer: &n, embeddings: None, taxonomy: None, sims: &sims };
        let same = pairs.iter().find(|p| p.left.id() == "Athlete" && p.right.id() == "Athlete").unwrap();
        let v = f.featurize(same, Layout::Schema).unwrap().values;
        assert_eq!(&v[..5], &[1.0; 5]);
        assert_eq!(&v[10..], &[1.0, 1.0]);
        let max_h = sims.rows().iter().map(|t| t.sim_h).fold(0.0, f64::max);
        assert_eq!(v[7], max_h);
    }

    #[test]
    fn instance_layout_and_missing_pair() {
        let (a, b) = (toy_a(), toy_b());
        let (pairs, sims) = table(&a, &b, PairKind::EtypeEntity);
        let n = Normalizer::default();
        let emb = EmbeddingStore::from_vectors(1, [("person".to_string(), vec![1.0])]).unwrap();
        let f = Featurizer { a: &a, b: &b, normalizer: &n, embeddings: Some(&emb), taxonomy: None, sims: &sims };
        assert_eq!(f.featurize(&pairs[0], Layout::Instance).unwrap().values.len(), 3);
        let stray = CandidatePair::new(ConceptRef::EntityType("Nope".into()), ConceptRef::Entity("Picasso".into()));
        assert!(matches!(f.featurize(&stray, Layout::Instance), Err(KgError::MissingSim(..))));
    }

    #[test]
    fn unknown_embedding_tokens_impute_zero_with_flag() {
        let (a, b) = (toy_a(), toy_b());
        let (pairs, sims) = table(&a, &b, PairKind::EtypeEtype);
        let n = Normalizer::default();
        let emb = EmbeddingStore::from_vectors(1, [("person".to_string(), vec![1.0])]).unwrap();
        let f = Featurizer { a: &a, b: &b, normalizer: &n, embeddings: Some(&emb), taxonomy: None, sims: &sims };
        let v = f.featurize(&pairs[0], Layout::Schema).unwrap().values;
        assert_eq!((v[6], v[11]), (0.0, 1.0));
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset {
            layout: Layout::Instance,
            kind: PairKind::EtypeEntity,
            pairs: vec![CandidatePair::new(ConceptRef::EntityType("A".into()), ConceptRef::Entity("e".into()))],
            x: vec![vec![0.1, 0.2, 1.0 / 3.0]],
            y: Some(vec![true]),
        };
        let text = ds.to_csv_string();
        assert_eq!(text.lines().next().unwrap(), "left_id,right_id,sim_h,sim_v,sim_i,label");
        assert_eq!(Dataset::read(text.as_bytes()).unwrap(), ds);
        let unlabelled = Dataset { y: None, ..ds };
        assert_eq!(Dataset::read(unlabelled.to_csv_string().as_bytes()).unwrap(), unlabelled);
    }
}
