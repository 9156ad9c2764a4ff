//! Property alignment, candidate pair generation and pruning, and the
//! alignment TSV format.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use log::debug;
use rayon::prelude::*;

use crate::error::{KgError, Result};
use crate::fca::FormalContext;
use crate::ingest::normalize::Normalizer;
use crate::lexsim::{embedding_cos, levenshtein_sim, ngram_dice, EmbeddingStore};
use crate::model::{ConceptRef, KnowledgeGraph, Property, PropertyId};

/// One accepted property correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyPair {
    pub left: PropertyId,
    pub right: PropertyId,
    pub confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignedPropertyPairs {
    pub pairs: Vec<PropertyPair>,
}

impl AlignedPropertyPairs {
    pub fn new(pairs: Vec<PropertyPair>) -> Self {
        AlignedPropertyPairs { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Right-hand property aligned to `left`, if any (first match).
    pub fn right_of(&self, left: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.left == left).map(|p| p.right.as_str())
    }

    pub fn left_of(&self, right: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.right == right).map(|p| p.left.as_str())
    }

    /// The same pairs with sides exchanged.
    pub fn swapped(&self) -> Self {
        AlignedPropertyPairs {
            pairs: self
                .pairs
                .iter()
                .map(|p| PropertyPair {
                    left: p.right.clone(),
                    right: p.left.clone(),
                    confidence: p.confidence,
                })
                .collect(),
        }
    }

    pub fn to_alignments(&self) -> Vec<Alignment> {
        self.pairs
            .iter()
            .map(|p| Alignment {
                left: p.left.clone(),
                right: p.right.clone(),
                relation: Relation::Equivalent,
                confidence: p.confidence,
            })
            .collect()
    }

    pub fn from_alignments(a: &[Alignment]) -> Self {
        AlignedPropertyPairs {
            pairs: a
                .iter()
                .map(|x| PropertyPair {
                    left: x.left.clone(),
                    right: x.right.clone(),
                    confidence: x.confidence,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams {
    pub tau: f64,
    /// Accept every pair at or above `tau` instead of a greedy 1:1 selection.
    pub many_to_many: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            tau: 0.8,
            many_to_many: false,
        }
    }
}

/// 1 for equal normalized labels; otherwise the mean of bigram dice and
/// Levenshtein similarity on the joined labels, plus embedding cosine when
/// both labels have known tokens. Clamped to [0, 1].
pub fn property_score(a: &Property, b: &Property, emb: Option<&EmbeddingStore>) -> f64 {
    if a.normalized_label == b.normalized_label {
        return 1.0;
    }
    let (ja, jb) = (a.normalized_label.join(" "), b.normalized_label.join(" "));
    let mut parts = vec![ngram_dice(&ja, &jb, 2), levenshtein_sim(&ja, &jb)];
    if let Some(c) = emb.and_then(|e| embedding_cos(&a.normalized_label, &b.normalized_label, e)) {
        parts.push(c);
    }
    (parts.iter().sum::<f64>() / parts.len() as f64).clamp(0.0, 1.0)
}

pub fn match_properties(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    params: &MatchParams,
    emb: Option<&EmbeddingStore>,
) -> AlignedPropertyPairs {
    match_properties_with(a, b, params, |x, y| property_score(x, y, emb))
}

/// Match with a caller-supplied scorer, e.g. a trained classifier over
/// label features. Selection order: score descending, then left id, then
/// right id.
pub fn match_properties_with<F>(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    params: &MatchParams,
    scorer: F,
) -> AlignedPropertyPairs
where
    F: Fn(&Property, &Property) -> f64 + Sync,
{
    let left: Vec<&Property> = a.properties().values().collect();
    let right: Vec<&Property> = b.properties().values().collect();
    let mut scored: Vec<(f64, &str, &str)> = left
        .par_iter()
        .flat_map_iter(|pa| {
            right
                .iter()
                .map(|pb| (scorer(pa, pb), pa.id.as_str(), pb.id.as_str()))
                .filter(|(s, _, _)| *s >= params.tau)
                .collect::<Vec<_>>()
        })
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(y.1)).then_with(|| x.2.cmp(y.2)));
    let mut used_left = BTreeSet::new();
    let mut used_right = BTreeSet::new();
    let mut pairs = Vec::new();
    for (s, l, r) in scored {
        if !params.many_to_many && (used_left.contains(l) || used_right.contains(r)) {
            continue;
        }
        used_left.insert(l);
        used_right.insert(r);
        pairs.push(PropertyPair {
            left: l.to_string(),
            right: r.to_string(),
            confidence: s,
        });
    }
    AlignedPropertyPairs { pairs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    EtypeEtype,
    EtypeEntity,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::EtypeEtype => "etype-etype",
            PairKind::EtypeEntity => "etype-entity",
        }
    }

    /// Wraps a right-hand id as the concept this kind pairs with.
    pub fn right_concept(self, id: &str) -> ConceptRef {
        match self {
            PairKind::EtypeEtype => ConceptRef::EntityType(id.to_string()),
            PairKind::EtypeEntity => ConceptRef::Entity(id.to_string()),
        }
    }
}

impl std::str::FromStr for PairKind {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "etype-etype" | "schema" => Ok(PairKind::EtypeEtype),
            "etype-entity" | "instance" => Ok(PairKind::EtypeEntity),
            _ => Err(KgError::InvalidInput(format!("unknown pair kind `{s}`"))),
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidatePair {
    pub left: ConceptRef,
    pub right: ConceptRef,
}

impl CandidatePair {
    pub fn new(left: ConceptRef, right: ConceptRef) -> Self {
        CandidatePair { left, right }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePairList {
    pub kind: PairKind,
    pub pairs: Vec<CandidatePair>,
}

impl CandidatePairList {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `# kind=<kind>` then `left_id<TAB>right_id` per pair.
pub fn write_pairs<W: Write>(list: &CandidatePairList, mut out: W) -> Result<()> {
    writeln!(out, "# kind={}", list.kind)?;
    for p in &list.pairs {
        writeln!(out, "{}\t{}", p.left.id(), p.right.id())?;
    }
    Ok(())
}

pub fn pairs_to_string(list: &CandidatePairList) -> String {
    let mut buf = Vec::new();
    write_pairs(list, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 ids")
}

pub fn read_pairs<R: Read>(input: R) -> Result<CandidatePairList> {
    let mut kind = None;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if let Some(k) = line.strip_prefix("# kind=") {
            kind = Some(k.trim().parse::<PairKind>()?);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(k) = kind else {
            return Err(KgError::parse(n + 1, 1, "pair list has no `# kind=` header"));
        };
        let Some((l, r)) = line.split_once('\t') else {
            return Err(KgError::parse(n + 1, 1, "expected `left<TAB>right`"));
        };
        if l.is_empty() || r.is_empty() || r.contains('\t') {
            return Err(KgError::parse(n + 1, 1, "expected two non-empty fields"));
        }
        pairs.push(CandidatePair::new(ConceptRef::EntityType(l.to_string()), k.right_concept(r)));
    }
    let kind = kind.ok_or_else(|| KgError::parse(1, 1, "pair list has no `# kind=` header"))?;
    Ok(CandidatePairList { kind, pairs })
}

/// Cross product of `a`'s entity types with `b`'s entity types or entities.
pub fn gen_pairs(a: &KnowledgeGraph, b: &KnowledgeGraph, kind: PairKind) -> CandidatePairList {
    let rights: Vec<ConceptRef> = match kind {
        PairKind::EtypeEtype => b.etypes().keys().map(|k| ConceptRef::EntityType(k.clone())).collect(),
        PairKind::EtypeEntity => b.entities().keys().map(|k| ConceptRef::Entity(k.clone())).collect(),
    };
    let pairs = a
        .etypes()
        .keys()
        .flat_map(|l| {
            rights
                .iter()
                .map(move |r| CandidatePair::new(ConceptRef::EntityType(l.clone()), r.clone()))
        })
        .collect();
    CandidatePairList { kind, pairs }
}

/// Pre-selection factor: bigram dice of the normalized labels plus their
/// embedding cosine (0 when absent).
pub fn pre_selection(a_label: &[String], b_label: &[String], emb: Option<&EmbeddingStore>) -> f64 {
    let dice = ngram_dice(&a_label.join(" "), &b_label.join(" "), 2);
    let cos = emb.and_then(|e| embedding_cos(a_label, b_label, e)).unwrap_or(0.0);
    dice + cos
}

/// Drop entity-type pairs whose pre-selection factor is below the threshold.
/// Returns (kept, pruned).
pub fn prune_schema(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    pairs: &CandidatePairList,
    ps_threshold: f64,
    normalizer: &Normalizer,
    emb: Option<&EmbeddingStore>,
) -> Result<(CandidatePairList, CandidatePairList)> {
    if pairs.kind != PairKind::EtypeEtype {
        return Err(KgError::InvalidInput("schema pruning needs etype-etype pairs".into()));
    }
    let mut kept = Vec::new();
    let mut pruned = Vec::new();
    for p in &pairs.pairs {
        let la = normalizer.normalize(&a.etype(p.left.id())?.label);
        let lb = normalizer.normalize(&b.etype(p.right.id())?.label);
        let ps = pre_selection(&la, &lb, emb);
        if ps >= ps_threshold {
            kept.push(p.clone());
        } else {
            debug!("pruned {} / {}: PS_s = {ps:.4}", p.left.id(), p.right.id());
            pruned.push(p.clone());
        }
    }
    Ok((
        CandidatePairList {
            kind: pairs.kind,
            pairs: kept,
        },
        CandidatePairList {
            kind: pairs.kind,
            pairs: pruned,
        },
    ))
}

/// Drop entity-type/entity pairs with no aligned property associated (+1)
/// on both sides. Returns (kept, pruned).
pub fn prune_instance(
    pairs: &CandidatePairList,
    pm: &AlignedPropertyPairs,
    ctx_a: &FormalContext,
    ctx_b: &FormalContext,
) -> Result<(CandidatePairList, CandidatePairList)> {
    let mut kept = Vec::new();
    let mut pruned = Vec::new();
    for p in &pairs.pairs {
        let la = ctx_a.associated(&p.left)?;
        let lb = ctx_b.associated(&p.right)?;
        let shared = pm
            .pairs
            .iter()
            .any(|x| la.contains(x.left.as_str()) && lb.contains(x.right.as_str()));
        if shared {
            kept.push(p.clone());
        } else {
            debug!("pruned {} / {}: no shared aligned property", p.left.id(), p.right.id());
            pruned.push(p.clone());
        }
    }
    Ok((
        CandidatePairList {
            kind: pairs.kind,
            pairs: kept,
        },
        CandidatePairList {
            kind: pairs.kind,
            pairs: pruned,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `=`: equivalent entity types or properties.
    Equivalent,
    /// `∈`: the right entity belongs to the left entity type.
    MemberOf,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equivalent => "=",
            Relation::MemberOf => "∈",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub left: String,
    pub right: String,
    pub relation: Relation,
    pub confidence: f64,
}

/// `left<TAB>right<TAB>relation<TAB>confidence`, one per line.
pub fn write_alignments<W: Write>(alignments: &[Alignment], mut out: W) -> Result<()> {
    for a in alignments {
        writeln!(out, "{}\t{}\t{}\t{}", a.left, a.right, a.relation.symbol(), a.confidence)?;
    }
    Ok(())
}

pub fn alignments_to_string(alignments: &[Alignment]) -> String {
    let mut buf = Vec::new();
    write_alignments(alignments, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 ids")
}

/// Blank lines and `#` comments are skipped.
pub fn read_alignments<R: Read>(input: R) -> Result<Vec<Alignment>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [left, right, rel, conf] = fields.as_slice() else {
            return Err(KgError::parse(n + 1, 1, format!("expected 4 tab-separated fields, got {}", fields.len())));
        };
        let relation = match *rel {
            "=" => Relation::Equivalent,
            "∈" => Relation::MemberOf,
            other => return Err(KgError::parse(n + 1, 3, format!("unknown relation `{other}`"))),
        };
        let confidence: f64 = conf
            .parse()
            .ok()
            .filter(|c: &f64| (0.0..=1.0).contains(c))
            .ok_or_else(|| KgError::parse(n + 1, 4, format!("confidence `{conf}` is not in [0,1]")))?;
        if left.is_empty() || right.is_empty() {
            return Err(KgError::parse(n + 1, 1, "empty id"));
        }
        out.push(Alignment {
            left: left.to_string(),
            right: right.to_string(),
            relation,
            confidence,
        });
    }
    Ok(out)
}
