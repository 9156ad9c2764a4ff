//! Quality metrics for entity types and whole graphs.
//!
//! Cue validity of a property for a type is `1/|K_v(p)|` when the type carries
//! it. Focus scores combine `ln(1 + cue)` and the per-property ratio, each
//! min-max normalized over the corpus being ranked (a constant column maps to
//! 0.5). The query-based rankers (CMM, DEM, TF-IDF, BM25) read entity type
//! labels through a [`Normalizer`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};
use crate::ingest::Normalizer;
use crate::model::KnowledgeGraph;

/// Normalized query terms; each term is a token list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Query {
    pub terms: Vec<Vec<String>>,
}

impl Query {
    /// Terms separated by commas or newlines; terms that normalize to nothing are dropped.
    pub fn parse(text: &str, norm: &Normalizer) -> Self {
        let terms = text
            .split([',', '\n'])
            .map(|t| norm.normalize(t.trim()))
            .filter(|t| !t.is_empty())
            .collect();
        Query { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn cue_p(g: &KnowledgeGraph, p: &str, e: &str) -> Result<f64> {
    g.etype(e)?;
    let dom = g.k_v(p)?;
    Ok(if dom.contains(e) { 1.0 / dom.len() as f64 } else { 0.0 })
}

pub fn cue_e(g: &KnowledgeGraph, e: &str) -> Result<f64> {
    let mut s = 0.0;
    for p in g.prop(e)? {
        s += 1.0 / g.k_v(p)?.len() as f64;
    }
    Ok(s)
}

pub fn cue_er(g: &KnowledgeGraph, e: &str) -> Result<f64> {
    let n = g.prop(e)?.len();
    if n == 0 {
        return Err(KgError::EmptyPropertySet(e.to_string()));
    }
    Ok(cue_e(g, e)? / n as f64)
}

/// `(v - min) / (max - min)`; every value maps to 0.5 when the column is constant.
pub fn minmax(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueRecord {
    pub graph: String,
    pub etype: String,
    pub cue_e: f64,
    /// 0 for a type without properties.
    pub cue_er: f64,
    pub focus_e: f64,
}

/// Focus of each (graph, type) in input order, with the cue values it was built from.
pub fn focus_scores(corpus: &[(&KnowledgeGraph, &str)], eta: f64) -> Result<Vec<CueRecord>> {
    let mut cues = Vec::with_capacity(corpus.len());
    let mut ratios = Vec::with_capacity(corpus.len());
    for (g, e) in corpus {
        let c = cue_e(g, e)?;
        let n = g.prop(e)?.len();
        cues.push(c);
        ratios.push(if n == 0 { 0.0 } else { c / n as f64 });
    }
    let logs: Vec<f64> = cues.iter().map(|c| c.ln_1p()).collect();
    let (nl, nr) = (minmax(&logs), minmax(&ratios));
    Ok(corpus
        .iter()
        .enumerate()
        .map(|(i, (g, e))| CueRecord {
            graph: g.name().to_string(),
            etype: e.to_string(),
            cue_e: cues[i],
            cue_er: ratios[i],
            focus_e: nl[i] + eta * nr[i],
        })
        .collect())
}

/// Focus of every (graph, type) in the corpus, best first; ties go to the
/// lexicographically smaller (graph, type).
pub fn focus_e(corpus: &[(&KnowledgeGraph, &str)], eta: f64) -> Result<Vec<CueRecord>> {
    let mut out = focus_scores(corpus, eta)?;
    sort_ranked(&mut out, |r| (r.focus_e, r.graph.clone(), r.etype.clone()));
    Ok(out)
}

fn sort_ranked<T>(rows: &mut [T], key: impl Fn(&T) -> (f64, String, String)) {
    rows.sort_by(|a, b| {
        let (fa, ga, ea) = key(a);
        let (fb, gb, eb) = key(b);
        fb.total_cmp(&fa).then(ga.cmp(&gb)).then(ea.cmp(&eb))
    });
}

fn require_props(g: &KnowledgeGraph) -> Result<()> {
    if g.etypes().values().all(|e| g.prop(&e.id).map_or(true, BTreeSet::is_empty)) {
        return Err(KgError::EmptyGraph(format!(
            "`{}` has no entity type with properties",
            g.name()
        )));
    }
    Ok(())
}

pub fn cue_k(g: &KnowledgeGraph) -> Result<f64> {
    require_props(g)?;
    let mut s = 0.0;
    for e in g.etypes().keys() {
        s += cue_e(g, e)?;
    }
    Ok(s)
}

pub fn cue_kr(g: &KnowledgeGraph) -> Result<f64> {
    let total: usize = g.etypes().keys().map(|e| g.prop(e).map_or(0, BTreeSet::len)).sum();
    Ok(cue_k(g)? / total as f64)
}

/// `|⋃ prop(e)| / (max |prop(e)| · |etypes|)`.
pub fn balance(g: &KnowledgeGraph) -> Result<f64> {
    require_props(g)?;
    let mut union = BTreeSet::new();
    let mut max = 0;
    for e in g.etypes().keys() {
        let p = g.prop(e)?;
        max = max.max(p.len());
        union.extend(p.iter());
    }
    Ok(union.len() as f64 / (max * g.etypes().len()) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphScore {
    pub graph: String,
    pub cue_k: f64,
    pub cue_kr: f64,
    pub focus_k: f64,
    pub balance: f64,
}

/// Graph-level scores, best focus first.
pub fn focus_k(corpus: &[&KnowledgeGraph], mu: f64) -> Result<Vec<GraphScore>> {
    let mut rows = Vec::with_capacity(corpus.len());
    for g in corpus {
        rows.push(GraphScore {
            graph: g.name().to_string(),
            cue_k: cue_k(g)?,
            cue_kr: cue_kr(g)?,
            focus_k: 0.0,
            balance: balance(g)?,
        });
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.cue_k.ln_1p()).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.cue_kr).collect();
    let (nl, nr) = (minmax(&logs), minmax(&ratios));
    for (i, r) in rows.iter_mut().enumerate() {
        r.focus_k = nl[i] + mu * nr[i];
    }
    sort_ranked(&mut rows, |r| (r.focus_k, r.graph.clone(), String::new()));
    Ok(rows)
}

/// Normalized label tokens of every entity type.
pub fn etype_tokens(g: &KnowledgeGraph, norm: &Normalizer) -> BTreeMap<String, Vec<String>> {
    g.etypes()
        .values()
        .map(|e| (e.id.clone(), norm.normalize(&e.label)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelMatch {
    Exact,
    Partial,
}

fn label_match(term: &[String], label: &[String]) -> Option<LabelMatch> {
    if term == label {
        Some(LabelMatch::Exact)
    } else if !term.is_empty() && term.iter().all(|t| label.contains(t)) {
        Some(LabelMatch::Partial)
    } else {
        None
    }
}

/// `(α·exact + β·partial) / |Q|` where each term counts once, as exact if any
/// label equals it and otherwise as partial if some label contains all its tokens.
pub fn cmm_tokens<'a>(labels: impl Iterator<Item = &'a Vec<String>> + Clone, q: &Query, alpha: f64, beta: f64) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let (mut exact, mut partial) = (0usize, 0usize);
    for term in &q.terms {
        let best = labels.clone().filter_map(|l| label_match(term, l)).min_by_key(|m| *m != LabelMatch::Exact);
        match best {
            Some(LabelMatch::Exact) => exact += 1,
            Some(LabelMatch::Partial) => partial += 1,
            None => {}
        }
    }
    (alpha * exact as f64 + beta * partial as f64) / q.terms.len() as f64
}

pub fn cmm(g: &KnowledgeGraph, q: &Query, norm: &Normalizer, alpha: f64, beta: f64) -> f64 {
    let labels = etype_tokens(g, norm);
    cmm_tokens(labels.values(), q, alpha, beta)
}

/// `w · (|prop| + |superclasses| + |subclasses| + |siblings|)`, direct links only.
pub fn density(g: &KnowledgeGraph, e: &str, w: f64) -> Result<f64> {
    let t = g.etype(e)?;
    let n = g.prop(e)?.len() + t.superclasses.len() + g.direct_subclasses(e)?.len() + g.siblings(e)?.len();
    Ok(w * n as f64)
}

/// Mean density over the types whose label matches some query term.
pub fn dem(g: &KnowledgeGraph, q: &Query, norm: &Normalizer, w: f64) -> f64 {
    let labels = etype_tokens(g, norm);
    let matched: Vec<&String> = labels
        .iter()
        .filter(|(_, l)| q.terms.iter().any(|t| label_match(t, l).is_some()))
        .map(|(id, _)| id)
        .collect();
    if matched.is_empty() {
        return 0.0;
    }
    let total: f64 = matched.iter().map(|e| density(g, e, w).expect("known etype")).sum();
    total / matched.len() as f64
}

/// A graph as a document: the token lists of its entity type and property labels.
pub fn document(g: &KnowledgeGraph, norm: &Normalizer) -> Vec<Vec<String>> {
    let mut doc: Vec<Vec<String>> = etype_tokens(g, norm).into_values().collect();
    doc.extend(g.properties().values().map(|p| p.normalized_label.clone()));
    doc
}

/// Occurrences of `term` as a contiguous token run.
pub fn term_frequency(doc: &[Vec<String>], term: &[String]) -> usize {
    if term.is_empty() {
        return 0;
    }
    doc.iter()
        .filter(|l| l.len() >= term.len())
        .map(|l| l.windows(term.len()).filter(|w| *w == term).count())
        .sum()
}

fn idfs(docs: &[Vec<Vec<String>>], q: &Query) -> Vec<f64> {
    let n = docs.len() as f64;
    q.terms
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| term_frequency(d, t) > 0).count();
            if df == 0 { 0.0 } else { (n / df as f64).ln() }
        })
        .collect()
}

/// `Σ_t tf(t, d) · ln(N / df(t))` for each document.
pub fn tfidf_docs(docs: &[Vec<Vec<String>>], q: &Query) -> Vec<f64> {
    let idf = idfs(docs, q);
    docs.iter()
        .map(|d| q.terms.iter().zip(&idf).map(|(t, i)| term_frequency(d, t) as f64 * i).sum())
        .collect()
}

/// `Σ_t idf(t) · tf·(m+1) / (tf + m·(1 − b + b·|d|/avg))` for each document,
/// with `|d|` the token count.
pub fn bm25_docs(docs: &[Vec<Vec<String>>], q: &Query, m: f64, b: f64) -> Vec<f64> {
    let idf = idfs(docs, q);
    let lens: Vec<f64> = docs.iter().map(|d| d.iter().map(Vec::len).sum::<usize>() as f64).collect();
    let avg = lens.iter().sum::<f64>() / lens.len().max(1) as f64;
    docs.iter()
        .zip(&lens)
        .map(|(d, len)| {
            let rel = if avg > 0.0 { len / avg } else { 1.0 };
            q.terms
                .iter()
                .zip(&idf)
                .map(|(t, i)| {
                    let tf = term_frequency(d, t) as f64;
                    if tf == 0.0 { 0.0 } else { i * tf * (m + 1.0) / (tf + m * (1.0 - b + b * rel)) }
                })
                .sum()
        })
        .collect()
}

pub fn tfidf(corpus: &[&KnowledgeGraph], q: &Query, norm: &Normalizer) -> Vec<f64> {
    let docs: Vec<_> = corpus.iter().map(|g| document(g, norm)).collect();
    tfidf_docs(&docs, q)
}

pub fn bm25(corpus: &[&KnowledgeGraph], q: &Query, norm: &Normalizer, m: f64, b: f64) -> Vec<f64> {
    let docs: Vec<_> = corpus.iter().map(|g| document(g, norm)).collect();
    bm25_docs(&docs, q, m, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LotusCell {
    /// Names of the sets sharing exactly these elements.
    pub members: Vec<String>,
    pub count: usize,
}

/// Venn cell counts: for every non-empty subset of the inputs, the number of
/// elements that belong to exactly that subset. Cells follow the bitmask order
/// of the input positions.
pub fn lotus_stats(sets: &[(String, BTreeSet<String>)]) -> Result<Vec<LotusCell>> {
    if sets.len() > 5 {
        return Err(KgError::TooManySets(sets.len()));
    }
    if sets.len() < 2 {
        return Err(KgError::InvalidInput(format!("lotus needs 2 to 5 sets, got {}", sets.len())));
    }
    let mut masks: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (_, s)) in sets.iter().enumerate() {
        for x in s {
            *masks.entry(x).or_default() |= 1 << i;
        }
    }
    let mut counts = vec![0usize; 1 << sets.len()];
    for m in masks.values() {
        counts[*m] += 1;
    }
    Ok((1..counts.len())
        .map(|mask| LotusCell {
            members: (0..sets.len()).filter(|i| mask & (1 << i) != 0).map(|i| sets[i].0.clone()).collect(),
            count: counts[mask],
        })
        .collect())
}

/// Property sets of the given entity types, by property id.
pub fn lotus_sets_by_etype(g: &KnowledgeGraph, etypes: &[&str]) -> Result<Vec<(String, BTreeSet<String>)>> {
    etypes.iter().map(|e| Ok((e.to_string(), g.prop(e)?.clone()))).collect()
}

/// Property sets of whole graphs, keyed by joined normalized label so that
/// graphs with different namespaces can be compared.
pub fn lotus_sets_by_graph(graphs: &[&KnowledgeGraph]) -> Vec<(String, BTreeSet<String>)> {
    graphs
        .iter()
        .map(|g| {
            let labels = g.properties().values().map(|p| p.normalized_label.join(" ")).collect();
            (g.name().to_string(), labels)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessParams {
    pub eta: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub w: f64,
    pub bm25_m: f64,
    pub bm25_b: f64,
}

impl Default for AssessParams {
    fn default() -> Self {
        AssessParams {
            eta: 1.0,
            mu: 1.0,
            alpha: 0.6,
            beta: 0.4,
            w: 1.0,
            bm25_m: 1.2,
            bm25_b: 0.75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRow {
    pub graph: String,
    pub cue_k: f64,
    pub cue_kr: f64,
    pub focus_k: f64,
    pub balance: f64,
    pub cmm: f64,
    pub dem: f64,
    pub tfidf: f64,
    pub bm25: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub notes: Vec<String>,
    pub query: Query,
    pub etypes: Vec<CueRecord>,
    pub graphs: Vec<GraphRow>,
}

pub const REPORT_NOTES: [&str; 2] = [
    "dem: matching state read as aspect cardinality (properties, superclasses, subclasses, siblings)",
    "cmm: exact and partial term counts divided by the number of query terms",
];

pub fn assess(corpus: &[&KnowledgeGraph], q: &Query, norm: &Normalizer, params: &AssessParams) -> Result<AssessmentReport> {
    if corpus.is_empty() {
        return Err(KgError::EmptyGraph("empty corpus".into()));
    }
    let pairs: Vec<(&KnowledgeGraph, &str)> = corpus
        .iter()
        .flat_map(|g| g.etypes().keys().map(move |e| (*g, e.as_str())))
        .collect();
    let etypes = focus_e(&pairs, params.eta)?;
    let scores = focus_k(corpus, params.mu)?;
    let tf = tfidf(corpus, q, norm);
    let bm = bm25(corpus, q, norm, params.bm25_m, params.bm25_b);
    let by_name: BTreeMap<&str, usize> = corpus.iter().enumerate().map(|(i, g)| (g.name(), i)).collect();
    let graphs = scores
        .into_iter()
        .map(|s| {
            let i = by_name[s.graph.as_str()];
            let g = corpus[i];
            GraphRow {
                cmm: cmm(g, q, norm, params.alpha, params.beta),
                dem: dem(g, q, norm, params.w),
                tfidf: tf[i],
                bm25: bm[i],
                graph: s.graph,
                cue_k: s.cue_k,
                cue_kr: s.cue_kr,
                focus_k: s.focus_k,
                balance: s.balance,
            }
        })
        .collect();
    Ok(AssessmentReport {
        notes: REPORT_NOTES.iter().map(|s| s.to_string()).collect(),
        query: q.clone(),
        etypes,
        graphs,
    })
}

impl AssessmentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    /// One table for both levels; cells that do not apply to a level are empty.
    /// Notes come first as `#` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([
            "level", "graph", "etype", "cue_e", "cue_er", "focus_e", "cue_k", "cue_kr", "focus_k", "balance", "cmm",
            "dem", "tfidf", "bm25",
        ])?;
        for r in &self.etypes {
            let mut rec = vec!["etype".into(), r.graph.clone(), r.etype.clone()];
            rec.extend([r.cue_e, r.cue_er, r.focus_e].iter().map(|v| v.to_string()));
            rec.extend(std::iter::repeat_n(String::new(), 8));
            w.write_record(&rec)?;
        }
        for r in &self.graphs {
            let mut rec = vec!["graph".into(), r.graph.clone(), String::new()];
            rec.extend(std::iter::repeat_n(String::new(), 3));
            rec.extend(
                [r.cue_k, r.cue_kr, r.focus_k, r.balance, r.cmm, r.dem, r.tfidf, r.bm25]
                    .iter()
                    .map(|v| v.to_string()),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }
}
