//! Property specificities and the property-based similarities built on them.
//!
//! * horizontal specificity `HS(p) = exp(λ(1 − |K_v(p)|))`
//! * vertical specificity `VS(p) = θ · min layer over K_v(p)`
//! * information specificity `IS(p)`: entropy gain of splitting the entity
//!   types into those with and without `p`
//!
//! A pair similarity sums, over aligned property pairs associated with both
//! concepts, each side's specificity divided by that concept's property
//! count, and halves the total.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;

use crate::error::{KgError, Result};
use crate::fca::FormalContext;
use crate::matcher::{AlignedPropertyPairs, CandidatePair, PairKind};
use crate::model::{ConceptRef, KnowledgeGraph, PropertyId};

/// How entity types are weighted in the entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyMode {
    /// Every entity type counts once.
    #[default]
    Schema,
    /// Entity types weigh by their number of directly typed entities.
    Instance,
}

impl std::str::FromStr for EntropyMode {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schema" => Ok(EntropyMode::Schema),
            "instance" => Ok(EntropyMode::Instance),
            _ => Err(KgError::InvalidInput(format!("unknown entropy mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    /// 1 / max_depth of the graph.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropsimParams {
    pub lambda: f64,
    pub theta: Theta,
    pub entropy_mode: EntropyMode,
}

impl Default for PropsimParams {
    fn default() -> Self {
        PropsimParams {
            lambda: 0.5,
            theta: Theta::Auto,
            entropy_mode: EntropyMode::Schema,
        }
    }
}

/// `exp(λ(1 − n))`; a property on no entity type is treated as unique.
pub fn hs_from_count(k_v: usize, lambda: f64) -> f64 {
    (lambda * (1.0 - k_v.max(1) as f64)).exp()
}

pub fn hs(g: &KnowledgeGraph, p: &str, lambda: f64) -> Result<f64> {
    Ok(hs_from_count(g.k_v(p)?.len(), lambda))
}

pub fn theta_for(g: &KnowledgeGraph, theta: Theta) -> f64 {
    match theta {
        Theta::Auto => 1.0 / g.max_depth() as f64,
        Theta::Fixed(t) => t,
    }
}

/// θ times the smallest layer among the types using `p` (layer 1 when none).
pub fn vs(g: &KnowledgeGraph, p: &str, theta: f64) -> Result<f64> {
    let min_layer = g
        .k_v(p)?
        .iter()
        .map(|t| g.etype(t).map(|e| e.layer))
        .collect::<Result<Vec<u32>>>()?
        .into_iter()
        .min()
        .unwrap_or(1);
    Ok(theta * min_layer as f64)
}

/// `−Σ (F/N) ln(F/N)` over positive weights, N = ΣF; 0 for an empty or
/// zero-mass set. With unit weights this is `ln n`.
pub fn entropy_of(weights: &[f64]) -> f64 {
    let n: f64 = weights.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    -weights
        .iter()
        .filter(|f| **f > 0.0)
        .map(|f| {
            let q = f / n;
            q * q.ln()
        })
        .sum::<f64>()
}

fn type_weights(g: &KnowledgeGraph, mode: EntropyMode) -> BTreeMap<&str, f64> {
    g.etypes()
        .keys()
        .map(|t| {
            let w = match mode {
                EntropyMode::Schema => 1.0,
                EntropyMode::Instance => g.entity_count(t) as f64,
            };
            (t.as_str(), w)
        })
        .collect()
}

pub fn entropy(g: &KnowledgeGraph, mode: EntropyMode) -> f64 {
    entropy_of(&type_weights(g, mode).into_values().collect::<Vec<_>>())
}

fn information_gain(weights: &BTreeMap<&str, f64>, inside: &std::collections::BTreeSet<String>) -> f64 {
    let (mut w_in, mut w_out) = (Vec::new(), Vec::new());
    for (t, w) in weights {
        if inside.contains(*t) {
            w_in.push(*w);
        } else {
            w_out.push(*w);
        }
    }
    let total: f64 = weights.values().sum();
    if total <= 0.0 || w_in.is_empty() || w_out.is_empty() {
        return 0.0;
    }
    let all: Vec<f64> = weights.values().copied().collect();
    let (m_in, m_out) = (w_in.iter().sum::<f64>(), w_out.iter().sum::<f64>());
    let gain = entropy_of(&all) - (m_in / total * entropy_of(&w_in) + m_out / total * entropy_of(&w_out));
    gain.max(0.0)
}

/// Entropy gain of partitioning the entity types by whether they use `p`.
pub fn is_(g: &KnowledgeGraph, p: &str, mode: EntropyMode) -> Result<f64> {
    Ok(information_gain(&type_weights(g, mode), g.k_v(p)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Specificity {
    pub hs: f64,
    pub vs: f64,
    pub is_: f64,
}

/// Per-property specificities of one graph. Values are the magnitudes for an
/// associated property; callers only use them where the context cell is +1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecificityTable {
    pub graph: String,
    pub lambda: f64,
    pub theta: f64,
    pub max_depth: u32,
    pub entropy: f64,
    pub mode: EntropyMode,
    entries: BTreeMap<PropertyId, Specificity>,
}

impl SpecificityTable {
    pub fn compute(g: &KnowledgeGraph, params: &PropsimParams) -> Self {
        let theta = theta_for(g, params.theta);
        let weights = type_weights(g, params.entropy_mode);
        let entries = g
            .properties()
            .keys()
            .map(|p| {
                let s = Specificity {
                    hs: hs(g, p, params.lambda).expect("own property"),
                    vs: vs(g, p, theta).expect("own property"),
                    is_: information_gain(&weights, g.k_v(p).expect("own property")),
                };
                (p.clone(), s)
            })
            .collect();
        SpecificityTable {
            graph: g.name().to_string(),
            lambda: params.lambda,
            theta,
            max_depth: g.max_depth(),
            entropy: entropy_of(&weights.into_values().collect::<Vec<_>>()),
            mode: params.entropy_mode,
            entries,
        }
    }

    pub fn get(&self, p: &str) -> Result<&Specificity> {
        self.entries.get(p).ok_or_else(|| KgError::UnknownId(p.to_string()))
    }

    pub fn entries(&self) -> &BTreeMap<PropertyId, Specificity> {
        &self.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    H,
    V,
    I,
}

impl SimKind {
    fn pick(self, s: &Specificity) -> f64 {
        match self {
            SimKind::H => s.hs,
            SimKind::V => s.vs,
            SimKind::I => s.is_,
        }
    }
}

/// Similarities of one concept pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTriple {
    pub left: ConceptRef,
    pub right: ConceptRef,
    pub sim_h: f64,
    pub sim_v: f64,
    pub sim_i: f64,
}

impl SimTriple {
    pub fn values(&self) -> [f64; 3] {
        [self.sim_h, self.sim_v, self.sim_i]
    }

    pub fn get(&self, kind: SimKind) -> f64 {
        match kind {
            SimKind::H => self.sim_h,
            SimKind::V => self.sim_v,
            SimKind::I => self.sim_i,
        }
    }
}

/// Inputs shared by every pair of a batch.
pub struct SimInputs<'a> {
    pub ctx_a: &'a FormalContext,
    pub ctx_b: &'a FormalContext,
    pub spec_a: &'a SpecificityTable,
    pub spec_b: &'a SpecificityTable,
    pub pm: &'a AlignedPropertyPairs,
}

/// One similarity kind for a single pair.
pub fn sim_pair(inp: &SimInputs<'_>, x: &ConceptRef, y: &ConceptRef, kind: SimKind) -> Result<f64> {
    Ok(sim_pair_all(inp, x, y)?[kind as usize])
}

fn sim_pair_all(inp: &SimInputs<'_>, x: &ConceptRef, y: &ConceptRef) -> Result<[f64; 3]> {
    let px = inp.ctx_a.associated(x)?;
    let py = inp.ctx_b.associated(y)?;
    let mut sums = [0.0; 3];
    if px.is_empty() || py.is_empty() {
        return Ok(sums);
    }
    let (nx, ny) = (px.len() as f64, py.len() as f64);
    for pair in &inp.pm.pairs {
        if !(px.contains(pair.left.as_str()) && py.contains(pair.right.as_str())) {
            continue;
        }
        let (sa, sb) = (inp.spec_a.get(&pair.left)?, inp.spec_b.get(&pair.right)?);
        for (k, kind) in [SimKind::H, SimKind::V, SimKind::I].into_iter().enumerate() {
            sums[k] += kind.pick(sa) / nx + kind.pick(sb) / ny;
        }
    }
    Ok(sums.map(|s| s / 2.0))
}

/// Raw (unnormalized) similarities for every pair, in input order.
pub fn sim_raw(inp: &SimInputs<'_>, pairs: &[CandidatePair]) -> Result<Vec<SimTriple>> {
    pairs
        .par_iter()
        .map(|p| {
            let [h, v, i] = sim_pair_all(inp, &p.left, &p.right)?;
            Ok(SimTriple {
                left: p.left.clone(),
                right: p.right.clone(),
                sim_h: h,
                sim_v: v,
                sim_i: i,
            })
        })
        .collect()
}

/// Statistics of one metric over a batch, enough to undo the mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub mean: f64,
    pub sd: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl BatchStats {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        let z = |x: f64| if sd > 0.0 { (x - mean) / sd } else { 0.0 };
        let z_min = xs.iter().map(|x| z(*x)).fold(f64::INFINITY, f64::min);
        let z_max = xs.iter().map(|x| z(*x)).fold(f64::NEG_INFINITY, f64::max);
        BatchStats { mean, sd, z_min, z_max }
    }

    pub fn apply(&self, x: f64) -> f64 {
        if !(self.sd > 0.0) || !(self.z_max > self.z_min) {
            return 0.5;
        }
        let z = (x - self.mean) / self.sd;
        ((z - self.z_min) / (self.z_max - self.z_min)).clamp(0.0, 1.0)
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y * (self.z_max - self.z_min) + self.z_min) * self.sd + self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBatch {
    pub triples: Vec<SimTriple>,
    /// Per metric, in H, V, I order.
    pub stats: [BatchStats; 3],
}

/// Per metric: z-score over the batch, then min-max to [0, 1]. A constant
/// metric maps to 0.5.
pub fn normalize_batch(raw: &[SimTriple]) -> Result<NormalizedBatch> {
    if raw.is_empty() {
        return Err(KgError::InvalidInput("cannot normalize an empty batch".into()));
    }
    if let Some(t) = raw.iter().find(|t| t.values().iter().any(|v| !v.is_finite())) {
        return Err(KgError::NonFinite(format!("similarity of ({}, {})", t.left.id(), t.right.id())));
    }
    let stats = [0, 1, 2].map(|k| BatchStats::of(&raw.iter().map(|t| t.values()[k]).collect::<Vec<_>>()));
    let triples = raw
        .iter()
        .map(|t| SimTriple {
            left: t.left.clone(),
            right: t.right.clone(),
            sim_h: stats[0].apply(t.sim_h),
            sim_v: stats[1].apply(t.sim_v),
            sim_i: stats[2].apply(t.sim_i),
        })
        .collect();
    Ok(NormalizedBatch { triples, stats })
}

/// Similarities for a batch, keyed by pair. Written as CSV with header
/// `left_id,right_id,sim_h,sim_v,sim_i`, preceded by a comment line
/// `# kind=<pair kind> normalized=<true|false>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTable {
    pub kind: PairKind,
    pub normalized: bool,
    rows: Vec<SimTriple>,
    index: BTreeMap<(String, String), usize>,
}

impl SimTable {
    pub fn new(kind: PairKind, normalized: bool, rows: Vec<SimTriple>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if index.insert((r.left.id().to_string(), r.right.id().to_string()), i).is_some() {
                return Err(KgError::DuplicateId(format!("{}/{}", r.left.id(), r.right.id())));
            }
        }
        Ok(SimTable {
            kind,
            normalized,
            rows,
            index,
        })
    }

    pub fn rows(&self) -> &[SimTriple] {
        &self.rows
    }

    pub fn get(&self, left: &str, right: &str) -> Result<&SimTriple> {
        self.index
            .get(&(left.to_string(), right.to_string()))
            .map(|i| &self.rows[*i])
            .ok_or_else(|| KgError::MissingSim(left.to_string(), right.to_string()))
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# kind={} normalized={}", self.kind, self.normalized)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["left_id", "right_id", "sim_h", "sim_v", "sim_i"])?;
        for r in &self.rows {
            w.write_record([
                r.left.id().to_string(),
                r.right.id().to_string(),
                r.sim_h.to_string(),
                r.sim_v.to_string(),
                r.sim_i.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 ids")
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let meta = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| KgError::parse(1, 1, "missing `# kind=... normalized=...` line"))?;
        let mut kind = None;
        let mut normalized = None;
        for kv in meta.split_whitespace() {
            match kv.split_once('=') {
                Some(("kind", v)) => kind = Some(v.parse::<PairKind>()?),
                Some(("normalized", v)) => {
                    normalized = Some(v.parse::<bool>().map_err(|_| KgError::parse(1, 1, "bad normalized flag"))?)
                }
                _ => return Err(KgError::parse(1, 1, format!("unknown table attribute `{kv}`"))),
            }
        }
        let (Some(kind), Some(normalized)) = (kind, normalized) else {
            return Err(KgError::parse(1, 1, "table needs both kind and normalized"));
        };
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["left_id", "right_id", "sim_h", "sim_v", "sim_i"] {
            return Err(KgError::parse(2, 1, "header must be left_id,right_id,sim_h,sim_v,sim_i"));
        }
        let mut rows = Vec::new();
        for (n, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| KgError::parse(n + 3, k + 1, "bad number"))
            };
            rows.push(SimTriple {
                left: ConceptRef::EntityType(rec[0].to_string()),
                right: kind.right_concept(&rec[1]),
                sim_h: num(2)?,
                sim_v: num(3)?,
                sim_i: num(4)?,
            });
        }
        SimTable::new(kind, normalized, rows)
    }
}

impl fmt::Display for SimTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_string())
    }
}
