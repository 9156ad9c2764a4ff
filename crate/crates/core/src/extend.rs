//! Extension of a reference graph with a candidate graph.
//!
//! Aligned candidate types merge their properties and entities into their
//! reference counterparts. Unaligned descendants of aligned types are copied
//! below the aligned reference type (or folded into it). Every other candidate
//! entity is matched against the reference entity types by the instance-level
//! recognizer and either placed under the best accepted type or discarded.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::assess::{cmm_tokens, cue_e, density, etype_tokens, focus_scores, minmax, AssessParams, Query};
use crate::error::{KgError, Result};
use crate::fca::{formalize, Scope};
use crate::ingest::Normalizer;
use crate::matcher::{prune_instance, AlignedPropertyPairs, Alignment, CandidatePair, CandidatePairList, PairKind, Relation};
use crate::model::{ConceptRef, EntityRecord, GraphRecords, KnowledgeGraph, PropertyRecord, SubclassRecord, TypeRecord};
use crate::propsim::{normalize_batch, sim_raw, PropsimParams, SimInputs, SimTable, SpecificityTable};
use crate::recognizer::{predict, FeatureVector, Layout, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictPolicy {
    /// Colliding ids with different labels get an `@<candidate>` suffix.
    #[default]
    Rename,
    Strict,
}

impl std::str::FromStr for ConflictPolicy {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rename" => Ok(ConflictPolicy::Rename),
            "strict" => Ok(ConflictPolicy::Strict),
            _ => Err(KgError::InvalidInput(format!("unknown conflict policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubclassPolicy {
    /// Copy unaligned subclasses below the aligned reference type.
    #[default]
    Attach,
    /// Fold unaligned subclasses, their properties and entities into the
    /// nearest aligned reference type.
    Flatten,
}

impl std::str::FromStr for SubclassPolicy {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attach" => Ok(SubclassPolicy::Attach),
            "flatten" => Ok(SubclassPolicy::Flatten),
            _ => Err(KgError::InvalidInput(format!("unknown subclass policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtendOptions {
    pub conflict: ConflictPolicy,
    pub subclass: SubclassPolicy,
    /// Keep candidate types that are neither aligned nor below an aligned type.
    pub keep_unaligned: bool,
}

/// An accepted (reference type, candidate entity) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDecision {
    pub entity: String,
    pub etype: String,
    pub score: f64,
    /// Sum of the pair's similarities, used to break score ties.
    pub sim_sum: f64,
}

pub enum Recognition<'a> {
    /// Run the recognizer inside `extend`.
    Model {
        model: &'a TrainedModel,
        cutoff: f64,
        propsim: PropsimParams,
    },
    /// Use decisions made earlier, e.g. read from an alignment file.
    Decisions(Vec<InstanceDecision>),
}

pub struct ExtensionPlan<'a> {
    /// (reference type, candidate type) pairs.
    pub etype_alignments: Vec<(String, String)>,
    pub properties: AlignedPropertyPairs,
    pub recognition: Recognition<'a>,
    pub options: ExtendOptions,
}

impl ExtensionPlan<'_> {
    /// Etype pairs from `=` alignments (reference on the left).
    pub fn etype_pairs(alignments: &[Alignment]) -> Result<Vec<(String, String)>> {
        alignments
            .iter()
            .map(|a| match a.relation {
                Relation::Equivalent => Ok((a.left.clone(), a.right.clone())),
                Relation::MemberOf => Err(KgError::InvalidInput(format!(
                    "etype alignment {} / {} has relation ∈",
                    a.left, a.right
                ))),
            })
            .collect()
    }
}

/// Accepted instance pairs from `∈` alignments; `sims` supplies the tie-break sums.
pub fn decisions_from_alignments(alignments: &[Alignment], sims: Option<&SimTable>) -> Vec<InstanceDecision> {
    alignments
        .iter()
        .filter(|a| a.relation == Relation::MemberOf)
        .map(|a| InstanceDecision {
            entity: a.right.clone(),
            etype: a.left.clone(),
            score: a.confidence,
            sim_sum: sims
                .and_then(|s| s.get(&a.left, &a.right).ok())
                .map_or(0.0, |t| t.values().iter().sum()),
        })
        .collect()
}

pub fn decisions_to_alignments(decisions: &[InstanceDecision]) -> Vec<Alignment> {
    decisions
        .iter()
        .map(|d| Alignment {
            left: d.etype.clone(),
            right: d.entity.clone(),
            relation: Relation::MemberOf,
            confidence: d.score,
        })
        .collect()
}

/// Score every (reference type, entity) pair that shares an aligned property
/// and return the accepted ones, in pair order. Similarities are normalized
/// over this batch.
pub fn recognize_entities(
    reference: &KnowledgeGraph,
    cand: &KnowledgeGraph,
    pm: &AlignedPropertyPairs,
    entities: &[String],
    model: &TrainedModel,
    cutoff: f64,
    params: &PropsimParams,
) -> Result<Vec<InstanceDecision>> {
    let pairs = CandidatePairList {
        kind: PairKind::EtypeEntity,
        pairs: reference
            .etypes()
            .keys()
            .flat_map(|t| {
                entities
                    .iter()
                    .map(move |e| CandidatePair::new(ConceptRef::EntityType(t.clone()), ConceptRef::Entity(e.clone())))
            })
            .collect(),
    };
    let ctx_a = formalize(reference, Scope::Schema);
    let ctx_b = formalize(cand, Scope::Instance);
    let (kept, _) = prune_instance(&pairs, pm, &ctx_a, &ctx_b)?;
    if kept.is_empty() {
        return Ok(Vec::new());
    }
    let spec_a = SpecificityTable::compute(reference, params);
    let spec_b = SpecificityTable::compute(cand, params);
    let inputs = SimInputs {
        ctx_a: &ctx_a,
        ctx_b: &ctx_b,
        spec_a: &spec_a,
        spec_b: &spec_b,
        pm,
    };
    let raw = sim_raw(&inputs, &kept.pairs)?;
    let norm = normalize_batch(&raw)?;
    let mut out = Vec::new();
    for t in &norm.triples {
        let fv = FeatureVector {
            layout: Layout::Instance,
            values: t.values().to_vec(),
        };
        let (accept, score) = predict(model, &fv, cutoff)?;
        if accept {
            out.push(InstanceDecision {
                entity: t.right.id().to_string(),
                etype: t.left.id().to_string(),
                score,
                sim_sum: t.values().iter().sum(),
            });
        }
    }
    Ok(out)
}

/// How a candidate entity reached the extended graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Alignment,
    Subclass,
    Recognition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub entity: String,
    /// Id in the extended graph.
    pub id: String,
    pub etype: String,
    pub via: Via,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rename {
    pub kind: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub etype: String,
    pub cmm_before: f64,
    pub cmm_after: f64,
    pub dem_before: f64,
    pub dem_after: f64,
    pub focus_before: f64,
    pub focus_after: f64,
    pub dem_raw_before: f64,
    pub dem_raw_after: f64,
    pub cue_e_before: f64,
    pub cue_e_after: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub reference: String,
    pub candidate: String,
    pub etypes_added: usize,
    pub properties_added: usize,
    pub entities_added: usize,
    pub entities_discarded: usize,
    pub placements: Vec<Placement>,
    pub discarded: Vec<String>,
    pub dropped_etypes: Vec<String>,
    pub renames: Vec<Rename>,
    pub comparison: Vec<ComparisonRow>,
}

impl ExtensionReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    /// The before/after comparison rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        for r in &self.comparison {
            w.serialize(r)?;
        }
        if self.comparison.is_empty() {
            w.write_record([
                "etype",
                "cmm_before",
                "cmm_after",
                "dem_before",
                "dem_after",
                "focus_before",
                "focus_after",
                "dem_raw_before",
                "dem_raw_after",
                "cue_e_before",
                "cue_e_after",
            ])?;
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

struct TypeSlot {
    label: String,
    props: BTreeSet<String>,
    supers: BTreeSet<String>,
}

struct EntitySlot {
    label: String,
    etype: Option<String>,
    props: BTreeSet<String>,
}

/// Mutable record view of the graph under construction.
struct Builder<'a> {
    cand_name: &'a str,
    policy: ConflictPolicy,
    props: BTreeMap<String, String>,
    types: BTreeMap<String, TypeSlot>,
    entities: BTreeMap<String, EntitySlot>,
    renames: Vec<Rename>,
}

/// Outcome of placing a candidate id next to the existing ids of one kind.
enum Slot {
    Fresh(String),
    Existing(String),
}

impl Builder<'_> {
    fn resolve(&mut self, kind: &str, id: &str, label: &str, existing: Option<&str>, taken: impl Fn(&str) -> bool) -> Result<Slot> {
        match existing {
            None => Ok(Slot::Fresh(id.to_string())),
            Some(l) if l == label => Ok(Slot::Existing(id.to_string())),
            Some(l) => {
                if self.policy == ConflictPolicy::Strict {
                    return Err(KgError::Conflict {
                        id: id.to_string(),
                        reference: l.to_string(),
                        candidate: label.to_string(),
                    });
                }
                let base = format!("{id}@{}", self.cand_name);
                let mut to = base.clone();
                let mut n = 2;
                while taken(&to) {
                    to = format!("{base}#{n}");
                    n += 1;
                }
                self.renames.push(Rename {
                    kind: kind.to_string(),
                    from: id.to_string(),
                    to: to.clone(),
                });
                Ok(Slot::Fresh(to))
            }
        }
    }
}

fn nearest_aligned(cand: &KnowledgeGraph, start: &str, aligned: &BTreeMap<&str, &str>) -> Option<String> {
    let mut seen = BTreeSet::new();
    let mut level: Vec<String> = vec![start.to_string()];
    while !level.is_empty() {
        let mut hits: Vec<&str> = level.iter().filter_map(|t| aligned.get(t.as_str()).copied()).collect();
        if !hits.is_empty() {
            hits.sort();
            return Some(hits[0].to_string());
        }
        let mut next = BTreeSet::new();
        for t in &level {
            if let Ok(e) = cand.etype(t) {
                for s in &e.superclasses {
                    if seen.insert(s.clone()) {
                        next.insert(s.clone());
                    }
                }
            }
        }
        level = next.into_iter().collect();
    }
    None
}

/// Merge `cand` into a copy of `reference`. The report's comparison rows are
/// left empty; see [`compare_assessment`].
pub fn extend(
    reference: &KnowledgeGraph,
    cand: &KnowledgeGraph,
    plan: &ExtensionPlan<'_>,
    normalizer: &Normalizer,
) -> Result<(KnowledgeGraph, ExtensionReport)> {
    // (candidate -> reference) for aligned types; both sides must be 1:1.
    let mut aligned: BTreeMap<&str, &str> = BTreeMap::new();
    let mut ref_seen = BTreeSet::new();
    for (a, b) in &plan.etype_alignments {
        reference.etype(a)?;
        cand.etype(b)?;
        if !ref_seen.insert(a.as_str()) || aligned.insert(b.as_str(), a.as_str()).is_some() {
            return Err(KgError::InvalidInput(format!("etype alignment {a} / {b} is not one-to-one")));
        }
    }
    for p in &plan.properties.pairs {
        reference.property(&p.left)?;
        cand.property(&p.right)?;
    }

    let records = reference.to_records();
    let mut b = Builder {
        cand_name: cand.name(),
        policy: plan.options.conflict,
        props: records.properties.iter().map(|p| (p.id.clone(), p.label.clone().unwrap_or_default())).collect(),
        types: records
            .types
            .iter()
            .map(|t| {
                (
                    t.id.clone(),
                    TypeSlot {
                        label: t.label.clone().unwrap_or_default(),
                        props: t.props.iter().cloned().collect(),
                        supers: BTreeSet::new(),
                    },
                )
            })
            .collect(),
        entities: records
            .entities
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    EntitySlot {
                        label: e.label.clone().unwrap_or_default(),
                        etype: e.etype.clone(),
                        props: e.props.iter().cloned().collect(),
                    },
                )
            })
            .collect(),
        renames: Vec::new(),
    };
    for s in &records.subclasses {
        b.types.get_mut(&s.child).expect("known child").supers.insert(s.parent.clone());
    }

    // Candidate property -> extended property; unaligned ones keep their id
    // unless it collides with a differently labelled reference property.
    let mut pmap: BTreeMap<String, String> = BTreeMap::new();
    for (id, p) in cand.properties() {
        let target = match plan.properties.left_of(id) {
            Some(l) => l.to_string(),
            None => {
                let existing = b.props.get(id).cloned();
                let taken: BTreeSet<String> = b.props.keys().chain(cand.properties().keys()).cloned().collect();
                match b.resolve("property", id, &p.raw_label, existing.as_deref(), |x| taken.contains(x))? {
                    Slot::Fresh(to) | Slot::Existing(to) => to,
                }
            }
        };
        pmap.insert(id.clone(), target);
    }
    let cand_labels: BTreeMap<&str, &str> = cand.properties().iter().map(|(k, p)| (k.as_str(), p.raw_label.as_str())).collect();
    let map_props = |b: &mut Builder<'_>, ps: &BTreeSet<String>| -> BTreeSet<String> {
        ps.iter()
            .map(|p| {
                let to = pmap[p].clone();
                b.props.entry(to.clone()).or_insert_with(|| cand_labels[p.as_str()].to_string());
                to
            })
            .collect()
    };

    // Unaligned descendants of aligned candidate types.
    let mut below: BTreeSet<String> = BTreeSet::new();
    for e_b in aligned.keys() {
        for d in cand.descendants(e_b)? {
            if !aligned.contains_key(d.as_str()) {
                below.insert(d);
            }
        }
    }
    let kept_other: BTreeSet<String> = if plan.options.keep_unaligned {
        cand.etypes()
            .keys()
            .filter(|t| !aligned.contains_key(t.as_str()) && !below.contains(*t))
            .cloned()
            .collect()
    } else {
        BTreeSet::new()
    };

    // Candidate type -> extended type, plus whether the target is new.
    let mut tmap: BTreeMap<String, String> = BTreeMap::new();
    let mut new_types: BTreeSet<String> = BTreeSet::new();
    for (b_id, a_id) in &aligned {
        tmap.insert(b_id.to_string(), a_id.to_string());
    }
    for t in below.iter().chain(&kept_other) {
        if plan.options.subclass == SubclassPolicy::Flatten && below.contains(t) {
            let target = nearest_aligned(cand, t, &aligned).expect("descends from an aligned type");
            tmap.insert(t.clone(), target);
            continue;
        }
        let label = cand.etype(t)?.label.clone();
        let existing = b.types.get(t).map(|s| s.label.clone());
        let taken: BTreeSet<String> = b.types.keys().chain(cand.etypes().keys()).cloned().collect();
        match b.resolve("etype", t, &label, existing.as_deref(), |x| taken.contains(x))? {
            Slot::Existing(to) => {
                tmap.insert(t.clone(), to);
            }
            Slot::Fresh(to) => {
                b.types.insert(
                    to.clone(),
                    TypeSlot {
                        label,
                        props: BTreeSet::new(),
                        supers: BTreeSet::new(),
                    },
                );
                new_types.insert(to.clone());
                tmap.insert(t.clone(), to);
            }
        }
    }

    // Properties and superclass links.
    for (b_id, to) in &tmap {
        let cand_type = cand.etype(b_id)?;
        if new_types.contains(to) {
            let direct = map_props(&mut b, &cand_type.direct_properties);
            let supers: BTreeSet<String> = cand_type.superclasses.iter().filter_map(|s| tmap.get(s).cloned()).collect();
            let slot = b.types.get_mut(to).expect("inserted above");
            slot.props.extend(direct);
            slot.supers.extend(supers);
        } else {
            let inherited = match reference.prop(to) {
                Ok(p) => p.clone(),
                Err(_) => BTreeSet::new(),
            };
            let props = map_props(&mut b, cand.prop(b_id)?);
            let slot = b.types.get_mut(to).expect("reference type");
            slot.props.extend(props.into_iter().filter(|p| !inherited.contains(p)));
        }
    }

    // Entities typed by aligned or copied types go in directly.
    let mut placements = Vec::new();
    let mut remaining = Vec::new();
    let place = |b: &mut Builder<'_>, e_id: &str, etype: &str, via: Via, placements: &mut Vec<Placement>| -> Result<()> {
        let e = cand.entity(e_id)?;
        let props = map_props(b, &e.own_properties);
        let existing = b.entities.get(e_id).map(|s| s.label.clone());
        let taken: BTreeSet<String> = b.entities.keys().chain(cand.entities().keys()).cloned().collect();
        let id = match b.resolve("entity", e_id, &e.label, existing.as_deref(), |x| taken.contains(x))? {
            Slot::Existing(id) => {
                b.entities.get_mut(&id).expect("existing").props.extend(props);
                id
            }
            Slot::Fresh(id) => {
                b.entities.insert(
                    id.clone(),
                    EntitySlot {
                        label: e.label.clone(),
                        etype: Some(etype.to_string()),
                        props,
                    },
                );
                id
            }
        };
        let etype = b.entities[&id].etype.clone().unwrap_or_default();
        placements.push(Placement {
            entity: e_id.to_string(),
            id,
            etype,
            via,
        });
        Ok(())
    };
    for (id, e) in cand.entities() {
        match e.etype.as_deref() {
            Some(t) if aligned.contains_key(t) => place(&mut b, id, &tmap[t], Via::Alignment, &mut placements)?,
            Some(t) if below.contains(t) => place(&mut b, id, &tmap[t], Via::Subclass, &mut placements)?,
            _ => remaining.push(id.clone()),
        }
    }

    // Instance-level recognition against the reference types as they were.
    let decisions = match &plan.recognition {
        Recognition::Model { model, cutoff, propsim } => {
            recognize_entities(reference, cand, &plan.properties, &remaining, model, *cutoff, propsim)?
        }
        Recognition::Decisions(d) => d.clone(),
    };
    let mut best: BTreeMap<&str, &InstanceDecision> = BTreeMap::new();
    for d in &decisions {
        if reference.etype(&d.etype).is_err() {
            debug!("ignoring decision for unknown reference type {}", d.etype);
            continue;
        }
        let better = best.get(d.entity.as_str()).is_none_or(|cur| {
            d.score
                .total_cmp(&cur.score)
                .then(d.sim_sum.total_cmp(&cur.sim_sum))
                .then(cur.etype.cmp(&d.etype))
                .is_gt()
        });
        if better {
            best.insert(&d.entity, d);
        }
    }
    let mut discarded = Vec::new();
    for e in &remaining {
        match best.get(e.as_str()) {
            Some(d) => place(&mut b, e, &d.etype, Via::Recognition, &mut placements)?,
            None => {
                info!("discarding candidate entity {e}: no reference type accepted it");
                discarded.push(e.clone());
            }
        }
    }

    let dropped_etypes: Vec<String> = cand.etypes().keys().filter(|t| !tmap.contains_key(*t)).cloned().collect();
    for t in &dropped_etypes {
        debug!("dropping unaligned candidate type {t}");
    }

    let renames = std::mem::take(&mut b.renames);
    let out = GraphRecords {
        properties: b
            .props
            .into_iter()
            .map(|(id, label)| PropertyRecord { id, label: Some(label) })
            .collect(),
        subclasses: b
            .types
            .iter()
            .flat_map(|(id, t)| {
                t.supers.iter().map(move |p| SubclassRecord {
                    child: id.clone(),
                    parent: p.clone(),
                })
            })
            .collect(),
        types: b
            .types
            .into_iter()
            .map(|(id, t)| TypeRecord {
                id,
                label: Some(t.label),
                props: t.props.into_iter().collect(),
            })
            .collect(),
        entities: b
            .entities
            .into_iter()
            .map(|(id, e)| EntityRecord {
                id,
                label: Some(e.label),
                etype: e.etype,
                props: e.props.into_iter().collect(),
            })
            .collect(),
    };
    let ext = KnowledgeGraph::from_records(reference.name(), out, normalizer)?;
    let report = ExtensionReport {
        reference: reference.name().to_string(),
        candidate: cand.name().to_string(),
        etypes_added: ext.etypes().keys().filter(|k| !reference.etypes().contains_key(*k)).count(),
        properties_added: ext.properties().keys().filter(|k| !reference.properties().contains_key(*k)).count(),
        entities_added: ext.entities().keys().filter(|k| !reference.entities().contains_key(*k)).count(),
        entities_discarded: discarded.len(),
        placements,
        discarded,
        dropped_etypes,
        renames,
        comparison: Vec::new(),
    };
    Ok((ext, report))
}

fn subtree_labels(g: &KnowledgeGraph, e: &str, norm: &Normalizer) -> Result<Vec<Vec<String>>> {
    let tokens = etype_tokens(g, norm);
    let mut ids = g.descendants(e)?;
    ids.insert(e.to_string());
    Ok(ids.iter().map(|i| tokens[i].clone()).collect())
}

/// Before/after metrics of the aligned reference types. CMM reads the type's
/// subtree labels, DEM is the type's density, Focus ranks all before and after
/// rows together; each of the three is then min-max normalized over those rows.
pub fn compare_assessment(
    reference: &KnowledgeGraph,
    ext: &KnowledgeGraph,
    aligned: &[String],
    q: &Query,
    norm: &Normalizer,
    params: &AssessParams,
) -> Result<Vec<ComparisonRow>> {
    let mut ids: Vec<&str> = aligned.iter().map(String::as_str).collect();
    ids.sort();
    ids.dedup();
    let n = ids.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let graphs = [reference, ext];
    let (mut cmm, mut dem, mut cue) = (Vec::new(), Vec::new(), Vec::new());
    for g in graphs {
        for e in &ids {
            let labels = subtree_labels(g, e, norm)?;
            cmm.push(cmm_tokens(labels.iter(), q, params.alpha, params.beta));
            dem.push(density(g, e, params.w)?);
            cue.push(cue_e(g, e)?);
        }
    }
    let corpus: Vec<(&KnowledgeGraph, &str)> = graphs.iter().flat_map(|g| ids.iter().map(move |e| (*g, *e))).collect();
    let focus: Vec<f64> = focus_scores(&corpus, params.eta)?.iter().map(|r| r.focus_e).collect();
    let (cmm_n, dem_n, focus_n) = (minmax(&cmm), minmax(&dem), minmax(&focus));
    Ok((0..n)
        .map(|i| ComparisonRow {
            etype: ids[i].to_string(),
            cmm_before: cmm_n[i],
            cmm_after: cmm_n[n + i],
            dem_before: dem_n[i],
            dem_after: dem_n[n + i],
            focus_before: focus_n[i],
            focus_after: focus_n[n + i],
            dem_raw_before: dem[i],
            dem_raw_after: dem[n + i],
            cue_e_before: cue[i],
            cue_e_after: cue[n + i],
        })
        .collect())
}
