//! Stage functions shared by the command line tool and the full `run`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::assess::{assess, AssessmentReport, Query};
use crate::config::RunConfig;
use crate::error::{KgError, Result};
use crate::extend::{compare_assessment, extend, ExtensionPlan, ExtensionReport, Recognition};
use crate::fca::{formalize, Scope};
use crate::ingest::{load_graph, write_graph, Normalizer, ParseMode, StopwordList};
use crate::lexsim::{EmbeddingStore, TaxonomyStore};
use crate::matcher::{
    alignments_to_string, gen_pairs, match_properties, pairs_to_string, prune_instance, prune_schema, read_alignments,
    AlignedPropertyPairs, Alignment, CandidatePairList, PairKind, Relation,
};
use crate::model::KnowledgeGraph;
use crate::propsim::{normalize_batch, sim_raw, SimInputs, SimTable, SpecificityTable};
use crate::recognizer::{balance, predict, train, Dataset, EvalReport, FeatureVector, Featurizer, Layout, TrainedModel};

/// Label resources shared by every stage.
pub struct Resources {
    pub normalizer: Normalizer,
    pub embeddings: Option<EmbeddingStore>,
    pub taxonomy: Option<TaxonomyStore>,
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let stopwords = match &cfg.paths.stopwords {
            Some(p) => StopwordList::load(p)?,
            None => StopwordList::default(),
        };
        Ok(Resources {
            normalizer: Normalizer::new(stopwords),
            embeddings: cfg.paths.embeddings.as_deref().map(EmbeddingStore::load).transpose()?,
            taxonomy: cfg.paths.taxonomy.as_deref().map(TaxonomyStore::load).transpose()?,
        })
    }
}

pub fn read_graph_file(path: &Path, res: &Resources) -> Result<KnowledgeGraph> {
    load_graph(path, ParseMode::Strict, &res.normalizer)
}

pub fn read_alignment_file(path: &Path) -> Result<Vec<Alignment>> {
    read_alignments(fs::File::open(path)?)
}

pub fn property_alignments(a: &KnowledgeGraph, b: &KnowledgeGraph, cfg: &RunConfig, res: &Resources) -> AlignedPropertyPairs {
    match_properties(a, b, &cfg.matching, res.embeddings.as_ref())
}

/// Cross product of `kind`, split into (kept, pruned).
pub fn candidate_pairs(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    kind: PairKind,
    pm: &AlignedPropertyPairs,
    cfg: &RunConfig,
    res: &Resources,
) -> Result<(CandidatePairList, CandidatePairList)> {
    let all = gen_pairs(a, b, kind);
    match kind {
        PairKind::EtypeEtype => prune_schema(a, b, &all, cfg.ps_threshold, &res.normalizer, res.embeddings.as_ref()),
        PairKind::EtypeEntity => {
            prune_instance(&all, pm, &formalize(a, Scope::Schema), &formalize(b, Scope::Instance))
        }
    }
}

/// Similarity table of the pairs, batch-normalized unless `raw`.
pub fn similarity_table(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    pairs: &CandidatePairList,
    pm: &AlignedPropertyPairs,
    cfg: &RunConfig,
    raw: bool,
) -> Result<SimTable> {
    if pairs.is_empty() {
        return SimTable::new(pairs.kind, !raw, Vec::new());
    }
    let scope_b = match pairs.kind {
        PairKind::EtypeEtype => Scope::Schema,
        PairKind::EtypeEntity => Scope::Instance,
    };
    let ctx_a = formalize(a, Scope::Schema);
    let ctx_b = formalize(b, scope_b);
    let spec_a = SpecificityTable::compute(a, &cfg.propsim);
    let spec_b = SpecificityTable::compute(b, &cfg.propsim);
    let inputs = SimInputs {
        ctx_a: &ctx_a,
        ctx_b: &ctx_b,
        spec_a: &spec_a,
        spec_b: &spec_b,
        pm,
    };
    let triples = sim_raw(&inputs, &pairs.pairs)?;
    if raw {
        SimTable::new(pairs.kind, false, triples)
    } else {
        SimTable::new(pairs.kind, true, normalize_batch(&triples)?.triples)
    }
}

pub fn gold_set(gold: &[Alignment]) -> BTreeSet<(String, String)> {
    gold.iter().map(|a| (a.left.clone(), a.right.clone())).collect()
}

/// Feature rows for `pairs`, labelled from `gold` when given.
pub fn build_dataset(
    a: &KnowledgeGraph,
    b: &KnowledgeGraph,
    pairs: &CandidatePairList,
    sims: &SimTable,
    res: &Resources,
    gold: Option<&BTreeSet<(String, String)>>,
) -> Result<Dataset> {
    let layout = Layout::for_kind(pairs.kind);
    let f = Featurizer {
        a,
        b,
        normalizer: &res.normalizer,
        embeddings: res.embeddings.as_ref(),
        taxonomy: res.taxonomy.as_ref(),
        sims,
    };
    let x = f.featurize_all(&pairs.pairs, layout)?.into_iter().map(|v| v.values).collect();
    let y = gold.map(|g| {
        pairs
            .pairs
            .iter()
            .map(|p| g.contains(&(p.left.id().to_string(), p.right.id().to_string())))
            .collect()
    });
    Ok(Dataset {
        layout,
        kind: pairs.kind,
        pairs: pairs.pairs.clone(),
        x,
        y,
    })
}

/// Balance (if configured) and train with the configured model kind.
pub fn train_model(data: &Dataset, cfg: &RunConfig) -> Result<TrainedModel> {
    let data = match cfg.balance_ratio {
        Some(r) => balance(data, r, cfg.seed)?,
        None => data.clone(),
    };
    train(&data, &cfg.model_params(), cfg.seed)
}

/// Accepted pairs as alignments, `=` for schema pairs and `∈` for instance pairs.
pub fn recognize(model: &TrainedModel, data: &Dataset, cutoff: f64) -> Result<Vec<Alignment>> {
    let relation = match data.kind {
        PairKind::EtypeEtype => Relation::Equivalent,
        PairKind::EtypeEntity => Relation::MemberOf,
    };
    let mut out = Vec::new();
    for (p, x) in data.pairs.iter().zip(&data.x) {
        let fv = FeatureVector {
            layout: data.layout,
            values: x.clone(),
        };
        let (accept, score) = predict(model, &fv, cutoff)?;
        if accept {
            out.push(Alignment {
                left: p.left.id().to_string(),
                right: p.right.id().to_string(),
                relation,
                confidence: score,
            });
        }
    }
    Ok(out)
}

/// Greedy one-to-one selection by confidence, then ids.
pub fn one_to_one(alignments: &[Alignment]) -> Vec<Alignment> {
    let mut sorted: Vec<&Alignment> = alignments.iter().collect();
    sorted.sort_by(|x, y| {
        y.confidence
            .total_cmp(&x.confidence)
            .then(x.left.cmp(&y.left))
            .then(x.right.cmp(&y.right))
    });
    let (mut l, mut r) = (BTreeSet::new(), BTreeSet::new());
    let mut out: Vec<Alignment> = Vec::new();
    for a in sorted {
        if !l.contains(&a.left) && !r.contains(&a.right) {
            l.insert(a.left.clone());
            r.insert(a.right.clone());
            out.push(a.clone());
        }
    }
    out.sort_by(|x, y| x.left.cmp(&y.left).then(x.right.cmp(&y.right)));
    out
}

/// Compare predicted and gold pair sets within a cross product of `total`
/// pairs; gold pairs that were pruned count as false negatives.
pub fn evaluate_alignments(predicted: &[Alignment], gold: &[Alignment], total: usize) -> EvalReport {
    let p = gold_set(predicted);
    let g = gold_set(gold);
    let tp = p.intersection(&g).count();
    let fp = p.len() - tp;
    let fn_ = g.len() - tp;
    EvalReport::from_counts(tp, fp, fn_, total.saturating_sub(tp + fp + fn_))
}

pub fn cross_product_size(a: &KnowledgeGraph, b: &KnowledgeGraph, kind: PairKind) -> usize {
    a.etypes().len()
        * match kind {
            PairKind::EtypeEtype => b.etypes().len(),
            PairKind::EtypeEntity => b.entities().len(),
        }
}

/// The query from the config, or the candidate's entity type labels.
pub fn query_for(cfg: &RunConfig, cand: &KnowledgeGraph, res: &Resources) -> Query {
    match &cfg.query {
        Some(q) => Query::parse(q, &res.normalizer),
        None => {
            let labels: Vec<&str> = cand.etypes().values().map(|t| t.label.as_str()).collect();
            Query::parse(&labels.join(","), &res.normalizer)
        }
    }
}

pub fn instance_model(cfg: &RunConfig) -> Result<TrainedModel> {
    match &cfg.paths.instance_model {
        Some(p) => TrainedModel::load(p),
        None => Ok(TrainedModel::always_accept(Layout::Instance)),
    }
}

/// Run the extension and attach the before/after comparison.
pub fn extend_graphs(
    reference: &KnowledgeGraph,
    cand: &KnowledgeGraph,
    plan: &ExtensionPlan<'_>,
    cfg: &RunConfig,
    res: &Resources,
) -> Result<(KnowledgeGraph, ExtensionReport)> {
    let (ext, mut report) = extend(reference, cand, plan, &res.normalizer)?;
    let aligned: Vec<String> = plan.etype_alignments.iter().map(|(a, _)| a.clone()).collect();
    let q = query_for(cfg, cand, res);
    report.comparison = compare_assessment(reference, &ext, &aligned, &q, &res.normalizer, &cfg.assess)?;
    Ok((ext, report))
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| KgError::config(key, "required for this command"))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Every artifact `run` writes, in write order.
pub const RUN_ARTIFACTS: [&str; 17] = [
    "config.txt",
    "reference.json",
    "candidate.json",
    "property_alignments.tsv",
    "schema_pairs.tsv",
    "schema_pruned.tsv",
    "schema_sims.csv",
    "schema_features.csv",
    "etype_alignments.tsv",
    "extended.json",
    "extension_report.json",
    "extension_report.csv",
    "assessment.json",
    "assessment.csv",
    "report.json",
    "report.md",
    "run_summary.json",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub property_alignments: usize,
    pub schema_pairs: usize,
    pub schema_pruned: usize,
    pub etype_alignments: usize,
    pub etypes_added: usize,
    pub properties_added: usize,
    pub entities_added: usize,
    pub entities_discarded: usize,
}

/// The whole chain: ingest, property matching, schema pairs and similarities,
/// etype alignment (schema model or given file), extension with the instance
/// model, assessment and report. Everything lands in `paths.output`.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let out = required(&cfg.paths.output, "paths.output")?;
    fs::create_dir_all(out)?;
    let res = Resources::load(cfg)?;
    let a = read_graph_file(required(&cfg.paths.reference, "paths.reference")?, &res)?;
    let b = read_graph_file(required(&cfg.paths.candidate, "paths.candidate")?, &res)?;
    write(out, "config.txt", &cfg.to_text())?;
    write_graph(&out.join("reference.json"), &a)?;
    write_graph(&out.join("candidate.json"), &b)?;

    let pm = property_alignments(&a, &b, cfg, &res);
    write(out, "property_alignments.tsv", &alignments_to_string(&pm.to_alignments()))?;
    info!("{} property alignments", pm.len());

    let (kept, pruned) = candidate_pairs(&a, &b, PairKind::EtypeEtype, &pm, cfg, &res)?;
    write(out, "schema_pairs.tsv", &pairs_to_string(&kept))?;
    write(out, "schema_pruned.tsv", &pairs_to_string(&pruned))?;
    let sims = similarity_table(&a, &b, &kept, &pm, cfg, false)?;
    write(out, "schema_sims.csv", &sims.to_csv_string())?;
    let data = build_dataset(&a, &b, &kept, &sims, &res, None)?;
    write(out, "schema_features.csv", &data.to_csv_string())?;

    let etype_alignments = match (&cfg.paths.schema_model, &cfg.paths.etype_alignments) {
        (Some(m), _) => one_to_one(&recognize(&TrainedModel::load(m)?, &data, cfg.cutoff)?),
        (None, Some(p)) => read_alignment_file(p)?,
        (None, None) => {
            return Err(KgError::config(
                "paths.schema_model",
                "either paths.schema_model or paths.etype_alignments is required",
            ))
        }
    };
    write(out, "etype_alignments.tsv", &alignments_to_string(&etype_alignments))?;

    let model = instance_model(cfg)?;
    let plan = ExtensionPlan {
        etype_alignments: ExtensionPlan::etype_pairs(&etype_alignments)?,
        properties: pm.clone(),
        recognition: Recognition::Model {
            model: &model,
            cutoff: cfg.cutoff,
            propsim: cfg.propsim,
        },
        options: cfg.extend,
    };
    let (ext, report) = extend_graphs(&a, &b, &plan, cfg, &res)?;
    write_graph(&out.join("extended.json"), &ext)?;
    write(out, "extension_report.json", &report.to_json())?;
    write(out, "extension_report.csv", &report.to_csv_string())?;

    let q = query_for(cfg, &b, &res);
    let assessment = assess_named(&[&a, &b, &ext], &["reference", "candidate", "extended"], &q, cfg, &res)?;
    write(out, "assessment.json", &assessment.to_json())?;
    write(out, "assessment.csv", &assessment.to_csv_string())?;

    let (json, md) = build_report(out)?;
    write(out, "report.json", &json)?;
    write(out, "report.md", &md)?;

    let summary = RunSummary {
        property_alignments: pm.len(),
        schema_pairs: kept.len(),
        schema_pruned: pruned.len(),
        etype_alignments: etype_alignments.len(),
        etypes_added: report.etypes_added,
        properties_added: report.properties_added,
        entities_added: report.entities_added,
        entities_discarded: report.entities_discarded,
    };
    let mut s = serde_json::to_string_pretty(&summary)?;
    s.push('\n');
    write(out, "run_summary.json", &s)?;
    Ok(summary)
}

/// Assess graphs under distinct display names (graphs often share a name,
/// e.g. a reference and its extension).
pub fn assess_named(
    graphs: &[&KnowledgeGraph],
    names: &[&str],
    q: &Query,
    cfg: &RunConfig,
    res: &Resources,
) -> Result<AssessmentReport> {
    let renamed: Vec<KnowledgeGraph> = graphs
        .iter()
        .zip(names)
        .map(|(g, n)| KnowledgeGraph::from_records(n, g.to_records(), &res.normalizer))
        .collect::<Result<_>>()?;
    let refs: Vec<&KnowledgeGraph> = renamed.iter().collect();
    assess(&refs, q, &res.normalizer, &cfg.assess)
}

fn count_lines(path: &Path) -> Result<usize> {
    Ok(fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count())
}

/// Summarize whichever known artifacts exist in `dir` as JSON and Markdown.
pub fn build_report(dir: &Path) -> Result<(String, String)> {
    let mut summary: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let mut md = String::from("# Run report\n\n");
    let mut counts = Vec::new();
    for (file, label) in [
        ("property_alignments.tsv", "property alignments"),
        ("schema_pairs.tsv", "schema pairs kept"),
        ("schema_pruned.tsv", "schema pairs pruned"),
        ("etype_alignments.tsv", "etype alignments"),
        ("instance_alignments.tsv", "instance alignments"),
    ] {
        let p = dir.join(file);
        if p.exists() {
            let n = count_lines(&p)?;
            summary.insert(file.trim_end_matches(".tsv").to_string(), n.into());
            counts.push((label, n));
        }
    }
    if !counts.is_empty() {
        md.push_str("| artifact | count |\n|---|---|\n");
        for (label, n) in &counts {
            let _ = writeln!(md, "| {label} | {n} |");
        }
        md.push('\n');
    }
    let ext_path = dir.join("extension_report.json");
    if ext_path.exists() {
        let r: ExtensionReport = serde_json::from_str(&fs::read_to_string(&ext_path)?)?;
        md.push_str("## Extension\n\n");
        let _ = writeln!(
            md,
            "{} entity types, {} properties and {} entities added; {} entities discarded.\n",
            r.etypes_added, r.properties_added, r.entities_added, r.entities_discarded
        );
        if !r.comparison.is_empty() {
            md.push_str("| etype | CMM before | CMM after | DEM before | DEM after | Focus before | Focus after |\n");
            md.push_str("|---|---|---|---|---|---|---|\n");
            for c in &r.comparison {
                let _ = writeln!(
                    md,
                    "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                    c.etype, c.cmm_before, c.cmm_after, c.dem_before, c.dem_after, c.focus_before, c.focus_after
                );
            }
            md.push('\n');
        }
        summary.insert("extension".into(), serde_json::to_value(&r)?);
    }
    let assess_path = dir.join("assessment.json");
    if assess_path.exists() {
        let r: AssessmentReport = serde_json::from_str(&fs::read_to_string(&assess_path)?)?;
        md.push_str("## Assessment\n\n| graph | Cue_k | Cue_kr | Focus_k | Balance | CMM | DEM | TF-IDF | BM25 |\n");
        md.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for g in &r.graphs {
            let _ = writeln!(
                md,
                "| {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
                g.graph, g.cue_k, g.cue_kr, g.focus_k, g.balance, g.cmm, g.dem, g.tfidf, g.bm25
            );
        }
        md.push('\n');
        summary.insert("assessment".into(), serde_json::to_value(&r.graphs)?);
    }
    let eval_path = dir.join("eval.json");
    if eval_path.exists() {
        let e: EvalReport = serde_json::from_str(&fs::read_to_string(&eval_path)?)?;
        let _ = writeln!(
            md,
            "## Evaluation\n\nP {:.4}, R {:.4}, F0.5 {:.4}, F1 {:.4}, F2 {:.4}\n",
            e.precision, e.recall, e.f_05, e.f_1, e.f_2
        );
        summary.insert("evaluation".into(), serde_json::to_value(e)?);
    }
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    Ok((json, md))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(l: &str, r: &str, c: f64) -> Alignment {
        Alignment {
            left: l.into(),
            right: r.into(),
            relation: Relation::Equivalent,
            confidence: c,
        }
    }

    #[test]
    fn one_to_one_prefers_confidence_then_ids() {
        let got = one_to_one(&[al("A", "x", 0.9), al("A", "y", 0.95), al("B", "y", 0.9), al("B", "x", 0.9)]);
        assert_eq!(got, vec![al("A", "y", 0.95), al("B", "x", 0.9)]);
    }

    #[test]
    fn evaluation_counts_pruned_gold_as_missed() {
        let e = evaluate_alignments(&[al("A", "x", 1.0), al("B", "z", 1.0)], &[al("A", "x", 1.0), al("C", "y", 1.0)], 9);
        assert_eq!((e.tp, e.fp, e.fn_, e.tn), (1, 1, 1, 6));
    }
}
