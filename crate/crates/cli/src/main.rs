mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use log::info;

use kgext::assess::{lotus_sets_by_etype, lotus_stats, Query};
use kgext::config::RunConfig;
use kgext::extend::{decisions_from_alignments, ExtensionPlan, Recognition};
use kgext::fca::{export_context_string, formalize, Scope};
use kgext::ingest::{load_graph, write_graph, ParseMode};
use kgext::matcher::{alignments_to_string, pairs_to_string, read_pairs, AlignedPropertyPairs, CandidatePairList, PairKind};
use kgext::pipeline::{self, Resources};
use kgext::propsim::SimTable;
use kgext::recognizer::TrainedModel;
use kgext::{KgError, KnowledgeGraph};

use args::{Cli, Command, GraphPair};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<KgError>() {
        Some(k) if !k.is_validation() => 2,
        Some(_) => 1,
        // Errors raised here in the tool are about arguments.
        None => 1,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    if let Some(t) = cli.threads {
        cfg.set("run.threads", &t.to_string())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    pool.install(|| dispatch(cli.command, cfg))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn graph(path: &Path, res: &Resources) -> Result<KnowledgeGraph> {
    pipeline::read_graph_file(path, res).with_context(|| format!("reading {}", path.display()))
}

fn graphs(g: &GraphPair, cfg: &RunConfig, res: &Resources) -> Result<(KnowledgeGraph, KnowledgeGraph)> {
    let a = g
        .reference
        .as_ref()
        .or(cfg.paths.reference.as_ref())
        .ok_or_else(|| anyhow!("--ref is required (or set paths.reference)"))?;
    let b = g
        .candidate
        .as_ref()
        .or(cfg.paths.candidate.as_ref())
        .ok_or_else(|| anyhow!("--cand is required (or set paths.candidate)"))?;
    Ok((graph(a, res)?, graph(b, res)?))
}

fn alignments(path: &Path) -> Result<Vec<kgext::matcher::Alignment>> {
    pipeline::read_alignment_file(path).with_context(|| format!("reading {}", path.display()))
}

fn props(path: &Path) -> Result<AlignedPropertyPairs> {
    Ok(AlignedPropertyPairs::from_alignments(&alignments(path)?))
}

fn pairs(path: &Path) -> Result<CandidatePairList> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_pairs(f).with_context(|| format!("reading {}", path.display()))
}

fn sims(path: &Path) -> Result<SimTable> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SimTable::read(f).with_context(|| format!("reading {}", path.display()))
}

fn dispatch(cmd: Command, mut cfg: RunConfig) -> Result<()> {
    let res = Resources::load(&cfg)?;
    match cmd {
        Command::Ingest {
            input,
            out,
            name,
            lenient,
        } => {
            let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
            let mut g = load_graph(&input, mode, &res.normalizer).with_context(|| format!("reading {}", input.display()))?;
            if let Some(n) = name {
                g = KnowledgeGraph::from_records(&n, g.to_records(), &res.normalizer)?;
            }
            write_graph(&out, &g)?;
            println!(
                "{}: {} entity types, {} properties, {} entities",
                g.name(),
                g.etypes().len(),
                g.properties().len(),
                g.entities().len()
            );
        }
        Command::Formalize { graph: path, scope, out } => {
            let scope: Scope = scope.parse()?;
            let g = graph(&path, &res)?;
            let ctx = formalize(&g, scope);
            write_file(&out, &export_context_string(&ctx))?;
            println!("{} concepts x {} properties", ctx.concepts().len(), ctx.properties().len());
        }
        Command::MatchProps { graphs: gp, tau, out } => {
            if let Some(t) = tau {
                cfg.set("match.tau", &t.to_string())?;
            }
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let pm = pipeline::property_alignments(&a, &b, &cfg, &res);
            write_file(&out, &alignments_to_string(&pm.to_alignments()))?;
            println!("{} property alignments", pm.len());
        }
        Command::Pairs {
            graphs: gp,
            kind,
            props: pm_path,
            out,
            pruned,
        } => {
            let kind: PairKind = kind.parse()?;
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let pm = match (&pm_path, kind) {
                (Some(p), _) => props(p)?,
                (None, PairKind::EtypeEtype) => AlignedPropertyPairs::default(),
                (None, PairKind::EtypeEntity) => return Err(anyhow!("--props is required for etype-entity pairs")),
            };
            let (kept, dropped) = pipeline::candidate_pairs(&a, &b, kind, &pm, &cfg, &res)?;
            write_file(&out, &pairs_to_string(&kept))?;
            if let Some(p) = pruned {
                write_file(&p, &pairs_to_string(&dropped))?;
            }
            println!("{} pairs kept, {} pruned", kept.len(), dropped.len());
        }
        Command::Simtable {
            graphs: gp,
            pairs: pairs_path,
            props: pm_path,
            raw,
            out,
        } => {
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let list = pairs(&pairs_path)?;
            let table = pipeline::similarity_table(&a, &b, &list, &props(&pm_path)?, &cfg, raw)?;
            write_file(&out, &table.to_csv_string())?;
            println!("{} rows", table.rows().len());
        }
        Command::Train {
            graphs: gp,
            pairs: pairs_path,
            sims: sims_path,
            gold,
            model_kind,
            seed,
            features_out,
            out,
        } => {
            if let Some(k) = model_kind {
                cfg.set("recognizer.model", &k)?;
            }
            if let Some(s) = seed {
                cfg.set("run.seed", &s.to_string())?;
            }
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let list = pairs(&pairs_path)?;
            let gold = pipeline::gold_set(&alignments(&gold)?);
            let data = pipeline::build_dataset(&a, &b, &list, &sims(&sims_path)?, &res, Some(&gold))?;
            if let Some(p) = features_out {
                write_file(&p, &data.to_csv_string())?;
            }
            let model = pipeline::train_model(&data, &cfg)?;
            write_file(&out, &model.to_json())?;
            let positives = data.y.as_ref().map_or(0, |y| y.iter().filter(|v| **v).count());
            println!("trained {} on {} rows ({positives} positive)", cfg.model.as_str(), data.len());
        }
        Command::Recognize {
            graphs: gp,
            pairs: pairs_path,
            sims: sims_path,
            model,
            cutoff,
            one_to_one,
            gold,
            eval_out,
            out,
        } => {
            if eval_out.is_some() && gold.is_none() {
                return Err(anyhow!("--eval-out needs --gold"));
            }
            let cutoff = cutoff.unwrap_or(cfg.cutoff);
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let list = pairs(&pairs_path)?;
            let model = TrainedModel::load(&model).with_context(|| format!("loading model {}", model.display()))?;
            let data = pipeline::build_dataset(&a, &b, &list, &sims(&sims_path)?, &res, None)?;
            let mut accepted = pipeline::recognize(&model, &data, cutoff)?;
            if one_to_one {
                accepted = pipeline::one_to_one(&accepted);
            }
            write_file(&out, &alignments_to_string(&accepted))?;
            println!("{} of {} pairs accepted", accepted.len(), list.len());
            if let Some(g) = gold {
                let gold = alignments(&g)?;
                let report =
                    pipeline::evaluate_alignments(&accepted, &gold, pipeline::cross_product_size(&a, &b, list.kind));
                println!(
                    "precision {:.4} recall {:.4} F1 {:.4}",
                    report.precision, report.recall, report.f_1
                );
                if let Some(p) = eval_out {
                    write_file(&p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
                }
            }
        }
        Command::Extend {
            graphs: gp,
            etype_alignments,
            props: pm_path,
            instances,
            sims: sims_path,
            model,
            conflict,
            subclass,
            keep_unaligned,
            out,
            report,
            report_csv,
        } => {
            if let Some(c) = conflict {
                cfg.set("extend.conflict", &c)?;
            }
            if let Some(s) = subclass {
                cfg.set("extend.subclass", &s)?;
            }
            if keep_unaligned {
                cfg.set("extend.keep_unaligned", "true")?;
            }
            if let Some(m) = model {
                cfg.paths.instance_model = Some(m);
            }
            let (a, b) = graphs(&gp, &cfg, &res)?;
            let table = sims_path.as_deref().map(sims).transpose()?;
            let model = pipeline::instance_model(&cfg)?;
            let recognition = match &instances {
                Some(p) => Recognition::Decisions(decisions_from_alignments(&alignments(p)?, table.as_ref())),
                None => Recognition::Model {
                    model: &model,
                    cutoff: cfg.cutoff,
                    propsim: cfg.propsim,
                },
            };
            let plan = ExtensionPlan {
                etype_alignments: ExtensionPlan::etype_pairs(&alignments(&etype_alignments)?)?,
                properties: props(&pm_path)?,
                recognition,
                options: cfg.extend,
            };
            let (ext, rep) = pipeline::extend_graphs(&a, &b, &plan, &cfg, &res)?;
            write_graph(&out, &ext)?;
            if let Some(p) = report {
                write_file(&p, &rep.to_json())?;
            }
            if let Some(p) = report_csv {
                write_file(&p, &rep.to_csv_string())?;
            }
            println!(
                "added {} entity types, {} properties, {} entities; discarded {} entities",
                rep.etypes_added, rep.properties_added, rep.entities_added, rep.entities_discarded
            );
        }
        Command::Assess {
            graphs: paths,
            query,
            lotus,
            lotus_out,
            out,
            csv,
        } => {
            if query.is_some() {
                cfg.query = query;
            }
            let loaded: Vec<KnowledgeGraph> = paths.iter().map(|p| graph(p, &res)).collect::<Result<_>>()?;
            let names = display_names(&loaded, &paths);
            let refs: Vec<&KnowledgeGraph> = loaded.iter().collect();
            let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let q = match &cfg.query {
                Some(text) => Query::parse(text, &res.normalizer),
                None => pipeline::query_for(&cfg, refs[refs.len() - 1], &res),
            };
            let report = pipeline::assess_named(&refs, &name_refs, &q, &cfg, &res)?;
            write_file(&out, &report.to_json())?;
            if let Some(p) = csv {
                write_file(&p, &report.to_csv_string())?;
            }
            if let Some(p) = lotus_out {
                let ids: Vec<&str> = lotus.iter().map(String::as_str).collect();
                let cells = lotus_stats(&lotus_sets_by_etype(refs[0], &ids)?)?;
                write_file(&p, &(serde_json::to_string_pretty(&cells)? + "\n"))?;
            }
            for g in &report.graphs {
                println!(
                    "{}: Cue_k {:.4} Focus_k {:.4} Balance {:.4} CMM {:.4} DEM {:.4}",
                    g.graph, g.cue_k, g.focus_k, g.balance, g.cmm, g.dem
                );
            }
        }
        Command::Report { dir } => {
            let (json, md) = pipeline::build_report(&dir).with_context(|| format!("reading {}", dir.display()))?;
            write_file(&dir.join("report.json"), &json)?;
            write_file(&dir.join("report.md"), &md)?;
            println!("wrote {}", dir.join("report.md").display());
        }
        Command::Run { out } => {
            if let Some(o) = out {
                cfg.paths.output = Some(o);
            }
            let summary = pipeline::run(&cfg)?;
            info!("{summary:?}");
            let dir = cfg.paths.output.clone().unwrap_or_else(|| PathBuf::from("."));
            println!(
                "{} etype alignments; added {} entity types, {} properties, {} entities ({})",
                summary.etype_alignments,
                summary.etypes_added,
                summary.properties_added,
                summary.entities_added,
                dir.display()
            );
        }
    }
    Ok(())
}

/// Graph names for the assessment rows; file stems stand in when names repeat.
fn display_names(graphs: &[KnowledgeGraph], paths: &[PathBuf]) -> Vec<String> {
    let names: Vec<String> = graphs.iter().map(|g| g.name().to_string()).collect();
    let unique: std::collections::BTreeSet<&String> = names.iter().collect();
    if unique.len() == names.len() {
        return names;
    }
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| match p.file_stem().and_then(|s| s.to_str()) {
            Some(s) => s.to_string(),
            None => format!("graph{i}"),
        })
        .collect()
}
