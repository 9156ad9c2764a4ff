use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Align, recognize, extend and assess knowledge graphs.
///
/// Exit status: 0 on success, 1 on invalid input or configuration, 2 on an
/// internal error.
#[derive(Debug, Parser)]
#[command(name = "kgext", version)]
pub struct Cli {
    /// Run configuration file (`key = value` lines, `[section]` headers).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override one config key, e.g. `--set propsim.lambda=0.25`. Repeatable;
    /// applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads for pair scoring. Output does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GraphPair {
    /// Reference graph (`.json`, `.nt` or `.ttl`); defaults to paths.reference.
    #[arg(long = "ref", value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Candidate graph; defaults to paths.candidate.
    #[arg(long = "cand", value_name = "FILE")]
    pub candidate: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read N-Triples, Turtle or interchange JSON and write interchange JSON.
    Ingest {
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Graph name; defaults to the input file stem.
        #[arg(long)]
        name: Option<String>,
        /// Skip malformed N-Triples lines instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Write the three-valued formal context of a graph as CSV.
    Formalize {
        graph: PathBuf,
        /// schema, instance or both.
        #[arg(long, default_value = "both")]
        scope: String,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Align the properties of two graphs (alignment TSV, relation `=`).
    MatchProps {
        #[command(flatten)]
        graphs: GraphPair,
        /// Acceptance threshold; overrides match.tau.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Generate and prune candidate pairs.
    Pairs {
        #[command(flatten)]
        graphs: GraphPair,
        /// etype-etype (schema) or etype-entity (instance).
        #[arg(long)]
        kind: String,
        /// Property alignments; needed to prune instance pairs.
        #[arg(long, value_name = "FILE")]
        props: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also write the pruned pairs here.
        #[arg(long, value_name = "FILE")]
        pruned: Option<PathBuf>,
    },
    /// Property-based similarities of candidate pairs.
    Simtable {
        #[command(flatten)]
        graphs: GraphPair,
        #[arg(long, value_name = "FILE")]
        pairs: PathBuf,
        #[arg(long, value_name = "FILE")]
        props: PathBuf,
        /// Skip batch normalization.
        #[arg(long)]
        raw: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Featurize labelled pairs and train a recognizer.
    Train {
        #[command(flatten)]
        graphs: GraphPair,
        #[arg(long, value_name = "FILE")]
        pairs: PathBuf,
        /// Normalized similarity table of the pairs.
        #[arg(long, value_name = "FILE")]
        sims: PathBuf,
        /// Gold alignments; listed pairs are positives.
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        /// logreg, tree or gbt; overrides recognizer.model.
        #[arg(long = "model-kind")]
        model_kind: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the (unbalanced) feature CSV.
        #[arg(long, value_name = "FILE")]
        features_out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Apply a trained recognizer to candidate pairs.
    Recognize {
        #[command(flatten)]
        graphs: GraphPair,
        #[arg(long, value_name = "FILE")]
        pairs: PathBuf,
        #[arg(long, value_name = "FILE")]
        sims: PathBuf,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Decision threshold; overrides recognizer.cutoff.
        #[arg(long)]
        cutoff: Option<f64>,
        /// Keep a one-to-one subset of accepted schema pairs.
        #[arg(long)]
        one_to_one: bool,
        /// Gold alignments to evaluate against.
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
        /// Where to write the evaluation JSON (needs --gold).
        #[arg(long, value_name = "FILE")]
        eval_out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Merge the candidate graph into the reference graph.
    Extend {
        #[command(flatten)]
        graphs: GraphPair,
        /// Etype alignments (`=`, reference on the left).
        #[arg(long, value_name = "FILE")]
        etype_alignments: PathBuf,
        /// Property alignments.
        #[arg(long, value_name = "FILE")]
        props: PathBuf,
        /// Accepted instance pairs from `recognize`; otherwise the model runs here.
        #[arg(long, value_name = "FILE")]
        instances: Option<PathBuf>,
        /// Similarity table used to break ties between accepted instance pairs.
        #[arg(long, value_name = "FILE")]
        sims: Option<PathBuf>,
        /// Instance model; defaults to paths.instance_model.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// rename or strict; overrides extend.conflict.
        #[arg(long)]
        conflict: Option<String>,
        /// attach or flatten; overrides extend.subclass.
        #[arg(long)]
        subclass: Option<String>,
        /// Keep candidate types that are neither aligned nor below an aligned type.
        #[arg(long = "keep-unaligned-etypes")]
        keep_unaligned: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Extension report JSON.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Before/after comparison CSV.
        #[arg(long, value_name = "FILE")]
        report_csv: Option<PathBuf>,
    },
    /// Quality metrics for one or more graphs.
    Assess {
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
        /// Comma-separated query terms; overrides assess.query.
        #[arg(long)]
        query: Option<String>,
        /// Knowledge lotus over these entity types of the first graph (2 to 5).
        #[arg(long, value_delimiter = ',', requires = "lotus_out")]
        lotus: Vec<String>,
        /// Where to write the lotus cells as JSON.
        #[arg(long, value_name = "FILE")]
        lotus_out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Summarize the artifacts in a directory as report.json and report.md.
    Report {
        dir: PathBuf,
    },
    /// Run the whole pipeline from the config.
    Run {
        /// Output directory; overrides paths.output.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}
