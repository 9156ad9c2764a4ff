//! Run configuration: flat `key = value` text.
//!
//! ```text
//! # comment
//! run.seed = 7
//! [propsim]
//! lambda = 0.5        # same as propsim.lambda
//! ```
//!
//! A `[section]` line prefixes the keys that follow it; `[]` clears the
//! prefix. Values may be wrapped in double quotes. Relative paths are resolved
//! against the directory of the config file. Unknown keys are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assess::AssessParams;
use crate::error::{KgError, Result};
use crate::extend::{ConflictPolicy, ExtendOptions, SubclassPolicy};
use crate::matcher::MatchParams;
use crate::propsim::{EntropyMode, PropsimParams, Theta};
use crate::recognizer::{GbtParams, LogregParams, ModelParams, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    Logreg,
    Tree,
    #[default]
    Gbt,
}

impl std::str::FromStr for ModelKind {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" => Ok(ModelKind::Logreg),
            "tree" => Ok(ModelKind::Tree),
            "gbt" => Ok(ModelKind::Gbt),
            _ => Err(KgError::InvalidInput(format!("unknown model kind `{s}`"))),
        }
    }
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Tree => "tree",
            ModelKind::Gbt => "gbt",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub reference: Option<PathBuf>,
    pub candidate: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    /// Reference-to-candidate etype alignments; used when no schema model is given.
    pub etype_alignments: Option<PathBuf>,
    pub schema_model: Option<PathBuf>,
    /// Instance model; the built-in always-accept model when absent.
    pub instance_model: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub paths: Paths,
    pub propsim: PropsimParams,
    pub matching: MatchParams,
    pub ps_threshold: f64,
    pub cutoff: f64,
    pub model: ModelKind,
    /// Positive:negative ratio to balance training data to; none leaves it as is.
    pub balance_ratio: Option<f64>,
    pub logreg: LogregParams,
    pub tree: TreeParams,
    pub gbt: GbtParams,
    pub assess: AssessParams,
    /// Comma-separated query terms for the rankers.
    pub query: Option<String>,
    pub extend: ExtendOptions,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            propsim: PropsimParams::default(),
            matching: MatchParams::default(),
            ps_threshold: 0.3,
            cutoff: 0.5,
            model: ModelKind::default(),
            balance_ratio: None,
            logreg: LogregParams::default(),
            tree: TreeParams::default(),
            gbt: GbtParams::default(),
            assess: AssessParams::default(),
            query: None,
            extend: ExtendOptions::default(),
            seed: 42,
            threads: 1,
        }
    }
}

/// Every accepted key, in the order `to_text` writes them.
pub const KEYS: [&str; 42] = [
    "paths.reference",
    "paths.candidate",
    "paths.stopwords",
    "paths.embeddings",
    "paths.taxonomy",
    "paths.etype_alignments",
    "paths.schema_model",
    "paths.instance_model",
    "paths.output",
    "propsim.lambda",
    "propsim.theta",
    "propsim.entropy_mode",
    "match.tau",
    "match.many_to_many",
    "prune.ps_threshold",
    "recognizer.cutoff",
    "recognizer.model",
    "recognizer.balance_ratio",
    "logreg.lr",
    "logreg.epochs",
    "logreg.l2",
    "tree.max_depth",
    "tree.min_leaf",
    "gbt.rounds",
    "gbt.depth",
    "gbt.shrinkage",
    "gbt.lambda",
    "gbt.min_leaf",
    "assess.eta",
    "assess.mu",
    "assess.alpha",
    "assess.beta",
    "assess.w",
    "assess.bm25_m",
    "assess.bm25_b",
    "assess.query",
    "extend.conflict",
    "extend.subclass",
    "extend.keep_unaligned",
    "run.seed",
    "run.threads",
    "run.version",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| KgError::config(key, format!("cannot parse `{v}`")))
}

fn real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if !x.is_finite() {
        return Err(KgError::config(key, "must be finite"));
    }
    Ok(x)
}

fn unit(key: &str, v: &str) -> Result<f64> {
    let x = real(key, v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(KgError::config(key, format!("{x} is not in [0,1]")));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = real(key, v)?;
    if x <= 0.0 {
        return Err(KgError::config(key, format!("{x} must be > 0")));
    }
    Ok(x)
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(KgError::config(key, format!("expected true or false, got `{v}`"))),
    }
}

fn parsed<T: std::str::FromStr<Err = KgError>>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|e: KgError| KgError::config(key, e))
}

impl RunConfig {
    /// Set one key. Paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || Some(PathBuf::from(v));
        match key {
            "paths.reference" => self.paths.reference = path(),
            "paths.candidate" => self.paths.candidate = path(),
            "paths.stopwords" => self.paths.stopwords = path(),
            "paths.embeddings" => self.paths.embeddings = path(),
            "paths.taxonomy" => self.paths.taxonomy = path(),
            "paths.etype_alignments" => self.paths.etype_alignments = path(),
            "paths.schema_model" => self.paths.schema_model = path(),
            "paths.instance_model" => self.paths.instance_model = path(),
            "paths.output" => self.paths.output = path(),
            "propsim.lambda" => self.propsim.lambda = positive(key, v)?,
            "propsim.theta" => {
                self.propsim.theta = if v == "auto" { Theta::Auto } else { Theta::Fixed(positive(key, v)?) }
            }
            "propsim.entropy_mode" => self.propsim.entropy_mode = parsed::<EntropyMode>(key, v)?,
            "match.tau" => self.matching.tau = unit(key, v)?,
            "match.many_to_many" => self.matching.many_to_many = boolean(key, v)?,
            "prune.ps_threshold" => self.ps_threshold = real(key, v)?,
            "recognizer.cutoff" => self.cutoff = unit(key, v)?,
            "recognizer.model" => self.model = parsed(key, v)?,
            "recognizer.balance_ratio" => {
                self.balance_ratio = if v == "none" { None } else { Some(positive(key, v)?) }
            }
            "logreg.lr" => self.logreg.lr = positive(key, v)?,
            "logreg.epochs" => self.logreg.epochs = num(key, v)?,
            "logreg.l2" => self.logreg.l2 = real(key, v)?,
            "tree.max_depth" => self.tree.max_depth = num(key, v)?,
            "tree.min_leaf" => self.tree.min_leaf = num(key, v)?,
            "gbt.rounds" => self.gbt.rounds = num(key, v)?,
            "gbt.depth" => self.gbt.depth = num(key, v)?,
            "gbt.shrinkage" => self.gbt.shrinkage = unit(key, v)?,
            "gbt.lambda" => self.gbt.lambda = real(key, v)?,
            "gbt.min_leaf" => self.gbt.min_leaf = num(key, v)?,
            "assess.eta" => self.assess.eta = positive(key, v)?,
            "assess.mu" => self.assess.mu = positive(key, v)?,
            "assess.alpha" => self.assess.alpha = real(key, v)?,
            "assess.beta" => self.assess.beta = real(key, v)?,
            "assess.w" => self.assess.w = real(key, v)?,
            "assess.bm25_m" => self.assess.bm25_m = real(key, v)?,
            "assess.bm25_b" => self.assess.bm25_b = unit(key, v)?,
            "assess.query" => self.query = Some(v.to_string()),
            "extend.conflict" => self.extend.conflict = parsed::<ConflictPolicy>(key, v)?,
            "extend.subclass" => self.extend.subclass = parsed::<SubclassPolicy>(key, v)?,
            "extend.keep_unaligned" => self.extend.keep_unaligned = boolean(key, v)?,
            "run.seed" => self.seed = num(key, v)?,
            "run.threads" => {
                self.threads = num(key, v)?;
                if self.threads == 0 {
                    return Err(KgError::config(key, "must be at least 1"));
                }
            }
            "run.version" => {
                if v != "1" {
                    return Err(KgError::config(key, format!("unsupported config version `{v}`")));
                }
            }
            _ => return Err(KgError::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parse config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = inner.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(KgError::parse(n + 1, 1, format!("expected `key = value`, got `{line}`")));
            };
            let k = k.trim();
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            let mut v = v.trim();
            if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
                v = &v[1..v.len() - 1];
            }
            let v = match (key.starts_with("paths."), base) {
                (true, Some(b)) if Path::new(v).is_relative() => b.join(v).to_string_lossy().into_owned(),
                _ => v.to_string(),
            };
            cfg.set(&key, &v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// `key=value` overrides, applied in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| KgError::config(o.as_str(), "override must be `key=value`"))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn model_params(&self) -> ModelParams {
        match self.model {
            ModelKind::Logreg => ModelParams::Logreg(self.logreg),
            ModelKind::Tree => ModelParams::Tree(self.tree),
            ModelKind::Gbt => ModelParams::Gbt(self.gbt),
        }
    }

    /// Canonical text form; unset paths are omitted. Parsing it gives back an
    /// equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.paths;
        for (k, v) in [
            ("reference", &p.reference),
            ("candidate", &p.candidate),
            ("stopwords", &p.stopwords),
            ("embeddings", &p.embeddings),
            ("taxonomy", &p.taxonomy),
            ("etype_alignments", &p.etype_alignments),
            ("schema_model", &p.schema_model),
            ("instance_model", &p.instance_model),
            ("output", &p.output),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "paths.{k} = {}", v.display());
            }
        }
        let theta = match self.propsim.theta {
            Theta::Auto => "auto".to_string(),
            Theta::Fixed(t) => t.to_string(),
        };
        let mode = match self.propsim.entropy_mode {
            EntropyMode::Schema => "schema",
            EntropyMode::Instance => "instance",
        };
        let conflict = match self.extend.conflict {
            ConflictPolicy::Rename => "rename",
            ConflictPolicy::Strict => "strict",
        };
        let subclass = match self.extend.subclass {
            SubclassPolicy::Attach => "attach",
            SubclassPolicy::Flatten => "flatten",
        };
        let lines: Vec<(&str, String)> = vec![
            ("propsim.lambda", self.propsim.lambda.to_string()),
            ("propsim.theta", theta),
            ("propsim.entropy_mode", mode.into()),
            ("match.tau", self.matching.tau.to_string()),
            ("match.many_to_many", self.matching.many_to_many.to_string()),
            ("prune.ps_threshold", self.ps_threshold.to_string()),
            ("recognizer.cutoff", self.cutoff.to_string()),
            ("recognizer.model", self.model.as_str().into()),
            ("recognizer.balance_ratio", self.balance_ratio.map_or("none".into(), |r| r.to_string())),
            ("logreg.lr", self.logreg.lr.to_string()),
            ("logreg.epochs", self.logreg.epochs.to_string()),
            ("logreg.l2", self.logreg.l2.to_string()),
            ("tree.max_depth", self.tree.max_depth.to_string()),
            ("tree.min_leaf", self.tree.min_leaf.to_string()),
            ("gbt.rounds", self.gbt.rounds.to_string()),
            ("gbt.depth", self.gbt.depth.to_string()),
            ("gbt.shrinkage", self.gbt.shrinkage.to_string()),
            ("gbt.lambda", self.gbt.lambda.to_string()),
            ("gbt.min_leaf", self.gbt.min_leaf.to_string()),
            ("assess.eta", self.assess.eta.to_string()),
            ("assess.mu", self.assess.mu.to_string()),
            ("assess.alpha", self.assess.alpha.to_string()),
            ("assess.beta", self.assess.beta.to_string()),
            ("assess.w", self.assess.w.to_string()),
            ("assess.bm25_m", self.assess.bm25_m.to_string()),
            ("assess.bm25_b", self.assess.bm25_b.to_string()),
            ("extend.conflict", conflict.into()),
            ("extend.subclass", subclass.into()),
            ("extend.keep_unaligned", self.extend.keep_unaligned.to_string()),
            ("run.seed", self.seed.to_string()),
            ("run.threads", self.threads.to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        if let Some(q) = &self.query {
            let _ = writeln!(s, "assess.query = \"{q}\"");
        }
        s
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_module_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.propsim, PropsimParams::default());
        assert_eq!(c.matching, MatchParams::default());
        assert_eq!(c.ps_threshold, 0.3);
        assert_eq!(c.assess, AssessParams::default());
        assert_eq!(c.gbt, GbtParams::default());
        assert_eq!(c.extend, ExtendOptions::default());
    }

    #[test]
    fn sections_comments_and_quotes() {
        let text = "# top\nrun.seed = 7\n[propsim]\nlambda = 0.25 # inline\ntheta = 0.5\n[]\nassess.query = \"a, b # c\"\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.propsim.lambda, 0.25);
        assert_eq!(c.propsim.theta, Theta::Fixed(0.5));
        assert_eq!(c.query.as_deref(), Some("a, b # c"));
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = RunConfig::parse("[gbt]\nrounds = 3\nspeed = 9\n", None).unwrap_err();
        match err {
            KgError::Config { key, .. } => assert_eq!(key, "gbt.speed"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(RunConfig::parse("match.tau = 2\n", None), Err(KgError::Config { .. })));
    }

    #[test]
    fn relative_paths_join_base() {
        let c = RunConfig::parse("paths.reference = a.json\npaths.candidate = /x/b.json\n", Some(Path::new("/cfg"))).unwrap();
        assert_eq!(c.paths.reference.unwrap(), PathBuf::from("/cfg/a.json"));
        assert_eq!(c.paths.candidate.unwrap(), PathBuf::from("/x/b.json"));
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.apply_overrides(&["propsim.theta=0.3".into(), "recognizer.balance_ratio=0.1".into(), "assess.query=student".into()])
            .unwrap();
        c.paths.output = Some(PathBuf::from("/tmp/out"));
        assert_eq!(RunConfig::parse(&c.to_text(), None).unwrap(), c);
    }

    #[test]
    fn every_key_is_settable() {
        let text = RunConfig::default().to_text();
        let written: Vec<&str> = text.lines().filter_map(|l| l.split(" = ").next()).collect();
        for k in written {
            assert!(KEYS.contains(&k), "{k}");
        }
    }
}
