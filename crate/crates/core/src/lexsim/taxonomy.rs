//! A term forest for Wu-Palmer similarity.
//!
//! File format: one `child<TAB>parent` pair per line, `-` as the parent of a
//! root. Parents never listed as children become roots. Keys are lowercased.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{KgError, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaxonomyStore {
    parent: BTreeMap<String, Option<String>>,
    depth: BTreeMap<String, u32>,
}

impl TaxonomyStore {
    pub fn parse(text: &str) -> Result<Self> {
        let mut parent: BTreeMap<String, Option<String>> = BTreeMap::new();
        let mut declared = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split('\t');
            let (Some(child), Some(par), None) = (it.next(), it.next(), it.next()) else {
                return Err(KgError::parse(n + 1, 1, "expected `child<TAB>parent`"));
            };
            let child = child.trim().to_lowercase();
            let par = par.trim().to_lowercase();
            if child.is_empty() || par.is_empty() {
                return Err(KgError::parse(n + 1, 1, "empty term"));
            }
            let par = (par != "-").then_some(par);
            if par.as_deref() == Some(child.as_str()) {
                return Err(KgError::Cycle(child));
            }
            if !declared.insert(child.clone()) {
                return Err(KgError::parse(n + 1, 1, format!("term `{child}` listed twice")));
            }
            if let Some(p) = &par {
                parent.entry(p.clone()).or_insert(None);
            }
            parent.insert(child, par);
        }
        let mut depth = BTreeMap::new();
        for term in parent.keys() {
            let mut chain = Vec::new();
            let mut cur = term.clone();
            let d = loop {
                if let Some(d) = depth.get(&cur) {
                    break *d;
                }
                if chain.contains(&cur) {
                    return Err(KgError::Cycle(cur));
                }
                chain.push(cur.clone());
                match &parent[&cur] {
                    Some(p) => cur = p.clone(),
                    None => break 0,
                }
            };
            for (k, t) in chain.iter().rev().enumerate() {
                depth.insert(t.clone(), d + 1 + k as u32);
            }
        }
        Ok(TaxonomyStore { parent, depth })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.depth.contains_key(&term.to_lowercase())
    }

    /// Roots have depth 1.
    pub fn depth(&self, term: &str) -> Option<u32> {
        self.depth.get(&term.to_lowercase()).copied()
    }

    fn ancestors(&self, term: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.parent.get_key_value(term).map(|(k, _)| k.as_str());
        while let Some(t) = cur {
            out.push(t);
            cur = self.parent[t].as_deref();
        }
        out
    }

    /// Deepest common ancestor, counting a term as its own ancestor.
    pub fn lca(&self, a: &str, b: &str) -> Option<String> {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        let up_b = self.ancestors(&b);
        self.ancestors(&a).into_iter().find(|t| up_b.contains(t)).map(str::to_string)
    }

    /// 2·depth(lca) / (depth(a)+depth(b)); 0 for terms in different trees,
    /// absent when either term is unknown.
    pub fn wu_palmer(&self, a: &str, b: &str) -> Option<f64> {
        let (da, db) = (self.depth(a)?, self.depth(b)?);
        let common = self.lca(a, b).map_or(0, |t| self.depth[&t]);
        Some(2.0 * common as f64 / (da + db) as f64)
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }
}

/// Best pairwise Wu-Palmer score between two token lists; absent when no
/// pair has both tokens in the taxonomy.
pub fn wu_palmer_sim(a: &[String], b: &[String], tax: &TaxonomyStore) -> Option<f64> {
    a.iter()
        .flat_map(|x| b.iter().filter_map(move |y| tax.wu_palmer(x, y)))
        .fold(None, |best: Option<f64>, s| Some(best.map_or(s, |b| b.max(s))))
}
