//! Word vectors in the plain text format: a `count dim` header, then
//! `token v1 .. vdim` per line. Tokens are lowercased on load.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{KgError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Ok(EmbeddingStore::default());
        };
        let nums: Vec<&str> = header.split_whitespace().collect();
        let [count, dim] = nums.as_slice() else {
            return Err(KgError::parse(1, 1, "header must be `count dim`"));
        };
        let count: usize = count.parse().map_err(|_| KgError::parse(1, 1, "bad count"))?;
        let dim: usize = dim.parse().map_err(|_| KgError::parse(1, 1, "bad dimension"))?;
        let mut vectors = BTreeMap::new();
        for (n, line) in lines {
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-blank line").to_lowercase();
            let v = parts
                .enumerate()
                .map(|(k, x)| {
                    x.parse::<f64>()
                        .ok()
                        .filter(|f| f.is_finite())
                        .ok_or_else(|| KgError::parse(n + 1, k + 2, format!("bad component `{x}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != dim {
                return Err(KgError::parse(n + 1, 1, format!("expected {dim} components, got {}", v.len())));
            }
            if vectors.insert(token.clone(), v).is_some() {
                return Err(KgError::parse(n + 1, 1, format!("duplicate token `{token}`")));
            }
        }
        if vectors.len() != count {
            return Err(KgError::parse(1, 1, format!("header says {count} vectors, file has {}", vectors.len())));
        }
        Ok(EmbeddingStore { dim, vectors })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn from_vectors<I: IntoIterator<Item = (String, Vec<f64>)>>(dim: usize, items: I) -> Result<Self> {
        let mut vectors = BTreeMap::new();
        for (t, v) in items {
            if v.len() != dim {
                return Err(KgError::InvalidInput(format!("vector for `{t}` has dimension {}", v.len())));
            }
            vectors.insert(t.to_lowercase(), v);
        }
        Ok(EmbeddingStore { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(&token.to_lowercase()).map(Vec::as_slice)
    }

    /// Mean of the known token vectors; absent when none is known.
    pub fn mean(&self, tokens: &[String]) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut known = 0usize;
        for t in tokens {
            if let Some(v) = self.get(t) {
                known += 1;
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
            }
        }
        (known > 0).then(|| sum.into_iter().map(|s| s / known as f64).collect())
    }
}

/// Cosine of the mean token vectors. Absent if either side has no known
/// token or a zero mean vector.
pub fn embedding_cos(a: &[String], b: &[String], emb: &EmbeddingStore) -> Option<f64> {
    let (va, vb) = (emb.mean(a)?, emb.mean(b)?);
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    fn store() -> EmbeddingStore {
        EmbeddingStore::parse("4 2\nx 1 0\ny 0 1\nXY 1 1\nzero 0 0\n").unwrap()
    }

    #[test]
    fn cosine_cases() {
        let e = store();
        assert_abs_diff_eq!(embedding_cos(&toks("x"), &toks("x"), &e).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(embedding_cos(&toks("x"), &toks("y"), &e), Some(0.0));
        assert_eq!(embedding_cos(&toks("x"), &toks("unknown"), &e), None);
        assert_eq!(embedding_cos(&toks("x"), &toks("zero"), &e), None);
        assert_abs_diff_eq!(embedding_cos(&toks("x y"), &toks("xy"), &e).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(embedding_cos(&toks("x ghost"), &toks("x"), &e).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn keys_are_case_folded() {
        assert!(store().get("xy").is_some());
        assert!(store().get("Xy").is_some());
    }

    #[test]
    fn malformed_files() {
        assert!(EmbeddingStore::parse("1 3\nx 1 2\n").is_err());
        assert!(EmbeddingStore::parse("2 1\nx 1\n").is_err());
        assert!(EmbeddingStore::parse("1 1\nx nan\n").is_err());
        assert!(EmbeddingStore::parse("oops\n").is_err());
        assert!(EmbeddingStore::parse("").unwrap().is_empty());
    }
}
