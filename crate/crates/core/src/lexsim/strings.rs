//! Character-level string similarities. All work on Unicode scalar values,
//! are symmetric, and score two empty strings as 1.

use std::collections::HashMap;

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Dice coefficient over the multisets of character n-grams.
///
/// Identical strings score 1. Two different strings that both lack n-grams
/// score 0.
pub fn ngram_dice(a: &str, b: &str, n: usize) -> f64 {
    assert!(n >= 1, "n-gram size must be positive");
    if a == b {
        return 1.0;
    }
    let (ca, cb) = (chars(a), chars(b));
    let grams = |c: &[char]| -> HashMap<Vec<char>, usize> {
        let mut m = HashMap::new();
        for w in c.windows(n) {
            *m.entry(w.to_vec()).or_insert(0) += 1;
        }
        m
    };
    let (ga, gb) = (grams(&ca), grams(&cb));
    let total = ca.len().saturating_sub(n - 1) + cb.len().saturating_sub(n - 1);
    if total == 0 {
        return 0.0;
    }
    let shared: usize = ga.iter().map(|(g, k)| (*k).min(gb.get(g).copied().unwrap_or(0))).sum();
    2.0 * shared as f64 / total as f64
}

pub fn lcs_len(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// 2·|LCS| / (|a|+|b|) over longest common subsequences.
pub fn lcs_sim(a: &str, b: &str) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    if ca.is_empty() && cb.is_empty() {
        return 1.0;
    }
    2.0 * lcs_len(&ca, &cb) as f64 / (ca.len() + cb.len()) as f64
}

pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// 1 − edit distance / longer length.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    let longest = ca.len().max(cb.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&ca, &cb) as f64 / longest as f64
}

pub fn longest_common_substring(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// 2·|longest common substring| / (|a|+|b|).
pub fn substring_sim(a: &str, b: &str) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    if ca.is_empty() && cb.is_empty() {
        return 1.0;
    }
    2.0 * longest_common_substring(&ca, &cb) as f64 / (ca.len() + cb.len()) as f64
}

/// Global alignment scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NwScoring {
    pub matched: f64,
    pub mismatch: f64,
    pub gap: f64,
}

impl Default for NwScoring {
    fn default() -> Self {
        NwScoring {
            matched: 1.0,
            mismatch: -1.0,
            gap: -1.0,
        }
    }
}

pub fn needleman_wunsch_score(a: &[char], b: &[char], s: &NwScoring) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * s.gap).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * s.gap;
        for (j, y) in b.iter().enumerate() {
            let diag = prev[j] + if x == y { s.matched } else { s.mismatch };
            cur[j + 1] = diag.max(prev[j + 1] + s.gap).max(cur[j] + s.gap);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// max(0, alignment score) / (longer length · match score).
pub fn needleman_wunsch_sim_with(a: &str, b: &str, s: &NwScoring) -> f64 {
    let (ca, cb) = (chars(a), chars(b));
    let longest = ca.len().max(cb.len());
    if longest == 0 {
        return 1.0;
    }
    let score = needleman_wunsch_score(&ca, &cb, s);
    (score.max(0.0) / (longest as f64 * s.matched)).min(1.0)
}

pub fn needleman_wunsch_sim(a: &str, b: &str) -> f64 {
    needleman_wunsch_sim_with(a, b, &NwScoring::default())
}
