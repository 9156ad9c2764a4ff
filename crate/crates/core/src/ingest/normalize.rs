//! Label normalization: segmentation, lowercasing, suffix stripping and
//! stop-word removal.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::Result;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// A set of lowercase stop-words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn empty() -> Self {
        StopwordList {
            words: BTreeSet::new(),
        }
    }

    /// Parse one token per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordList { words }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopwordList {
    /// The list shipped in `data/stopwords.txt`.
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

/// Turns raw labels into normalized token lists.
#[derive(Debug, Clone)]
pub struct Normalizer {
    pub stopwords: StopwordList,
    /// Disable to keep plural suffixes untouched.
    pub lemmatize: bool,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new(StopwordList::default())
    }
}

impl Normalizer {
    pub fn new(stopwords: StopwordList) -> Self {
        Normalizer {
            stopwords,
            lemmatize: true,
        }
    }

    pub fn without_lemmatization(stopwords: StopwordList) -> Self {
        Normalizer {
            stopwords,
            lemmatize: false,
        }
    }

    pub fn normalize(&self, raw: &str) -> Vec<String> {
        normalize_label(raw, &self.stopwords, self.lemmatize)
    }

    /// Normalized tokens joined by single spaces.
    pub fn joined(&self, raw: &str) -> String {
        self.normalize(raw).join(" ")
    }
}

/// Split on capital letters, `_`, `-` and whitespace, lowercase, strip plural
/// suffixes and drop stop-words. When every token is dropped the whole label
/// survives as a single lowercase token with its separators removed.
pub fn normalize_label(raw: &str, stopwords: &StopwordList, lemmatize: bool) -> Vec<String> {
    let stem = |t: &str| {
        if lemmatize {
            strip_plural(t)
        } else {
            t.to_string()
        }
    };
    let tokens: Vec<String> = segment(raw)
        .into_iter()
        .filter_map(|t| {
            if stopwords.contains(&t) {
                return None;
            }
            let s = stem(&t);
            if s.is_empty() || stopwords.contains(&s) {
                None
            } else {
                Some(s)
            }
        })
        .collect();
    if tokens.is_empty() {
        let whole: String = raw
            .to_lowercase()
            .chars()
            .filter(|c| !(*c == '_' || *c == '-' || c.is_whitespace()))
            .collect();
        vec![stem(&whole)]
    } else {
        tokens
    }
}

fn segment(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in raw.chars() {
        if ch == '_' || ch == '-' || ch.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if ch.is_uppercase() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            cur.extend(ch.to_lowercase());
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Suffix table: `-ies` -> `y`, `-es` after sibilants, plain `-s`. Applied to
/// a fixpoint so the result is stable under re-normalization.
pub fn strip_plural(token: &str) -> String {
    let mut cur = token.to_string();
    loop {
        let next = strip_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn strip_once(t: &str) -> String {
    let n = t.chars().count();
    if n > 4 && t.ends_with("ies") {
        return format!("{}y", &t[..t.len() - 3]);
    }
    if n > 4 && t.ends_with("es") {
        let stem = &t[..t.len() - 2];
        if stem.ends_with('s')
            || stem.ends_with('x')
            || stem.ends_with('z')
            || stem.ends_with("ch")
            || stem.ends_with("sh")
        {
            return stem.to_string();
        }
    }
    if n > 3
        && t.ends_with('s')
        && !t.ends_with("ss")
        && !t.ends_with("us")
        && !t.ends_with("is")
    {
        return t[..t.len() - 1].to_string();
    }
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sw(words: &[&str]) -> StopwordList {
        StopwordList::from_words(words.iter().copied())
    }

    #[test]
    fn camel_case_with_stopword_prefix() {
        let n = Normalizer::new(sw(&["has"]));
        assert_eq!(n.normalize("hasAcademyAward"), vec!["academy", "award"]);
    }

    #[test]
    fn single_word() {
        let n = Normalizer::new(sw(&[]));
        assert_eq!(n.normalize("name"), vec!["name"]);
    }

    #[test]
    fn all_stopwords_fall_back_to_lowercase_label() {
        let n = Normalizer::new(sw(&["the", "of"]));
        assert_eq!(n.normalize("TheOf"), vec!["theof"]);
    }

    #[test]
    fn separators() {
        let n = Normalizer::new(sw(&["of"]));
        assert_eq!(
            n.normalize("date_of-birth  Place"),
            vec!["date", "birth", "place"]
        );
    }

    #[test]
    fn plural_suffixes() {
        assert_eq!(strip_plural("authors"), "author");
        assert_eq!(strip_plural("boxes"), "box");
        assert_eq!(strip_plural("parties"), "party");
        assert_eq!(strip_plural("address"), "address");
        assert_eq!(strip_plural("status"), "status");
        assert_eq!(strip_plural("has"), "has");
    }

    #[test]
    fn default_list_contains_has() {
        let d = StopwordList::default();
        assert!(d.contains("has"));
        assert!(d.contains("the"));
        assert!(!d.contains("name"));
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(raw in "[A-Za-z_ -]{0,24}") {
            let n = Normalizer::new(StopwordList::default());
            let once = n.normalize(&raw);
            let twice = n.normalize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn deterministic(raw in "\\PC{0,16}") {
            let n = Normalizer::default();
            prop_assert_eq!(n.normalize(&raw), n.normalize(&raw));
        }
    }
}
