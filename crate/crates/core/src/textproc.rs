//! Shared text analysis.
//!
//! A single [`Analyzer`] instance is used by the index builder, the query
//! path, the autocomplete engine, and the judge rules, so token-level
//! operations agree exactly across all of them.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Stop tokens used by the judge rules when deciding whether a query token
/// carries content. These are not applied by the analyzer itself.
pub const STOP_TOKENS: &[&str] = &[
    "a", "an", "and", "about", "at", "by", "for", "from", "in", "of", "on", "or", "the", "to",
    "with",
];

/// Ordered lowercase tokens produced by [`Analyzer::analyze`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_vec(self) -> Vec<String> {
        self.tokens
    }

    /// Tokens joined with single spaces.
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

impl IntoIterator for TokenStream {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.into_iter()
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Analyzer settings as they appear in the toolkit config file.
///
/// `stopwords` points at a newline-separated word file; `None` disables
/// stopword removal. Both knobs are off by default.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalyzerConfig {
    #[serde(default)]
    pub stemming: bool,
    #[serde(default)]
    pub stopwords: Option<String>,
}

/// Resolved analyzer: lowercase + split on every non-alphanumeric character,
/// with optional stopword removal and optional Porter-family stemming.
///
/// The stopword list is resolved at construction time and serialized inline,
/// so a persisted index re-analyzes queries identically without access to the
/// original stopword file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Analyzer {
    stemming: bool,
    stopwords: Option<BTreeSet<String>>,
}

impl Analyzer {
    /// Resolve an [`AnalyzerConfig`], loading the stopword file if configured.
    pub fn from_config(config: &AnalyzerConfig) -> std::io::Result<Self> {
        let stopwords = match &config.stopwords {
            Some(path) => Some(load_wordlist(Path::new(path))?),
            None => None,
        };
        Ok(Self {
            stemming: config.stemming,
            stopwords,
        })
    }

    pub fn with_stemming(mut self, stemming: bool) -> Self {
        self.stemming = stemming;
        self
    }

    pub fn with_stopwords(mut self, stopwords: BTreeSet<String>) -> Self {
        self.stopwords = Some(stopwords);
        self
    }

    /// Unicode-aware lowercasing, split on every non-alphanumeric character.
    /// Deterministic; empty input yields an empty stream.
    pub fn analyze(&self, text: &str) -> TokenStream {
        let stemmer = self
            .stemming
            .then(|| rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::English));
        let tokens = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|s| !s.is_empty())
            .map(|s| s.to_lowercase())
            .filter(|t| match &self.stopwords {
                Some(stop) => !stop.contains(t),
                None => true,
            })
            .map(|t| match &stemmer {
                Some(st) => st.stem(&t).into_owned(),
                None => t,
            })
            .collect();
        TokenStream::new(tokens)
    }
}

/// Canonical query form: lowercase, internal whitespace runs collapsed to a
/// single space, ends trimmed. Idempotent.
pub fn normalize_query(text: &str) -> String {
    text.split_whitespace()
        .map(|s| s.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Load a newline-separated word file, lowercasing and skipping blank lines
/// and `#` comments.
pub fn load_wordlist(path: &Path) -> std::io::Result<BTreeSet<String>> {
    let raw = std::fs::read_to_string(path)?;
    Ok(parse_wordlist(&raw))
}

/// Parse wordlist file contents; used for both stopword files and the
/// judge's shipped wordlist.
pub fn parse_wordlist(raw: &str) -> BTreeSet<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn analyze_splits_and_lowercases() {
        let a = Analyzer::default();
        assert_eq!(
            a.analyze("Self-Help Audiobooks for Spiritual Growth")
                .as_slice(),
            ["self", "help", "audiobooks", "for", "spiritual", "growth"]
        );
    }

    #[test]
    fn analyze_empty_is_empty() {
        let a = Analyzer::default();
        assert!(a.analyze("").is_empty());
    }

    #[test]
    fn analyze_handles_unicode_punctuation() {
        // em dash and doubled spaces are both separator runs
        let a = Analyzer::default();
        assert_eq!(
            a.analyze("JRR—Tolkien  First").as_slice(),
            ["jrr", "tolkien", "first"]
        );
    }

    #[test]
    fn analyze_with_stopwords() {
        let a = Analyzer::default()
            .with_stopwords(["for".to_string(), "the".to_string()].into_iter().collect());
        assert_eq!(a.analyze("for the Win").as_slice(), ["win"]);
    }

    #[test]
    fn analyze_with_stemming() {
        let a = Analyzer::default().with_stemming(true);
        assert_eq!(a.analyze("running stories").as_slice(), ["run", "stori"]);
    }

    #[test]
    fn normalize_collapses_whitespace() {
        assert_eq!(
            normalize_query("  Ancient   HISTORY audiobooks "),
            "ancient history audiobooks"
        );
        assert_eq!(normalize_query("a"), "a");
        assert_eq!(normalize_query("Enemies   to  Lovers"), "enemies to lovers");
    }

    #[test]
    fn wordlist_parsing_skips_comments() {
        let set = parse_wordlist("# header\nAlpha\n\nbeta\n");
        assert!(set.contains("alpha") && set.contains("beta"));
        assert_eq!(set.len(), 2);
    }

    proptest! {
        #[test]
        fn analyze_idempotent_on_join(text in ".{0,120}") {
            let a = Analyzer::default();
            let once = a.analyze(&text);
            let twice = a.analyze(&once.join());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn analyze_never_emits_uppercase(text in ".{0,120}") {
            let a = Analyzer::default();
            for tok in &a.analyze(&text) {
                prop_assert!(!tok.chars().any(|c| c.is_uppercase()));
            }
        }

        #[test]
        fn normalize_idempotent(text in ".{0,120}") {
            let once = normalize_query(&text);
            prop_assert_eq!(normalize_query(&once), once);
        }
    }
}
