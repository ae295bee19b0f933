//! Synthetic-query evaluation.
//!
//! Four boolean dimensions: quality, relevancy, and broadness are judged per
//! query, diversity per audiobook's query group. The default judges are
//! deterministic rule proxies with config-exposed parameters; an external
//! LLM judge can replace the three per-query dimensions through the same
//! prompt/parse contract as generation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, Entity, EntityId};
use crate::qgen::SyntheticQuery;
use crate::textproc::{normalize_query, parse_wordlist, Analyzer, STOP_TOKENS};

const SHIPPED_WORDLIST: &str = include_str!("../data/wordlist.txt");

/// Which judge produced a verdict.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum JudgePath {
    Rules,
    Llm,
}

impl JudgePath {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rules => "rules",
            Self::Llm => "llm",
        }
    }
}

/// Per-query boolean verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub query_text: String,
    pub quality: bool,
    pub relevancy: bool,
    pub broadness: bool,
    pub path: JudgePath,
}

/// Per-audiobook redundancy verdict over its query group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityVerdict {
    pub entity_id: EntityId,
    pub diverse: bool,
}

/// Aggregated percentages. A dimension with no observations is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeSummary {
    pub quality_pct: Option<f64>,
    pub relevancy_pct: Option<f64>,
    pub broadness_pct: Option<f64>,
    pub diversity_pct: Option<f64>,
    pub query_count: usize,
    pub audiobook_count: usize,
}

/// Rule parameters; all invented proxies, all config-exposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRules {
    pub quality_min_chars: usize,
    pub quality_max_chars: usize,
    pub broadness_threshold: usize,
    pub max_jaccard: f64,
}

impl Default for JudgeRules {
    fn default() -> Self {
        Self {
            quality_min_chars: 3,
            quality_max_chars: 120,
            broadness_threshold: 2,
            max_jaccard: 0.8,
        }
    }
}

/// Vocabulary the quality rule accepts: the analyzed corpus vocabulary of a
/// catalog plus a shipped common-word list (the misspelling proxy).
#[derive(Debug, Clone)]
pub struct JudgeVocabulary {
    words: BTreeSet<String>,
}

impl JudgeVocabulary {
    pub fn from_catalog(catalog: &Catalog) -> Self {
        let analyzer = Analyzer::default();
        let mut words = parse_wordlist(SHIPPED_WORDLIST);
        for entity in catalog.iter() {
            let text = format!(
                "{} {} {} {}",
                entity.title,
                entity.authors.join(" "),
                entity.description,
                entity.genres.join(" ")
            );
            words.extend(analyzer.analyze(&text));
        }
        Self { words }
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

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("malformed judge response: {0}")]
    ResponseParse(#[from] serde_json::Error),
    #[error("judge response is missing the \"{0}\" field")]
    MissingField(&'static str),
}

/// Quality rule: complete, well-formed, and free of out-of-vocabulary tokens.
///
/// True iff the query is non-empty, within the configured length bounds,
/// has no repeated whitespace, uses only letters/digits/space/apostrophe/
/// hyphen, and every token is in the vocabulary.
pub fn judge_quality(query: &str, vocabulary: &JudgeVocabulary, rules: &JudgeRules) -> bool {
    if query.is_empty() {
        return false;
    }
    let chars = query.chars().count();
    if chars < rules.quality_min_chars || chars > rules.quality_max_chars {
        return false;
    }
    if query.contains("  ") || query != query.trim() {
        return false;
    }
    if !query
        .chars()
        .all(|c| c.is_alphanumeric() || c == ' ' || c == '\'' || c == '-')
    {
        return false;
    }
    let analyzer = Analyzer::default();
    let tokens = analyzer.analyze(query);
    !tokens.is_empty() && tokens.iter().all(|t| vocabulary.contains(t))
}

fn content_tokens(query: &str) -> Vec<String> {
    Analyzer::default()
        .analyze(query)
        .into_iter()
        .filter(|t| t != "audiobooks" && t != "audiobook" && !STOP_TOKENS.contains(&t.as_str()))
        .collect()
}

/// Relevancy rule: at least one content token of the query (suffix and stop
/// tokens excluded) appears in the entity's metadata.
pub fn judge_relevancy(query: &str, entity: &Entity) -> bool {
    let analyzer = Analyzer::default();
    let metadata: BTreeSet<String> = analyzer
        .analyze(&format!(
            "{} {} {} {}",
            entity.title,
            entity.authors.join(" "),
            entity.description,
            entity.genres.join(" ")
        ))
        .into_iter()
        .collect();
    content_tokens(query)
        .iter()
        .any(|t| metadata.contains(t))
}

/// Broadness rule: the query is broad when it is associated with at least
/// `threshold` entities, or when it avoids every (non-stop) title token of
/// its source entities — the title-specificity proxy.
pub fn judge_broadness(query: &SyntheticQuery, catalog: &Catalog, threshold: usize) -> bool {
    if query.source_entity_ids.len() >= threshold.max(1) {
        return true;
    }
    let analyzer = Analyzer::default();
    let mut title_tokens: BTreeSet<String> = BTreeSet::new();
    for id in &query.source_entity_ids {
        if let Some(entity) = catalog.get(id) {
            title_tokens.extend(
                analyzer
                    .analyze(&entity.title)
                    .into_iter()
                    .filter(|t| !STOP_TOKENS.contains(&t.as_str())),
            );
        }
    }
    !content_tokens(&query.text)
        .iter()
        .any(|t| title_tokens.contains(t))
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        // two empty token sets are identical
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Diversity rule over one audiobook's queries: true iff every pair has
/// token-set Jaccard at most `max_jaccard`.
pub fn judge_diversity(queries: &[&str], max_jaccard: f64) -> bool {
    let analyzer = Analyzer::default();
    let sets: Vec<BTreeSet<String>> = queries
        .iter()
        .map(|q| analyzer.analyze(q).into_iter().collect())
        .collect();
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            if jaccard(&sets[i], &sets[j]) > max_jaccard {
                return false;
            }
        }
    }
    true
}

fn percentage(trues: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * trues as f64 / total as f64)
}

/// Aggregate verdicts into percentages per dimension.
pub fn summarize(verdicts: &[Verdict], diversity: &[DiversityVerdict]) -> JudgeSummary {
    let n = verdicts.len();
    JudgeSummary {
        quality_pct: percentage(verdicts.iter().filter(|v| v.quality).count(), n),
        relevancy_pct: percentage(verdicts.iter().filter(|v| v.relevancy).count(), n),
        broadness_pct: percentage(verdicts.iter().filter(|v| v.broadness).count(), n),
        diversity_pct: percentage(
            diversity.iter().filter(|v| v.diverse).count(),
            diversity.len(),
        ),
        query_count: n,
        audiobook_count: diversity.len(),
    }
}

const JUDGE_INSTRUCTIONS: &str = "\
You judge synthetic search queries generated for audiobooks. For the given
query and audiobook metadata, answer three boolean questions:
- quality: is the query complete, well-formatted, and free of misspellings?
- relevancy: is the query relevant to the audiobook metadata?
- broadness: does the query refer to general topics or genres rather than one specific audiobook?

Respond with one single-line JSON object: {\"quality\": bool, \"relevancy\": bool, \"broadness\": bool}
";

/// Build the evaluation prompt for one (query, entity) pair. Byte-stable.
pub fn build_judge_prompt(query: &str, entity: &Entity) -> String {
    let metadata = serde_json::json!({
        "title": entity.title,
        "authors": entity.authors,
        "description": entity.description,
        "genres": entity.genres,
    });
    format!(
        "{JUDGE_INSTRUCTIONS}\n\
         Example 1:\nQuery: \"juvenile fiction audiobooks\"\n\
         Metadata: {{\"title\":\"The Pond\",\"authors\":[\"A. Reed\"],\"description\":\"A tale for young listeners.\",\"genres\":[\"juvenile fiction\"]}}\n\
         Output: {{\"quality\": true, \"relevancy\": true, \"broadness\": true}}\n\n\
         Example 2:\nQuery: \"the pond audiobooks\"\n\
         Metadata: {{\"title\":\"The Pond\",\"authors\":[\"A. Reed\"],\"description\":\"A tale for young listeners.\",\"genres\":[\"juvenile fiction\"]}}\n\
         Output: {{\"quality\": true, \"relevancy\": true, \"broadness\": false}}\n\n\
         Query: {}\nMetadata: {}\nOutput:",
        serde_json::json!(normalize_query(query)),
        metadata
    )
}

/// Parse a judge response into a [`Verdict`]. All three fields must be
/// present.
pub fn parse_judge_response(query_text: &str, raw: &str) -> Result<Verdict, JudgeError> {
    let value: serde_json::Value = serde_json::from_str(raw.trim())?;
    let field = |name: &'static str| -> Result<bool, JudgeError> {
        value
            .get(name)
            .and_then(serde_json::Value::as_bool)
            .ok_or(JudgeError::MissingField(name))
    };
    Ok(Verdict {
        query_text: normalize_query(query_text),
        quality: field("quality")?,
        relevancy: field("relevancy")?,
        broadness: field("broadness")?,
        path: JudgePath::Llm,
    })
}
