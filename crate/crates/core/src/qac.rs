//! Query autocomplete engine.
//!
//! Three completion sources (entity titles, log queries, synthetic queries)
//! are indexed as sorted prefix structures. Each source contributes its top-K
//! prefix matches by `(v, s, text)`, where `v` is the prefix score and `s`
//! the source's global score; a transparent linear re-ranker then selects
//! the final top-N. For synthetic queries the global score is
//! `median_popularity(A) * ln(|A| + 1)`, with `A` the set of entities the
//! query was generated from.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, EntityId, QueryLogRecord};
use crate::qgen::SyntheticQuery;
use crate::textproc::normalize_query;

const QAC_FORMAT_VERSION: u32 = 1;

/// Where a completion came from. Each indexed completion belongs to exactly
/// one source.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CompletionSource {
    EntityTitles,
    LogQueries,
    SyntheticQueries,
}

impl CompletionSource {
    pub const ALL: [CompletionSource; 3] =
        [Self::EntityTitles, Self::LogQueries, Self::SyntheticQueries];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EntityTitles => "entity_titles",
            Self::LogQueries => "log_queries",
            Self::SyntheticQueries => "synthetic_queries",
        }
    }
}

/// An indexed completion with its global score and the statistics behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionEntry {
    pub text: String,
    pub source: CompletionSource,
    pub global_score: f64,
    pub associated_entity_count: usize,
    pub median_popularity: f64,
}

/// A completion candidate for a concrete prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionCandidate {
    pub entry: CompletionEntry,
    pub prefix_score: f64,
    pub rerank_score: f64,
}

/// Re-ranker weights: `rerank_score = v_weight * v + s_weight * ln(1 + s)
/// + source_prior(source)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankWeights {
    pub v: f64,
    pub s: f64,
    pub source_prior: SourcePriors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePriors {
    pub entity_titles: f64,
    pub log_queries: f64,
    pub synthetic_queries: f64,
}

impl SourcePriors {
    pub fn get(&self, source: CompletionSource) -> f64 {
        match source {
            CompletionSource::EntityTitles => self.entity_titles,
            CompletionSource::LogQueries => self.log_queries,
            CompletionSource::SyntheticQueries => self.synthetic_queries,
        }
    }
}

impl Default for RerankWeights {
    fn default() -> Self {
        Self {
            v: 1.0,
            s: 0.3,
            source_prior: SourcePriors {
                entity_titles: 0.0,
                log_queries: 0.0,
                synthetic_queries: 0.1,
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum QacError {
    #[error("query \"{query}\" references unknown entity \"{entity_id}\"")]
    UnresolvedEntity { query: String, entity_id: EntityId },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("completion index file error: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported completion index format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
}

/// Broadness of a completion: natural log of the associated-entity count
/// plus one. Zero entities means zero broadness.
pub fn broadness(entity_count: usize) -> f64 {
    ((entity_count + 1) as f64).ln()
}

fn median(values: &mut Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Global score of a synthetic query: median popularity of its source
/// entities times broadness. Every source entity must resolve in the
/// catalog.
pub fn global_score(query: &SyntheticQuery, catalog: &Catalog) -> Result<f64, QacError> {
    let mut popularities = Vec::with_capacity(query.source_entity_ids.len());
    for id in &query.source_entity_ids {
        let entity = catalog.get(id).ok_or_else(|| QacError::UnresolvedEntity {
            query: query.text.clone(),
            entity_id: id.clone(),
        })?;
        popularities.push(entity.popularity);
    }
    Ok(median(&mut popularities) * broadness(query.source_entity_ids.len()))
}

/// Prefix matching score in [0, 1]: zero unless the normalized completion
/// starts with the normalized prefix, else the ratio of normalized character
/// lengths. The empty prefix matches everything with score `1/len`,
/// clipped into (0, 1].
pub fn prefix_score(prefix: &str, completion: &str) -> f64 {
    let prefix = normalize_query(prefix);
    let completion = normalize_query(completion);
    if !completion.starts_with(&prefix) {
        return 0.0;
    }
    let completion_len = completion.chars().count();
    if completion_len == 0 {
        // both empty
        return 1.0;
    }
    if prefix.is_empty() {
        return (1.0 / completion_len as f64).min(1.0);
    }
    prefix.chars().count() as f64 / completion_len as f64
}

/// Candidates grouped per source, as produced by [`QacIndex::top_k_per_source`].
pub type PerSourceCandidates = BTreeMap<CompletionSource, Vec<CompletionCandidate>>;

/// Immutable per-source prefix index. Entry texts are stored in normalized
/// form and are unique within a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QacIndex {
    version: u32,
    /// per source: entries sorted by text
    sources: BTreeMap<CompletionSource, Vec<CompletionEntry>>,
}

impl QacIndex {
    /// Build the completion index from the available sources.
    ///
    /// - entity titles: one completion per distinct normalized title;
    ///   `A` is the set of entities sharing the title.
    /// - log queries: one completion per distinct query text; the global
    ///   score is the summed record weight (a frequency proxy) and `A` the
    ///   set of distinct target entities.
    /// - synthetic queries: global score per `median_popularity * broadness`.
    pub fn build(
        catalog: &Catalog,
        log_records: &[QueryLogRecord],
        synthetic_queries: &[SyntheticQuery],
    ) -> Result<Self, QacError> {
        let mut sources = BTreeMap::new();

        // entity titles
        let mut by_title: BTreeMap<String, Vec<&EntityId>> = BTreeMap::new();
        for entity in catalog.iter() {
            let title = normalize_query(&entity.title);
            if !title.is_empty() {
                by_title.entry(title).or_default().push(&entity.id);
            }
        }
        let mut title_entries = Vec::with_capacity(by_title.len());
        for (text, ids) in by_title {
            let mut pops: Vec<f64> = ids
                .iter()
                .map(|id| catalog.get(id).expect("ids came from catalog").popularity)
                .collect();
            let med = median(&mut pops);
            let max = pops.iter().copied().fold(0.0_f64, f64::max);
            title_entries.push(CompletionEntry {
                text,
                source: CompletionSource::EntityTitles,
                global_score: max,
                associated_entity_count: ids.len(),
                median_popularity: med,
            });
        }
        sources.insert(CompletionSource::EntityTitles, title_entries);

        // log queries
        let mut by_query: BTreeMap<String, (f64, std::collections::BTreeSet<&EntityId>)> =
            BTreeMap::new();
        for record in log_records {
            let text = normalize_query(&record.query_text);
            if text.is_empty() {
                continue;
            }
            let slot = by_query.entry(text).or_default();
            slot.0 += record.weight;
            slot.1.insert(&record.target_entity_id);
        }
        let mut log_entries = Vec::with_capacity(by_query.len());
        for (text, (weight_sum, targets)) in by_query {
            let mut pops: Vec<f64> = targets
                .iter()
                .filter_map(|id| catalog.get(id).map(|e| e.popularity))
                .collect();
            log_entries.push(CompletionEntry {
                text,
                source: CompletionSource::LogQueries,
                global_score: weight_sum,
                associated_entity_count: targets.len(),
                median_popularity: median(&mut pops),
            });
        }
        sources.insert(CompletionSource::LogQueries, log_entries);

        // synthetic queries
        let mut synthetic_entries = Vec::with_capacity(synthetic_queries.len());
        for query in synthetic_queries {
            let text = normalize_query(&query.text);
            if text.is_empty() {
                continue;
            }
            let mut pops = Vec::with_capacity(query.source_entity_ids.len());
            for id in &query.source_entity_ids {
                let entity = catalog.get(id).ok_or_else(|| QacError::UnresolvedEntity {
                    query: query.text.clone(),
                    entity_id: id.clone(),
                })?;
                pops.push(entity.popularity);
            }
            let med = median(&mut pops);
            synthetic_entries.push(CompletionEntry {
                global_score: med * broadness(query.source_entity_ids.len()),
                text,
                source: CompletionSource::SyntheticQueries,
                associated_entity_count: query.source_entity_ids.len(),
                median_popularity: med,
            });
        }
        synthetic_entries.sort_by(|a, b| a.text.cmp(&b.text));
        synthetic_entries.dedup_by(|a, b| a.text == b.text);
        sources.insert(CompletionSource::SyntheticQueries, synthetic_entries);

        Ok(Self {
            version: QAC_FORMAT_VERSION,
            sources,
        })
    }

    pub fn source_len(&self, source: CompletionSource) -> usize {
        self.sources.get(&source).map_or(0, Vec::len)
    }

    pub fn entries(&self, source: CompletionSource) -> &[CompletionEntry] {
        self.sources.get(&source).map_or(&[], Vec::as_slice)
    }

    /// All entries of one source whose normalized text starts with the
    /// normalized prefix, via binary search over the sorted texts.
    fn prefix_range(&self, source: CompletionSource, prefix: &str) -> &[CompletionEntry] {
        let Some(entries) = self.sources.get(&source) else {
            return &[];
        };
        let start = entries.partition_point(|e| e.text.as_str() < prefix);
        let mut end = start;
        while end < entries.len() && entries[end].text.starts_with(prefix) {
            end += 1;
        }
        &entries[start..end]
    }

    /// Per-source top-K prefix matches ordered by `(v desc, s desc, text asc)`.
    pub fn top_k_per_source(&self, prefix: &str, k: usize) -> PerSourceCandidates {
        let prefix = normalize_query(prefix);
        let mut out = PerSourceCandidates::new();
        for source in CompletionSource::ALL {
            let mut candidates: Vec<CompletionCandidate> = self
                .prefix_range(source, &prefix)
                .iter()
                .map(|entry| CompletionCandidate {
                    prefix_score: prefix_score(&prefix, &entry.text),
                    rerank_score: 0.0,
                    entry: entry.clone(),
                })
                .filter(|c| c.prefix_score > 0.0)
                .collect();
            candidates.sort_by(|a, b| {
                b.prefix_score
                    .total_cmp(&a.prefix_score)
                    .then(b.entry.global_score.total_cmp(&a.entry.global_score))
                    .then(a.entry.text.cmp(&b.entry.text))
            });
            candidates.truncate(k);
            out.insert(source, candidates);
        }
        out
    }

    /// Full suggestion pipeline: per-source top-K, merge, re-rank to top-N.
    /// Every returned candidate has a positive prefix score.
    pub fn suggest(
        &self,
        prefix: &str,
        k: usize,
        n: usize,
        weights: &RerankWeights,
    ) -> Vec<CompletionCandidate> {
        let per_source = self.top_k_per_source(prefix, k);
        let merged: Vec<CompletionCandidate> =
            per_source.into_values().flatten().collect();
        rerank(merged, n, weights)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), QacError> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut writer, self)?;
        use std::io::Write;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, QacError> {
        let file = std::fs::File::open(path)?;
        let index: Self = serde_json::from_reader(std::io::BufReader::new(file))?;
        if index.version != QAC_FORMAT_VERSION {
            return Err(QacError::Version {
                found: index.version,
                expected: QAC_FORMAT_VERSION,
            });
        }
        Ok(index)
    }
}

/// Score and select the top-N of a merged candidate list. Duplicate texts
/// across sources collapse to the copy with the highest rerank score; final
/// order is rerank score descending, text ascending.
pub fn rerank(
    candidates: Vec<CompletionCandidate>,
    n: usize,
    weights: &RerankWeights,
) -> Vec<CompletionCandidate> {
    let mut scored: Vec<CompletionCandidate> = candidates
        .into_iter()
        .map(|mut candidate| {
            candidate.rerank_score = weights.v * candidate.prefix_score
                + weights.s * (1.0 + candidate.entry.global_score).ln()
                + weights.source_prior.get(candidate.entry.source);
            candidate
        })
        .collect();
    // collapse duplicate texts first (keeping the max-scored copy), then
    // order by score
    scored.sort_by(|a, b| {
        a.entry
            .text
            .cmp(&b.entry.text)
            .then(b.rerank_score.total_cmp(&a.rerank_score))
    });
    scored.dedup_by(|later, kept| later.entry.text == kept.entry.text);
    scored.sort_by(|a, b| {
        b.rerank_score
            .total_cmp(&a.rerank_score)
            .then(a.entry.text.cmp(&b.entry.text))
    });
    scored.truncate(n);
    scored
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Entity, EntityType};
    use crate::qgen::{DescriptorType, Provenance};

    fn entity(id: &str, popularity: f64) -> Entity {
        Entity {
            id: EntityId::new(id),
            entity_type: EntityType::Audiobook,
            title: format!("Title {id}"),
            authors: vec![],
            description: String::new(),
            genres: vec![],
            popularity,
        }
    }

    fn catalog_with(pops: &[(&str, f64)]) -> Catalog {
        let mut catalog = Catalog::new();
        for (id, pop) in pops {
            catalog.insert(entity(id, *pop)).unwrap();
        }
        catalog
    }

    fn synthetic(text: &str, sources: &[&str]) -> SyntheticQuery {
        SyntheticQuery {
            text: text.to_string(),
            dtype: DescriptorType::Query,
            source_entity_ids: sources.iter().map(|s| EntityId::new(*s)).collect(),
            provenance: Provenance::Template,
        }
    }

    #[test]
    fn broadness_values() {
        assert_eq!(broadness(0), 0.0);
        assert!((broadness(9) - 2.302585092994046).abs() < 1e-12);
        // strictly increasing, broad beats specific
        let broad = broadness(40);
        let specific = broadness(1);
        assert!(broad > specific);
    }

    #[test]
    fn global_score_odd_median() {
        let catalog = catalog_with(&[("a1", 10.0), ("a2", 20.0), ("a3", 30.0)]);
        let q = synthetic("history audiobooks", &["a1", "a2", "a3"]);
        let score = global_score(&q, &catalog).unwrap();
        assert!((score - 20.0 * 4.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn global_score_even_median() {
        let catalog = catalog_with(&[("a1", 10.0), ("a2", 20.0)]);
        let q = synthetic("history audiobooks", &["a1", "a2"]);
        let score = global_score(&q, &catalog).unwrap();
        assert!((score - 15.0 * 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn global_score_unresolved_entity() {
        let catalog = catalog_with(&[("a1", 10.0)]);
        let q = synthetic("x audiobooks", &["a1", "zz"]);
        assert!(matches!(
            global_score(&q, &catalog),
            Err(QacError::UnresolvedEntity { .. })
        ));
    }

    #[test]
    fn prefix_score_cases() {
        let v = prefix_score("audiob", "audiobooks for children");
        assert!((v - 6.0 / 23.0).abs() < 1e-12);
        assert_eq!(prefix_score("xyz", "audiobooks about love"), 0.0);
        assert_eq!(prefix_score("same text", "same text"), 1.0);
        // empty prefix matches everything with a small positive score
        let empty = prefix_score("", "abcd");
        assert!(empty > 0.0 && (empty - 0.25).abs() < 1e-12);
    }

    fn demo_index() -> QacIndex {
        let catalog = catalog_with(&[("a1", 5.0), ("a2", 7.0), ("a3", 3.0)]);
        let log = vec![QueryLogRecord {
            query_text: "garden stories".to_string(),
            target_entity_id: EntityId::new("a1"),
            weight: 1.0,
        }];
        let synth = vec![
            synthetic("audiobooks for children", &["a1"]),
            synthetic("audiobooks about love", &["a2"]),
            synthetic("audiobooks in french", &["a3"]),
        ];
        QacIndex::build(&catalog, &log, &synth).unwrap()
    }

    #[test]
    fn suggest_returns_worked_example_completions() {
        let index = demo_index();
        let hits = index.suggest("audiob", 10, 3, &RerankWeights::default());
        let texts: Vec<&str> = hits.iter().map(|c| c.entry.text.as_str()).collect();
        assert_eq!(hits.len(), 3);
        for expected in [
            "audiobooks for children",
            "audiobooks about love",
            "audiobooks in french",
        ] {
            assert!(texts.contains(&expected), "missing {expected}: {texts:?}");
        }
        assert!(hits.iter().all(|c| c.prefix_score > 0.0));
    }

    #[test]
    fn suggest_on_empty_index_is_empty() {
        let index = QacIndex::build(&Catalog::new(), &[], &[]).unwrap();
        assert!(index
            .suggest("a", 10, 5, &RerankWeights::default())
            .is_empty());
    }

    #[test]
    fn suggest_n1_returns_argmax() {
        let index = demo_index();
        let all = index.suggest("audiob", 10, 10, &RerankWeights::default());
        let one = index.suggest("audiob", 10, 1, &RerankWeights::default());
        assert_eq!(one.len(), 1);
        assert_eq!(one[0], all[0]);
    }

    #[test]
    fn top_k_respects_prefix_and_k() {
        let index = demo_index();
        let per_source = index.top_k_per_source("audiobooks for", 5);
        assert_eq!(per_source[&CompletionSource::SyntheticQueries].len(), 1);
        assert!(per_source[&CompletionSource::EntityTitles].is_empty());
        let none = index.top_k_per_source("zzz", 5);
        assert!(none.values().all(Vec::is_empty));
    }

    #[test]
    fn top_k_selects_highest_global_scores() {
        let catalog = catalog_with(&[
            ("a1", 1.0),
            ("a2", 2.0),
            ("a3", 3.0),
            ("a4", 4.0),
            ("a5", 5.0),
        ]);
        // distinct texts ending in the counter, same prefix; s grows with pop
        let synth: Vec<SyntheticQuery> = (1..=5)
            .map(|i| synthetic(&format!("query number {i} audiobooks"), &[&format!("a{i}")]))
            .collect();
        let index = QacIndex::build(&catalog, &[], &synth).unwrap();
        // identical v (same length texts) so ordering falls to s
        let top = index.top_k_per_source("query number", 3);
        let texts: Vec<&str> = top[&CompletionSource::SyntheticQueries]
            .iter()
            .map(|c| c.entry.text.as_str())
            .collect();
        assert_eq!(
            texts,
            vec![
                "query number 5 audiobooks",
                "query number 4 audiobooks",
                "query number 3 audiobooks"
            ]
        );
    }

    #[test]
    fn rerank_is_monotone_in_prefix_score() {
        let base = CompletionEntry {
            text: "a".to_string(),
            source: CompletionSource::SyntheticQueries,
            global_score: 1.0,
            associated_entity_count: 1,
            median_popularity: 1.0,
        };
        let mk = |text: &str, v: f64| CompletionCandidate {
            entry: CompletionEntry {
                text: text.to_string(),
                ..base.clone()
            },
            prefix_score: v,
            rerank_score: 0.0,
        };
        let weights = RerankWeights {
            v: 1.0,
            s: 0.0,
            source_prior: SourcePriors {
                entity_titles: 0.0,
                log_queries: 0.0,
                synthetic_queries: 0.0,
            },
        };
        let out = rerank(vec![mk("half", 0.5), mk("full", 1.0)], 2, &weights);
        assert_eq!(out[0].entry.text, "full");
    }

    #[test]
    fn rerank_with_only_s_weight_orders_by_global_score() {
        let mk = |text: &str, s: f64| CompletionCandidate {
            entry: CompletionEntry {
                text: text.to_string(),
                source: CompletionSource::LogQueries,
                global_score: s,
                associated_entity_count: 1,
                median_popularity: 1.0,
            },
            prefix_score: 0.9,
            rerank_score: 0.0,
        };
        let weights = RerankWeights {
            v: 0.0,
            s: 1.0,
            source_prior: SourcePriors {
                entity_titles: 0.0,
                log_queries: 0.0,
                synthetic_queries: 0.0,
            },
        };
        let out = rerank(vec![mk("low", 1.0), mk("high", 9.0), mk("mid", 4.0)], 3, &weights);
        let texts: Vec<&str> = out.iter().map(|c| c.entry.text.as_str()).collect();
        assert_eq!(texts, vec!["high", "mid", "low"]);
    }

    #[test]
    fn rerank_collapses_duplicate_texts_keeping_max() {
        let mk = |source: CompletionSource, prior_boost: f64| CompletionCandidate {
            entry: CompletionEntry {
                text: "same".to_string(),
                source,
                global_score: prior_boost,
                associated_entity_count: 1,
                median_popularity: 1.0,
            },
            prefix_score: 1.0,
            rerank_score: 0.0,
        };
        let out = rerank(
            vec![
                mk(CompletionSource::LogQueries, 0.0),
                mk(CompletionSource::SyntheticQueries, 100.0),
            ],
            5,
            &RerankWeights::default(),
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].entry.source, CompletionSource::SyntheticQueries);
    }

    #[test]
    fn index_round_trip() {
        let index = demo_index();
        let file = tempfile::NamedTempFile::new().unwrap();
        index.save(file.path()).unwrap();
        let loaded = QacIndex::load(file.path()).unwrap();
        assert_eq!(index, loaded);
    }
}
