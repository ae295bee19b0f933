//! Synthetic descriptor and query generation.
//!
//! Two generation paths produce the same [`GenerationRecord`] shape: a
//! deterministic template engine ([`generate_template`]) and an external-LLM
//! path ([`build_prompt`] / [`parse_llm_response`]). Downstream consumers
//! never care which path produced a record.

mod prompt;
mod template;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::EntityId;

pub use prompt::{build_prompt, parse_llm_response, LlmParseOutcome, RESPONSE_LAYOUT_HINT};
pub use template::{generate_template, Lexicons};

/// Descriptor taxonomy. Variants 1-10 are descriptor types; 11-12
/// (`Query`, `CompoundQuery`) are the query types built from them.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorType {
    Genre,
    Theme,
    Character,
    Mood,
    Setting,
    PersonalSituation,
    StoryTrope,
    TargetAudience,
    Objective,
    NamedEntity,
    Query,
    CompoundQuery,
}

impl DescriptorType {
    /// The ten descriptor variants, in taxonomy order.
    pub const DESCRIPTORS: [DescriptorType; 10] = [
        Self::Genre,
        Self::Theme,
        Self::Character,
        Self::Mood,
        Self::Setting,
        Self::PersonalSituation,
        Self::StoryTrope,
        Self::TargetAudience,
        Self::Objective,
        Self::NamedEntity,
    ];

    pub fn is_query_type(&self) -> bool {
        matches!(self, Self::Query | Self::CompoundQuery)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Genre => "genre",
            Self::Theme => "theme",
            Self::Character => "character",
            Self::Mood => "mood",
            Self::Setting => "setting",
            Self::PersonalSituation => "personal_situation",
            Self::StoryTrope => "story_trope",
            Self::TargetAudience => "target_audience",
            Self::Objective => "objective",
            Self::NamedEntity => "named_entity",
            Self::Query => "query",
            Self::CompoundQuery => "compound_query",
        }
    }
}

/// How a record was produced.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Template,
    Llm,
}

/// A generated query with the set of entities it was generated from. The
/// entity set is what the autocomplete global score calls `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticQuery {
    pub text: String,
    pub dtype: DescriptorType,
    pub source_entity_ids: BTreeSet<EntityId>,
    pub provenance: Provenance,
}

impl SyntheticQuery {
    pub fn entity_count(&self) -> usize {
        self.source_entity_ids.len()
    }
}

/// Per-entity generation output: descriptors under the ten taxonomy types
/// plus the queries built from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub entity_id: EntityId,
    #[serde(default)]
    pub descriptors: BTreeMap<DescriptorType, Vec<String>>,
    #[serde(default)]
    pub queries: Vec<SyntheticQuery>,
}

impl GenerationRecord {
    /// Descriptor texts in taxonomy order, then query texts in record order.
    /// This is the stable order used for document augmentation.
    pub fn descriptor_texts(&self) -> impl Iterator<Item = &str> {
        DescriptorType::DESCRIPTORS
            .iter()
            .filter_map(|t| self.descriptors.get(t))
            .flatten()
            .map(String::as_str)
    }

    pub fn query_texts(&self) -> impl Iterator<Item = &str> {
        self.queries.iter().map(|q| q.text.as_str())
    }
}

#[derive(Debug, Error)]
pub enum QgenError {
    #[error("entity \"{id}\" is not an audiobook; template generation covers audiobooks only")]
    NotAnAudiobook { id: EntityId },
    #[error("entity \"{entity_id}\": malformed generation response: {source}")]
    ResponseParse {
        entity_id: EntityId,
        source: serde_json::Error,
    },
    #[error("entity \"{entity_id}\": empty generation (no queries or compound queries)")]
    EmptyGeneration { entity_id: EntityId },
}

/// Merge queries from many records by normalized text. Source-entity sets of
/// merged duplicates are unioned, so `|A(q)|` counts distinct source
/// entities. The input is flattened and sorted before merging, making the
/// result independent of record order.
pub fn aggregate_queries(records: &[GenerationRecord]) -> Vec<SyntheticQuery> {
    let mut flat: Vec<&SyntheticQuery> = records.iter().flat_map(|r| r.queries.iter()).collect();
    flat.sort_by(|a, b| {
        a.text
            .cmp(&b.text)
            .then(a.dtype.cmp(&b.dtype))
            .then(a.provenance.cmp(&b.provenance))
    });

    let mut merged: Vec<SyntheticQuery> = Vec::new();
    for query in flat {
        match merged.last_mut() {
            Some(last) if last.text == query.text => {
                last.source_entity_ids
                    .extend(query.source_entity_ids.iter().cloned());
            }
            _ => merged.push(query.clone()),
        }
    }
    merged
}

/// JSONL writer for the aggregated synthetic-queries table.
pub fn save_queries(
    queries: &[SyntheticQuery],
    path: impl AsRef<std::path::Path>,
) -> std::io::Result<()> {
    use std::io::Write;
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    for query in queries {
        serde_json::to_writer(&mut writer, query).map_err(std::io::Error::other)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// JSONL reader for the aggregated synthetic-queries table.
pub fn load_queries(path: impl AsRef<std::path::Path>) -> std::io::Result<Vec<SyntheticQuery>> {
    let raw = std::fs::read_to_string(path)?;
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}

/// JSONL writer for per-entity generation records.
pub fn save_records(
    records: &[GenerationRecord],
    path: impl AsRef<std::path::Path>,
) -> std::io::Result<()> {
    use std::io::Write;
    let mut writer = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut writer, record).map_err(std::io::Error::other)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

/// JSONL reader for per-entity generation records.
pub fn load_records(path: impl AsRef<std::path::Path>) -> std::io::Result<Vec<GenerationRecord>> {
    let raw = std::fs::read_to_string(path)?;
    raw.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(text: &str, sources: &[&str]) -> SyntheticQuery {
        SyntheticQuery {
            text: text.to_string(),
            dtype: DescriptorType::Query,
            source_entity_ids: sources.iter().map(|s| EntityId::new(*s)).collect(),
            provenance: Provenance::Template,
        }
    }

    fn record(entity: &str, queries: Vec<SyntheticQuery>) -> GenerationRecord {
        GenerationRecord {
            entity_id: EntityId::new(entity),
            descriptors: BTreeMap::new(),
            queries,
        }
    }

    #[test]
    fn aggregate_unions_source_sets() {
        let records = vec![
            record("a1", vec![query("history audiobooks", &["a1"])]),
            record("a2", vec![query("history audiobooks", &["a2"])]),
        ];
        let agg = aggregate_queries(&records);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].entity_count(), 2);
    }

    #[test]
    fn aggregate_empty_is_empty() {
        assert!(aggregate_queries(&[]).is_empty());
    }

    #[test]
    fn aggregate_unique_queries_pass_through() {
        let records: Vec<_> = (0..5)
            .map(|i| {
                let id = format!("a{i}");
                record(&id, vec![query(&format!("query {i} audiobooks"), &[&id])])
            })
            .collect();
        let agg = aggregate_queries(&records);
        assert_eq!(agg.len(), 5);
        assert!(agg.iter().all(|q| q.entity_count() == 1));
    }

    #[test]
    fn aggregate_is_order_independent_and_idempotent() {
        let a = record(
            "a1",
            vec![
                query("history audiobooks", &["a1"]),
                query("war audiobooks", &["a1"]),
            ],
        );
        let b = record("a2", vec![query("history audiobooks", &["a2"])]);
        let fwd = aggregate_queries(&[a.clone(), b.clone()]);
        let rev = aggregate_queries(&[b, a]);
        assert_eq!(fwd, rev);

        let again = aggregate_queries(&[record("x", fwd.clone())]);
        assert_eq!(again, fwd);
    }

    #[test]
    fn descriptor_type_serde_names() {
        assert_eq!(
            serde_json::to_string(&DescriptorType::PersonalSituation).unwrap(),
            "\"personal_situation\""
        );
        assert_eq!(
            serde_json::from_str::<DescriptorType>("\"compound_query\"").unwrap(),
            DescriptorType::CompoundQuery
        );
    }
}
