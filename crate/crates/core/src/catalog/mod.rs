//! Catalog data model and ingestion.
//!
//! Entities (audiobooks, playlists, podcasts), query-log records, and the
//! JSONL readers/writers for both. Also hosts the deterministic synthetic
//! corpus generators used for desk-scale experiments.

mod io;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    load_catalog, load_query_log, load_query_log_with, save_catalog, save_query_log,
    QueryLogLoad, QueryLogOptions,
};
pub use synth::{generate_synthetic_catalog, generate_synthetic_query_log, TypeCounts};

/// Opaque entity identifier, unique within a catalog.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// The three content types under study.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Audiobook,
    Playlist,
    Podcast,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [Self::Audiobook, Self::Playlist, Self::Podcast];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Audiobook => "audiobook",
            Self::Playlist => "playlist",
            Self::Podcast => "podcast",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A catalog item with the textual metadata used for indexing and generation.
///
/// `popularity` is an abstract non-negative signal (a stream-count proxy);
/// the toolkit never derives it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub entity_type: EntityType,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub genres: Vec<String>,
    #[serde(default)]
    pub popularity: f64,
}

impl Entity {
    fn validate(&self) -> Result<(), CatalogError> {
        if self.id.as_str().is_empty() {
            return Err(CatalogError::EmptyId);
        }
        if !self.popularity.is_finite() || self.popularity < 0.0 {
            return Err(CatalogError::NegativePopularity {
                id: self.id.clone(),
                popularity: self.popularity,
            });
        }
        Ok(())
    }
}

/// One search success from the logs: a query and the entity it led to.
/// `weight` is the per-query weight of the retrievability sum; it defaults
/// to 1 when absent from input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLogRecord {
    pub query_text: String,
    pub target_entity_id: EntityId,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

/// Immutable id-keyed entity collection. Duplicate ids are an ingestion
/// error; lookups after load are total over ingested records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    entities: BTreeMap<EntityId, Entity>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert an entity, rejecting duplicates and invariant violations.
    pub fn insert(&mut self, entity: Entity) -> Result<(), CatalogError> {
        entity.validate()?;
        if self.entities.contains_key(&entity.id) {
            return Err(CatalogError::DuplicateId {
                id: entity.id,
                line: None,
            });
        }
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    pub fn get(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Entities in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.keys()
    }

    pub fn count_by_type(&self, entity_type: EntityType) -> usize {
        self.iter().filter(|e| e.entity_type == entity_type).count()
    }
}

impl FromIterator<Entity> for Result<Catalog, CatalogError> {
    fn from_iter<I: IntoIterator<Item = Entity>>(iter: I) -> Self {
        let mut catalog = Catalog::new();
        for entity in iter {
            catalog.insert(entity)?;
        }
        Ok(catalog)
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed JSON: {source}")]
    MalformedLine {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: unknown entity_type \"{value}\"")]
    UnknownEntityType { line: usize, value: String },
    #[error("duplicate id \"{id}\"{}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    DuplicateId { id: EntityId, line: Option<usize> },
    #[error("entity id must be non-empty")]
    EmptyId,
    #[error("entity \"{id}\": popularity must be a finite non-negative number, got {popularity}")]
    NegativePopularity { id: EntityId, popularity: f64 },
    #[error("line {line}: query log record has negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
}

#[cfg(test)]
pub(crate) fn test_entity(id: &str, entity_type: EntityType) -> Entity {
    Entity {
        id: EntityId::new(id),
        entity_type,
        title: format!("Title {id}"),
        authors: vec![],
        description: String::new(),
        genres: vec![],
        popularity: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_rejects_duplicates() {
        let mut cat = Catalog::new();
        cat.insert(test_entity("a1", EntityType::Audiobook)).unwrap();
        let err = cat
            .insert(test_entity("a1", EntityType::Playlist))
            .unwrap_err();
        assert!(matches!(err, CatalogError::DuplicateId { .. }));
    }

    #[test]
    fn insert_rejects_negative_popularity() {
        let mut cat = Catalog::new();
        let mut e = test_entity("a1", EntityType::Audiobook);
        e.popularity = -0.5;
        assert!(matches!(
            cat.insert(e),
            Err(CatalogError::NegativePopularity { .. })
        ));
    }

    #[test]
    fn lookup_is_total_over_inserted() {
        let mut cat = Catalog::new();
        cat.insert(test_entity("a1", EntityType::Audiobook)).unwrap();
        cat.insert(test_entity("p1", EntityType::Playlist)).unwrap();
        assert!(cat.get(&EntityId::new("a1")).is_some());
        assert!(cat.get(&EntityId::new("p1")).is_some());
        assert!(cat.get(&EntityId::new("zz")).is_none());
        assert_eq!(cat.len(), 2);
    }
}
