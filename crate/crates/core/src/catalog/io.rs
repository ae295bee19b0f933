//! JSONL readers and writers for catalogs and query logs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use super::{Catalog, CatalogError, Entity, EntityId, EntityType, QueryLogRecord};
use crate::textproc::normalize_query;

/// Entity line as read from disk, before entity_type validation. Keeping the
/// type a plain string lets load errors name the offending value and line.
#[derive(Deserialize)]
struct RawEntity {
    id: EntityId,
    entity_type: String,
    title: String,
    #[serde(default)]
    authors: Vec<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    genres: Vec<String>,
    #[serde(default)]
    popularity: f64,
}

fn parse_entity_type(value: &str, line: usize) -> Result<EntityType, CatalogError> {
    match value {
        "audiobook" => Ok(EntityType::Audiobook),
        "playlist" => Ok(EntityType::Playlist),
        "podcast" => Ok(EntityType::Podcast),
        other => Err(CatalogError::UnknownEntityType {
            line,
            value: other.to_string(),
        }),
    }
}

/// Load a catalog from a JSONL file: one entity object per line. Blank lines
/// are skipped; field order within a line is irrelevant.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut catalog = Catalog::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEntity = serde_json::from_str(&line)
            .map_err(|source| CatalogError::MalformedLine { line: lineno, source })?;
        let entity = Entity {
            entity_type: parse_entity_type(&raw.entity_type, lineno)?,
            id: raw.id,
            title: raw.title,
            authors: raw.authors,
            description: raw.description,
            genres: raw.genres,
            popularity: raw.popularity,
        };
        catalog.insert(entity).map_err(|e| match e {
            CatalogError::DuplicateId { id, .. } => CatalogError::DuplicateId {
                id,
                line: Some(lineno),
            },
            other => other,
        })?;
    }
    Ok(catalog)
}

/// Write a catalog as JSONL in id order. Round-trips through [`load_catalog`].
pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for entity in catalog.iter() {
        serde_json::to_writer(&mut writer, entity)
            .map_err(|e| CatalogError::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Ingestion filters for query logs. `min_query_len` drops queries shorter
/// than the given character count after normalization; off by default.
#[derive(Debug, Clone, Default)]
pub struct QueryLogOptions {
    pub min_query_len: Option<usize>,
}

/// Result of a query-log load: surviving records plus the count of lines
/// dropped because the query was empty (or too short) after normalization.
#[derive(Debug, Clone, Default)]
pub struct QueryLogLoad {
    pub records: Vec<QueryLogRecord>,
    pub dropped: usize,
}

/// Load a query log from JSONL with default options. Query texts are stored
/// in normalized form; missing weights default to 1.
pub fn load_query_log(path: impl AsRef<Path>) -> Result<QueryLogLoad, CatalogError> {
    load_query_log_with(path, &QueryLogOptions::default())
}

pub fn load_query_log_with(
    path: impl AsRef<Path>,
    options: &QueryLogOptions,
) -> Result<QueryLogLoad, CatalogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = QueryLogLoad::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: QueryLogRecord = serde_json::from_str(&line)
            .map_err(|source| CatalogError::MalformedLine { line: lineno, source })?;
        if !record.weight.is_finite() || record.weight < 0.0 {
            return Err(CatalogError::NegativeWeight {
                line: lineno,
                weight: record.weight,
            });
        }
        record.query_text = normalize_query(&record.query_text);
        let too_short = options
            .min_query_len
            .is_some_and(|min| record.query_text.chars().count() < min);
        if record.query_text.is_empty() || too_short {
            out.dropped += 1;
            continue;
        }
        out.records.push(record);
    }
    Ok(out)
}

/// Write query log records as JSONL.
pub fn save_query_log(
    records: &[QueryLogRecord],
    path: impl AsRef<Path>,
) -> Result<(), CatalogError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut writer, record)
            .map_err(|e| CatalogError::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn load_catalog_counts_valid_lines() {
        let f = write_temp(&[
            r#"{"id":"a1","entity_type":"audiobook","title":"T1","authors":["A"],"description":"d","genres":["g"],"popularity":1.0}"#,
            r#"{"id":"p1","entity_type":"playlist","title":"T2","authors":[],"description":"d","genres":[],"popularity":2.0}"#,
            r#"{"id":"s1","entity_type":"podcast","title":"T3","authors":[],"description":"d","genres":[],"popularity":3.0}"#,
        ]);
        let catalog = load_catalog(f.path()).unwrap();
        assert_eq!(catalog.len(), 3);
    }

    #[test]
    fn load_catalog_reports_duplicate_with_line() {
        let f = write_temp(&[
            r#"{"id":"a1","entity_type":"audiobook","title":"T1"}"#,
            r#"{"id":"a2","entity_type":"audiobook","title":"T2"}"#,
            r#"{"id":"a3","entity_type":"audiobook","title":"T3"}"#,
            r#"{"id":"a4","entity_type":"audiobook","title":"T4"}"#,
            r#"{"id":"a1","entity_type":"audiobook","title":"T5"}"#,
        ]);
        let err = load_catalog(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("a1") && msg.contains("line 5"), "got: {msg}");
    }

    #[test]
    fn load_catalog_rejects_unknown_entity_type() {
        let f = write_temp(&[r#"{"id":"m1","entity_type":"music","title":"T"}"#]);
        let err = load_catalog(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("unknown entity_type") && msg.contains("line 1"),
            "got: {msg}"
        );
    }

    #[test]
    fn load_catalog_reports_malformed_json_line() {
        let f = write_temp(&[
            r#"{"id":"a1","entity_type":"audiobook","title":"T"}"#,
            "not json",
        ]);
        let err = load_catalog(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "got: {err}");
    }

    #[test]
    fn query_log_defaults_weight_to_one() {
        let f = write_temp(&[r#"{"query_text":"christian","target_entity_id":"a1"}"#]);
        let loaded = load_query_log(f.path()).unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert_eq!(loaded.records[0].weight, 1.0);
        assert_eq!(loaded.records[0].query_text, "christian");
    }

    #[test]
    fn query_log_drops_empty_after_normalization() {
        let f = write_temp(&[
            r#"{"query_text":"  ","target_entity_id":"a1"}"#,
            r#"{"query_text":"growth","target_entity_id":"a2"}"#,
        ]);
        let loaded = load_query_log(f.path()).unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert_eq!(loaded.dropped, 1);
    }

    #[test]
    fn query_log_rejects_negative_weight() {
        let f = write_temp(&[r#"{"query_text":"q","target_entity_id":"a1","weight":-1.0}"#]);
        assert!(matches!(
            load_query_log(f.path()),
            Err(CatalogError::NegativeWeight { line: 1, .. })
        ));
    }

    #[test]
    fn query_log_min_len_filter() {
        let f = write_temp(&[
            r#"{"query_text":"abc","target_entity_id":"a1"}"#,
            r#"{"query_text":"abcdef","target_entity_id":"a1"}"#,
        ]);
        let loaded = load_query_log_with(
            f.path(),
            &QueryLogOptions {
                min_query_len: Some(6),
            },
        )
        .unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert_eq!(loaded.dropped, 1);
    }

    #[test]
    fn catalog_round_trip() {
        let f = write_temp(&[
            r#"{"id":"a1","entity_type":"audiobook","title":"T1","authors":["Ada Archer"],"description":"A tale.","genres":["historical fiction"],"popularity":4.5}"#,
            r#"{"id":"p1","entity_type":"playlist","title":"T2","authors":[],"description":"","genres":["pop"],"popularity":90.0}"#,
        ]);
        let catalog = load_catalog(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_catalog(&catalog, out.path()).unwrap();
        let reloaded = load_catalog(out.path()).unwrap();
        assert_eq!(catalog, reloaded);
    }
}
