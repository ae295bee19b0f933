//! BM25 inverted index with optional document augmentation.
//!
//! Documents are flat field concatenations in the layout
//! `"title - author - description - genres"`, optionally extended with
//! `" - descriptors - synthetic queries"` from a generation record.
//! Scoring uses the Lucene-style non-negative IDF variant:
//! `IDF(t) = ln(1 + (N - df + 0.5) / (df + 0.5))`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Entity, EntityId, EntityType};
use crate::qgen::GenerationRecord;
use crate::textproc::Analyzer;

const INDEX_FORMAT_VERSION: u32 = 1;

/// BM25 free parameters. Defaults follow common practice (k1=1.2, b=0.75)
/// and are config-exposed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// One indexable document: the flat text for an entity plus its analyzed
/// length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: EntityId,
    pub entity_type: EntityType,
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("augmentation record for \"{record_id}\" does not match entity \"{entity_id}\"")]
    AugmentationMismatch {
        entity_id: EntityId,
        record_id: EntityId,
    },
    #[error("duplicate doc_id \"{0}\"")]
    DuplicateDocId(EntityId),
    #[error("unknown doc_id \"{0}\"")]
    UnknownDocId(EntityId),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("index file error: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported index format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
}

/// Build the flat document text for an entity. With an augmentation record,
/// descriptor texts (taxonomy order) and query texts are appended as two
/// extra segments. The ` - ` separator carries no ranking weight; the
/// analyzer strips it.
pub fn build_document(
    entity: &Entity,
    augmentation: Option<&GenerationRecord>,
    analyzer: &Analyzer,
) -> Result<Document, RetrievalError> {
    if let Some(record) = augmentation {
        if record.entity_id != entity.id {
            return Err(RetrievalError::AugmentationMismatch {
                entity_id: entity.id.clone(),
                record_id: record.entity_id.clone(),
            });
        }
    }

    let mut text = format!(
        "{} - {} - {} - {}",
        entity.title,
        entity.authors.join(" "),
        entity.description,
        entity.genres.join(" "),
    );
    if let Some(record) = augmentation {
        let descriptors: Vec<&str> = record.descriptor_texts().collect();
        let queries: Vec<&str> = record.query_texts().collect();
        text.push_str(&format!(
            " - {} - {}",
            descriptors.join(" "),
            queries.join(" ")
        ));
    }

    let token_count = analyzer.analyze(&text).len();
    Ok(Document {
        doc_id: entity.id.clone(),
        entity_type: entity.entity_type,
        text,
        token_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEntry {
    pub id: EntityId,
    pub entity_type: EntityType,
    pub length: u32,
}

/// A single ranked result. Hits are sorted by score descending with ties
/// broken by doc_id ascending; ranks are contiguous from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: EntityId,
    pub entity_type: EntityType,
    pub score: f64,
    pub rank: u32,
}

/// Immutable BM25 inverted index. Documents are stored in doc_id order so
/// that internal indices, tie-breaking, and serialization are all canonical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    version: u32,
    params: Bm25Params,
    analyzer: Analyzer,
    docs: Vec<DocEntry>,
    postings: BTreeMap<String, Vec<Posting>>,
    total_len: u64,
}

impl InvertedIndex {
    /// Build an index over the given documents. Document ids must be unique;
    /// empty documents are allowed.
    pub fn build(
        documents: &[Document],
        params: Bm25Params,
        analyzer: Analyzer,
    ) -> Result<Self, RetrievalError> {
        let mut sorted: Vec<&Document> = documents.iter().collect();
        sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        for pair in sorted.windows(2) {
            if pair[0].doc_id == pair[1].doc_id {
                return Err(RetrievalError::DuplicateDocId(pair[0].doc_id.clone()));
            }
        }

        let mut docs = Vec::with_capacity(sorted.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut total_len: u64 = 0;
        for (idx, document) in sorted.iter().enumerate() {
            let tokens = analyzer.analyze(&document.text);
            let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
            for token in &tokens {
                *tf.entry(token.as_str()).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term.to_string()).or_default().push(Posting {
                    doc: idx as u32,
                    tf: count,
                });
            }
            docs.push(DocEntry {
                id: document.doc_id.clone(),
                entity_type: document.entity_type,
                length: tokens.len() as u32,
            });
            total_len += tokens.len() as u64;
        }

        Ok(Self {
            version: INDEX_FORMAT_VERSION,
            params,
            analyzer,
            docs,
            postings,
            total_len,
        })
    }

    /// Number of indexed documents.
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Mean analyzed document length; 0 for an empty index.
    pub fn avgdl(&self) -> f64 {
        if self.docs.is_empty() {
            0.0
        } else {
            self.total_len as f64 / self.docs.len() as f64
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn doc_entries(&self) -> impl Iterator<Item = &DocEntry> {
        self.docs.iter()
    }

    pub fn doc_length(&self, doc_id: &EntityId) -> Option<u32> {
        self.doc_index(doc_id).map(|i| self.docs[i].length)
    }

    /// Document frequency of a term.
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Term frequency of `term` in `doc_id`; 0 when absent.
    pub fn term_frequency(&self, term: &str, doc_id: &EntityId) -> u32 {
        let Some(idx) = self.doc_index(doc_id) else {
            return 0;
        };
        self.postings
            .get(term)
            .and_then(|p| p.iter().find(|posting| posting.doc as usize == idx))
            .map_or(0, |posting| posting.tf)
    }

    /// Distinct indexed terms.
    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    fn doc_index(&self, doc_id: &EntityId) -> Option<usize> {
        self.docs.binary_search_by(|d| d.id.cmp(doc_id)).ok()
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.docs.len() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_contribution(&self, df: usize, tf: u32, doc_len: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let avgdl = self.avgdl();
        let norm = if avgdl > 0.0 {
            doc_len as f64 / avgdl
        } else {
            0.0
        };
        let tf = tf as f64;
        self.idf(df) * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm))
    }

    /// BM25 score of a tokenized query against one document. Repeated query
    /// tokens contribute once per occurrence.
    pub fn bm25_score(
        &self,
        query_tokens: &[String],
        doc_id: &EntityId,
    ) -> Result<f64, RetrievalError> {
        let idx = self
            .doc_index(doc_id)
            .ok_or_else(|| RetrievalError::UnknownDocId(doc_id.clone()))?;
        let doc_len = self.docs[idx].length;
        let mut score = 0.0;
        for token in query_tokens {
            let Some(postings) = self.postings.get(token) else {
                continue;
            };
            let Ok(pos) = postings.binary_search_by(|p| (p.doc as usize).cmp(&idx)) else {
                continue;
            };
            score += self.term_contribution(postings.len(), postings[pos].tf, doc_len);
        }
        Ok(score)
    }

    /// Top-k matching documents with score > 0, per the [`SearchHit`]
    /// ordering invariants. Fewer than k hits are returned when fewer match.
    pub fn search(&self, query: &str, k: usize) -> Vec<SearchHit> {
        let tokens = self.analyzer.analyze(query);
        if tokens.is_empty() || self.docs.is_empty() || k == 0 {
            return Vec::new();
        }

        let mut scores: HashMap<u32, f64> = HashMap::new();
        for token in &tokens {
            let Some(postings) = self.postings.get(token) else {
                continue;
            };
            let df = postings.len();
            for posting in postings {
                let doc_len = self.docs[posting.doc as usize].length;
                *scores.entry(posting.doc).or_insert(0.0) +=
                    self.term_contribution(df, posting.tf, doc_len);
            }
        }

        let mut matched: Vec<(u32, f64)> = scores
            .into_iter()
            .filter(|(_, score)| *score > 0.0)
            .collect();
        // score desc, then doc_id asc; docs are stored in id order so the
        // internal index order is the id order
        matched.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        matched.truncate(k);

        matched
            .into_iter()
            .enumerate()
            .map(|(i, (doc, score))| {
                let entry = &self.docs[doc as usize];
                SearchHit {
                    doc_id: entry.id.clone(),
                    entity_type: entry.entity_type,
                    score,
                    rank: (i + 1) as u32,
                }
            })
            .collect()
    }

    /// Persist as versioned JSON. The layout is canonical (sorted maps, docs
    /// in id order), so identical indexes serialize to identical bytes.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RetrievalError> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        serde_json::to_writer(&mut writer, self)?;
        use std::io::Write;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        let file = std::fs::File::open(path)?;
        let index: Self = serde_json::from_reader(std::io::BufReader::new(file))?;
        if index.version != INDEX_FORMAT_VERSION {
            return Err(RetrievalError::Version {
                found: index.version,
                expected: INDEX_FORMAT_VERSION,
            });
        }
        Ok(index)
    }
}
