//! Deterministic template generation.
//!
//! The offline counterpart of the LLM path: descriptors come from entity
//! metadata plus fixed keyword lexicons, queries are templated from genre
//! and theme descriptors with the "audiobooks" suffix, and compound queries
//! pair authors with genres. Output is a pure function of the entity and the
//! shipped lexicon files.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{DescriptorType, GenerationRecord, Provenance, QgenError, SyntheticQuery};
use crate::catalog::{Entity, EntityType};
use crate::textproc::{normalize_query, parse_wordlist, Analyzer};

const THEME_LEXICON: &str = include_str!("../../data/lexicons/theme.txt");
const MOOD_LEXICON: &str = include_str!("../../data/lexicons/mood.txt");
const SETTING_LEXICON: &str = include_str!("../../data/lexicons/setting.txt");
const TROPE_LEXICON: &str = include_str!("../../data/lexicons/trope.txt");

/// Keyword lists mapping description tokens to descriptor types. Theme and
/// mood entries are single words; setting and trope entries may be phrases
/// matched against the analyzed token sequence.
#[derive(Debug, Clone)]
pub struct Lexicons {
    themes: BTreeSet<String>,
    moods: BTreeSet<String>,
    setting_phrases: Vec<Vec<String>>,
    trope_phrases: Vec<Vec<String>>,
}

impl Lexicons {
    /// The lexicon files shipped with the crate.
    pub fn shipped() -> Self {
        let analyzer = Analyzer::default();
        let phrases = |raw: &str| -> Vec<Vec<String>> {
            let mut entries: Vec<Vec<String>> = parse_wordlist(raw)
                .into_iter()
                .map(|p| analyzer.analyze(&p).into_vec())
                .filter(|p| !p.is_empty())
                .collect();
            entries.sort();
            entries.dedup();
            entries
        };
        Self {
            themes: parse_wordlist(THEME_LEXICON),
            moods: parse_wordlist(MOOD_LEXICON),
            setting_phrases: phrases(SETTING_LEXICON),
            trope_phrases: phrases(TROPE_LEXICON),
        }
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::shipped()
    }
}

/// Single-word lexicon matches over the token sequence, first occurrence
/// order, deduplicated.
fn match_words(tokens: &[String], lexicon: &BTreeSet<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    tokens
        .iter()
        .filter(|t| lexicon.contains(*t) && seen.insert((*t).clone()))
        .cloned()
        .collect()
}

/// Phrase matches over the token sequence: at each position, phrases are
/// tried in sorted order; each phrase is reported once.
fn match_phrases(tokens: &[String], phrases: &[Vec<String>]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for start in 0..tokens.len() {
        for phrase in phrases {
            if start + phrase.len() <= tokens.len()
                && tokens[start..start + phrase.len()] == phrase[..]
            {
                let text = phrase.join(" ");
                if seen.insert(text.clone()) {
                    out.push(text);
                }
            }
        }
    }
    out
}

/// Runs of two or more capitalized words in the raw description text.
fn capitalized_spans(description: &str) -> Vec<String> {
    let analyzer = Analyzer::default();
    let mut spans = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for word in description.split_whitespace() {
        let capitalized = word
            .chars()
            .find(|c| c.is_alphabetic())
            .is_some_and(|c| c.is_uppercase());
        if capitalized {
            current.push(word);
        } else {
            if current.len() >= 2 {
                spans.push(analyzer.analyze(&current.join(" ")).join());
            }
            current.clear();
        }
    }
    if current.len() >= 2 {
        spans.push(analyzer.analyze(&current.join(" ")).join());
    }
    let mut seen = HashSet::new();
    spans.retain(|s| !s.is_empty() && seen.insert(s.clone()));
    spans
}

/// Generate descriptors and queries for an audiobook from its metadata and
/// the keyword lexicons. Fails on non-audiobook entities.
pub fn generate_template(entity: &Entity, lexicons: &Lexicons) -> Result<GenerationRecord, QgenError> {
    if entity.entity_type != EntityType::Audiobook {
        return Err(QgenError::NotAnAudiobook {
            id: entity.id.clone(),
        });
    }

    let analyzer = Analyzer::default();
    let description_tokens = analyzer.analyze(&entity.description).into_vec();

    let genres: Vec<String> = {
        let mut seen = HashSet::new();
        entity
            .genres
            .iter()
            .map(|g| normalize_query(g))
            .filter(|g| !g.is_empty() && seen.insert(g.clone()))
            .collect()
    };
    let themes = match_words(&description_tokens, &lexicons.themes);
    let moods = match_words(&description_tokens, &lexicons.moods);
    let settings = match_phrases(&description_tokens, &lexicons.setting_phrases);
    let tropes = match_phrases(&description_tokens, &lexicons.trope_phrases);
    let named_entities = capitalized_spans(&entity.description);

    let mut descriptors = BTreeMap::new();
    let mut put = |dtype: DescriptorType, values: Vec<String>| {
        if !values.is_empty() {
            descriptors.insert(dtype, values);
        }
    };
    put(DescriptorType::Genre, genres.clone());
    put(DescriptorType::Theme, themes.clone());
    put(DescriptorType::Mood, moods);
    put(DescriptorType::Setting, settings);
    put(DescriptorType::StoryTrope, tropes);
    put(DescriptorType::NamedEntity, named_entities);

    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    let mut push_query = |text: String, dtype: DescriptorType| {
        let text = normalize_query(&text);
        if !text.is_empty() && seen.insert(text.clone()) {
            queries.push(SyntheticQuery {
                text,
                dtype,
                source_entity_ids: [entity.id.clone()].into_iter().collect(),
                provenance: Provenance::Template,
            });
        }
    };

    for descriptor in genres.iter().chain(themes.iter()) {
        push_query(format!("{descriptor} audiobooks"), DescriptorType::Query);
    }
    for author in &entity.authors {
        let author = normalize_query(author);
        if author.is_empty() {
            continue;
        }
        for genre in &genres {
            push_query(
                format!("{author} {genre} audiobooks"),
                DescriptorType::CompoundQuery,
            );
        }
    }

    Ok(GenerationRecord {
        entity_id: entity.id.clone(),
        descriptors,
        queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::EntityId;

    fn audiobook(
        id: &str,
        title: &str,
        authors: &[&str],
        description: &str,
        genres: &[&str],
    ) -> Entity {
        Entity {
            id: EntityId::new(id),
            entity_type: EntityType::Audiobook,
            title: title.to_string(),
            authors: authors.iter().map(|s| s.to_string()).collect(),
            description: description.to_string(),
            genres: genres.iter().map(|s| s.to_string()).collect(),
            popularity: 1.0,
        }
    }

    #[test]
    fn genre_yields_suffixed_query() {
        let entity = audiobook("a1", "T", &[], "", &["juvenile fiction"]);
        let record = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert!(record
            .queries
            .iter()
            .any(|q| q.text == "juvenile fiction audiobooks" && q.dtype == DescriptorType::Query));
    }

    #[test]
    fn author_and_genre_yield_compound_query() {
        let entity = audiobook("a1", "T", &["Stephen King"], "", &["supernatural fiction"]);
        let record = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert!(record.queries.iter().any(|q| {
            q.text == "stephen king supernatural fiction audiobooks"
                && q.dtype == DescriptorType::CompoundQuery
        }));
    }

    #[test]
    fn bare_entity_yields_no_queries() {
        let entity = audiobook("a1", "T", &[], "", &[]);
        let record = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert!(record.queries.is_empty());
    }

    #[test]
    fn non_audiobook_is_rejected() {
        let mut entity = audiobook("p1", "T", &[], "", &[]);
        entity.entity_type = EntityType::Playlist;
        assert!(matches!(
            generate_template(&entity, &Lexicons::shipped()),
            Err(QgenError::NotAnAudiobook { .. })
        ));
    }

    #[test]
    fn description_keywords_become_descriptors() {
        let entity = audiobook(
            "a1",
            "T",
            &["Ada Archer"],
            "A gripping story of faith and growth. Set in Ancient Rome, \
             it follows an enemies to lovers arc.",
            &["historical fiction"],
        );
        let record = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert_eq!(
            record.descriptors[&DescriptorType::Theme],
            vec!["faith", "growth"]
        );
        assert_eq!(record.descriptors[&DescriptorType::Mood], vec!["gripping"]);
        assert_eq!(
            record.descriptors[&DescriptorType::Setting],
            vec!["ancient rome"]
        );
        assert_eq!(
            record.descriptors[&DescriptorType::StoryTrope],
            vec!["enemies to lovers"]
        );
        assert_eq!(
            record.descriptors[&DescriptorType::NamedEntity],
            vec!["ancient rome"]
        );
        // theme queries exist alongside the genre query
        assert!(record.queries.iter().any(|q| q.text == "faith audiobooks"));
        assert!(record
            .queries
            .iter()
            .any(|q| q.text == "historical fiction audiobooks"));
    }

    #[test]
    fn generation_is_deterministic_and_deduplicated() {
        let entity = audiobook(
            "a1",
            "T",
            &["Ada Archer", "Ada Archer"],
            "love and love again",
            &["romance", "Romance"],
        );
        let a = generate_template(&entity, &Lexicons::shipped()).unwrap();
        let b = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert_eq!(a, b);
        let texts: Vec<_> = a.queries.iter().map(|q| q.text.clone()).collect();
        let mut dedup = texts.clone();
        dedup.dedup();
        assert_eq!(texts, dedup);
        assert_eq!(
            a.descriptors[&DescriptorType::Genre],
            vec!["romance".to_string()]
        );
    }

    #[test]
    fn every_query_ends_with_audiobooks_and_sources_contain_entity() {
        let entity = audiobook(
            "a9",
            "T",
            &["Iris Holt"],
            "A cozy mystery of friendship.",
            &["true crime", "psychology"],
        );
        let record = generate_template(&entity, &Lexicons::shipped()).unwrap();
        assert!(!record.queries.is_empty());
        for q in &record.queries {
            assert!(q.text.ends_with("audiobooks"), "query: {}", q.text);
            assert!(q.source_entity_ids.contains(&EntityId::new("a9")));
            assert_eq!(q.provenance, Provenance::Template);
        }
    }
}
