//! Deterministic synthetic corpus generation.
//!
//! Desk-scale stand-in for proprietary catalog and log data. Titles,
//! descriptions, and genres are drawn from fixed word pools with deliberate
//! vocabulary overlap across entity types, and popularity follows a
//! heavy-tailed (Pareto) distribution with audiobooks kept cold. Both
//! generators are pure functions of their seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Catalog, Entity, EntityId, EntityType, QueryLogRecord};
use crate::textproc::{Analyzer, STOP_TOKENS};

/// Number of entities to generate per type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeCounts {
    pub audiobooks: usize,
    pub playlists: usize,
    pub podcasts: usize,
}

impl TypeCounts {
    pub fn new(audiobooks: usize, playlists: usize, podcasts: usize) -> Self {
        Self {
            audiobooks,
            playlists,
            podcasts,
        }
    }

    pub fn total(&self) -> usize {
        self.audiobooks + self.playlists + self.podcasts
    }
}

/// Topic words shared across all three entity types. These overlap with the
/// theme lexicon shipped with the template generator so that descriptions
/// yield theme descriptors.
const TOPICS: &[&str] = &[
    "history", "love", "mystery", "science", "faith", "growth", "adventure", "family", "war",
    "nature", "music", "crime", "romance", "politics", "meditation", "friendship", "survival",
    "courage", "magic", "travel",
];

const AUDIOBOOK_GENRES: &[&str] = &[
    "juvenile fiction",
    "supernatural fiction",
    "historical fiction",
    "self-help",
    "biography",
    "ancient history",
    "true crime",
    "science fiction",
    "christian living",
    "romance",
    "fantasy",
    "psychology",
    "business",
    "poetry",
    "health",
];

const PLAYLIST_GENRES: &[&str] = &[
    "pop", "rock", "jazz", "classical", "electronic", "hip hop", "indie", "folk",
];

const PODCAST_GENRES: &[&str] = &[
    "society", "technology", "comedy", "news", "education", "sports", "health", "business",
];

const FIRST_NAMES: &[&str] = &[
    "Ada", "Bruno", "Clara", "David", "Elena", "Felix", "Grace", "Henry", "Iris", "Jonas",
    "Lena", "Marco", "Nora", "Oscar", "Petra",
];

const LAST_NAMES: &[&str] = &[
    "Archer", "Bennett", "Castillo", "Dunn", "Eriksen", "Fontaine", "Garza", "Holt", "Ivanov",
    "Jensen", "Keller", "Lindqvist", "Moreau", "Novak", "Okafor",
];

/// Content words for titles; kept free of stop tokens so title-derived log
/// queries stay specific.
const TITLE_NOUNS: &[&str] = &[
    "Garden", "River", "Night", "Secret", "Voyage", "Shadow", "Kingdom", "Letter", "Season",
    "Harbor", "Echo", "Crown", "Island", "Lantern", "Orchard",
];

const MOOD_WORDS: &[&str] = &[
    "adventurous",
    "dark",
    "cozy",
    "heartwarming",
    "gripping",
    "uplifting",
    "spooky",
    "whimsical",
    "grim",
    "funny",
];

/// Capitalized place/period phrases embedded in descriptions; they double as
/// named-entity spans and overlap the setting lexicon.
const SETTING_PHRASES: &[&str] = &[
    "Ancient Rome",
    "New York",
    "Old Venice",
    "Imperial China",
    "Northern Norway",
    "Victorian London",
];

const TROPE_PHRASES: &[&str] = &[
    "enemies to lovers",
    "coming of age",
    "found family",
    "forbidden love",
    "second chance",
];

const PLAYLIST_ACTIVITIES: &[&str] = &[
    "workout", "study", "focus", "sleep", "party", "commute", "cooking", "running",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

/// Pick `n` distinct items, preserving pool order.
fn pick_distinct<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str], n: usize) -> Vec<&'a str> {
    let n = n.min(pool.len());
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    while chosen.len() < n {
        let idx = rng.random_range(0..pool.len());
        if !chosen.contains(&idx) {
            chosen.push(idx);
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pool[i]).collect()
}

fn pareto(rng: &mut ChaCha8Rng, scale: f64, alpha: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let value = scale * u.powf(-1.0 / alpha);
    (value * 1000.0).round() / 1000.0
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn audiobook(rng: &mut ChaCha8Rng, index: usize) -> Entity {
    let genre_count = rng.random_range(1..=3);
    let genres: Vec<String> = pick_distinct(rng, AUDIOBOOK_GENRES, genre_count)
        .into_iter()
        .map(str::to_string)
        .collect();
    let author_count = rng.random_range(1..=2);
    let mut authors = Vec::with_capacity(author_count);
    for _ in 0..author_count {
        authors.push(format!(
            "{} {}",
            pick(rng, FIRST_NAMES),
            pick(rng, LAST_NAMES)
        ));
    }
    let topic_a = pick(rng, TOPICS);
    let topic_b = pick(rng, TOPICS);
    let topic_c = pick(rng, TOPICS);
    let title = match rng.random_range(0..3) {
        0 => format!("The {} of {}", pick(rng, TITLE_NOUNS), title_case(topic_a)),
        1 => format!("{} and {}", title_case(topic_a), title_case(topic_b)),
        _ => {
            let mood = title_case(pick(rng, MOOD_WORDS));
            format!("A {} {}", mood, pick(rng, TITLE_NOUNS))
        }
    };
    let mut description = format!(
        "A {} story of {} and {}. Set in {}, it follows a hero facing {}.",
        pick(rng, MOOD_WORDS),
        topic_a,
        topic_b,
        pick(rng, SETTING_PHRASES),
        topic_c,
    );
    if rng.random::<f64>() < 0.5 {
        description.push_str(&format!(
            " A {} tale for listeners who enjoy {}.",
            pick(rng, TROPE_PHRASES),
            topic_b,
        ));
    }
    Entity {
        id: EntityId::new(format!("a{index:04}")),
        entity_type: EntityType::Audiobook,
        title,
        authors,
        description,
        genres,
        popularity: pareto(rng, 2.0, 1.3),
    }
}

fn playlist(rng: &mut ChaCha8Rng, index: usize) -> Entity {
    let genre = pick(rng, PLAYLIST_GENRES);
    let topic = pick(rng, TOPICS);
    let mood = pick(rng, MOOD_WORDS);
    let title = if rng.random::<f64>() < 0.5 {
        format!("{} {} Mix", title_case(topic), title_case(genre))
    } else {
        format!(
            "{} {} Beats",
            title_case(mood),
            title_case(pick(rng, PLAYLIST_ACTIVITIES))
        )
    };
    let description = format!(
        "Tracks for {} with a {} vibe. Perfect for fans of {}.",
        pick(rng, PLAYLIST_ACTIVITIES),
        mood,
        topic,
    );
    Entity {
        id: EntityId::new(format!("p{index:04}")),
        entity_type: EntityType::Playlist,
        title,
        authors: vec![],
        description,
        genres: vec![genre.to_string()],
        popularity: pareto(rng, 40.0, 1.1),
    }
}

fn podcast(rng: &mut ChaCha8Rng, index: usize) -> Entity {
    let topic_a = pick(rng, TOPICS);
    let topic_b = pick(rng, TOPICS);
    let topic_c = pick(rng, TOPICS);
    let title = match rng.random_range(0..3) {
        0 => format!("The {} Hour", title_case(topic_a)),
        1 => format!("{} Weekly", title_case(topic_a)),
        _ => format!("Talks on {}", title_case(topic_a)),
    };
    let description = format!(
        "A weekly show about {} and {}. Conversations with experts on {}.",
        topic_a, topic_b, topic_c,
    );
    Entity {
        id: EntityId::new(format!("s{index:04}")),
        entity_type: EntityType::Podcast,
        title,
        authors: vec![],
        description,
        genres: vec![pick(rng, PODCAST_GENRES).to_string()],
        popularity: pareto(rng, 40.0, 1.1),
    }
}

/// Generate a deterministic synthetic catalog. Identical `(seed, counts)`
/// always yields an identical catalog.
pub fn generate_synthetic_catalog(seed: u64, counts: TypeCounts) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut catalog = Catalog::new();
    for i in 0..counts.audiobooks {
        catalog
            .insert(audiobook(&mut rng, i))
            .expect("generated ids are unique");
    }
    for i in 0..counts.playlists {
        catalog
            .insert(playlist(&mut rng, i))
            .expect("generated ids are unique");
    }
    for i in 0..counts.podcasts {
        catalog
            .insert(podcast(&mut rng, i))
            .expect("generated ids are unique");
    }
    catalog
}

/// Generate a deterministic synthetic query log of `count` search successes.
///
/// Targets skew towards playlists and podcasts (the warm types), and each
/// query is derived from its target's own metadata: a title token, a topic
/// word, a title bigram, or a type-suffixed query such as
/// `"ancient history audiobooks"`. All weights are 1.
pub fn generate_synthetic_query_log(
    catalog: &Catalog,
    seed: u64,
    count: usize,
) -> Vec<QueryLogRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let analyzer = Analyzer::default();

    let by_type: Vec<Vec<&Entity>> = EntityType::ALL
        .iter()
        .map(|t| catalog.iter().filter(|e| e.entity_type == *t).collect())
        .collect();
    // audiobook / playlist / podcast target proportions
    let type_weights = [0.13, 0.435, 0.435];

    let mut records = Vec::with_capacity(count);
    while records.len() < count {
        let roll: f64 = rng.random();
        let mut type_idx = 0;
        let mut acc = 0.0;
        for (i, w) in type_weights.iter().enumerate() {
            acc += w;
            if roll < acc {
                type_idx = i;
                break;
            }
        }
        let pool = &by_type[type_idx];
        if pool.is_empty() {
            // fall back to any non-empty type
            let Some(fallback) = by_type.iter().find(|p| !p.is_empty()) else {
                return records;
            };
            let entity = fallback[rng.random_range(0..fallback.len())];
            if let Some(q) = query_for_entity(&mut rng, entity, &analyzer) {
                records.push(q);
            }
            continue;
        }
        let entity = pool[rng.random_range(0..pool.len())];
        if let Some(q) = query_for_entity(&mut rng, entity, &analyzer) {
            records.push(q);
        }
    }
    records
}

fn query_for_entity(
    rng: &mut ChaCha8Rng,
    entity: &Entity,
    analyzer: &Analyzer,
) -> Option<QueryLogRecord> {
    let title_tokens: Vec<String> = analyzer
        .analyze(&entity.title)
        .into_iter()
        .filter(|t| !STOP_TOKENS.contains(&t.as_str()))
        .collect();
    let topic_tokens: Vec<String> = analyzer
        .analyze(&format!("{} {}", entity.description, entity.genres.join(" ")))
        .into_iter()
        .filter(|t| TOPICS.contains(&t.as_str()))
        .collect();

    let query_text = match rng.random_range(0..100) {
        // single title token
        0..45 => title_tokens
            .get(rng.random_range(0..title_tokens.len().max(1)))
            .cloned()?,
        // topic word from metadata
        45..70 => {
            if topic_tokens.is_empty() {
                title_tokens
                    .get(rng.random_range(0..title_tokens.len().max(1)))
                    .cloned()?
            } else {
                topic_tokens[rng.random_range(0..topic_tokens.len())].clone()
            }
        }
        // adjacent content-token bigram from the title
        70..85 => {
            if title_tokens.len() >= 2 {
                let start = rng.random_range(0..title_tokens.len() - 1);
                format!("{} {}", title_tokens[start], title_tokens[start + 1])
            } else {
                title_tokens.first().cloned()?
            }
        }
        // type-suffixed query
        _ => {
            let suffix = match entity.entity_type {
                EntityType::Audiobook => "audiobooks",
                EntityType::Playlist => "playlist",
                EntityType::Podcast => "podcast",
            };
            let lead = if entity.entity_type == EntityType::Audiobook && rng.random::<f64>() < 0.3
            {
                None
            } else if !topic_tokens.is_empty() {
                Some(topic_tokens[rng.random_range(0..topic_tokens.len())].clone())
            } else if let Some(genre) = entity.genres.first() {
                Some(genre.to_lowercase())
            } else {
                title_tokens.first().cloned()
            };
            match lead {
                Some(lead) => format!("{lead} {suffix}"),
                None => suffix.to_string(),
            }
        }
    };
    Some(QueryLogRecord {
        query_text,
        target_entity_id: entity.id.clone(),
        weight: 1.0,
    })
}
