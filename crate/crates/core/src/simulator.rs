//! Retrievability simulation.
//!
//! Computes per-entity retrievability `r(e) = Σ_q o_q · f(k_eq, c)` over a
//! weighted query set, where `f` is 1 when the entity ranks within the top
//! `c` results. Four configurations toggle document augmentation and the
//! inclusion of sampled synthetic queries in the query set; a click-fraction
//! sweep scales how much of the synthetic sample is included.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, EntityId, EntityType, QueryLogRecord};
use crate::qgen::{aggregate_queries, GenerationRecord, SyntheticQuery};
use crate::retrieval::{build_document, Bm25Params, Document, InvertedIndex, RetrievalError};
use crate::textproc::Analyzer;

/// The four experiment configurations: which half of the approach is active.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ConfigId {
    Config1,
    Config2,
    Config3,
    Config4,
}

impl ConfigId {
    pub const ALL: [ConfigId; 4] = [
        Self::Config1,
        Self::Config2,
        Self::Config3,
        Self::Config4,
    ];

    /// Whether documents are augmented with generated descriptors/queries.
    pub fn doc_augmentation(&self) -> bool {
        matches!(self, Self::Config2 | Self::Config4)
    }

    /// Whether sampled synthetic queries join the query set.
    pub fn add_synthetic_queries(&self) -> bool {
        matches!(self, Self::Config3 | Self::Config4)
    }

    pub fn number(&self) -> u8 {
        match self {
            Self::Config1 => 1,
            Self::Config2 => 2,
            Self::Config3 => 3,
            Self::Config4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::Config1),
            2 => Some(Self::Config2),
            3 => Some(Self::Config3),
            4 => Some(Self::Config4),
            _ => None,
        }
    }
}

/// Parameters of one simulation run. The augmentation/query-set booleans are
/// derived from `id`, never set independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub id: ConfigId,
    /// rank cutoff c of the retrievability definition
    pub cutoff_c: usize,
    /// how many synthetic queries to sample into the query set; `None`
    /// means the whole pool
    pub synthetic_query_sample_size: Option<usize>,
    /// fraction of the sample actually included (the click sweep knob)
    pub click_fraction: f64,
    pub random_seed: u64,
}

impl SimulationConfig {
    pub fn new(id: ConfigId, seed: u64) -> Self {
        Self {
            id,
            cutoff_c: 100,
            synthetic_query_sample_size: None,
            click_fraction: 1.0,
            random_seed: seed,
        }
    }

    pub fn with_cutoff(mut self, c: usize) -> Self {
        self.cutoff_c = c;
        self
    }

    pub fn with_click_fraction(mut self, fraction: f64) -> Self {
        self.click_fraction = fraction;
        self
    }

    pub fn with_sample_size(mut self, size: usize) -> Self {
        self.synthetic_query_sample_size = Some(size);
        self
    }
}

/// A query with its retrievability weight `o_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedQuery {
    pub text: String,
    pub weight: f64,
}

impl From<&QueryLogRecord> for WeightedQuery {
    fn from(record: &QueryLogRecord) -> Self {
        Self {
            text: record.query_text.clone(),
            weight: record.weight,
        }
    }
}

/// Per-type percentage shares of total retrievability. When every entity has
/// zero retrievability the shares are all zero and `all_zero` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeShares {
    pub shares: BTreeMap<EntityType, f64>,
    pub total_retrievability: f64,
    pub all_zero: bool,
}

impl TypeShares {
    pub fn share(&self, entity_type: EntityType) -> f64 {
        self.shares.get(&entity_type).copied().unwrap_or(0.0)
    }
}

/// Output of one configuration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievabilityReport {
    pub config: SimulationConfig,
    pub per_entity_r: BTreeMap<EntityId, f64>,
    pub per_type_share: TypeShares,
    pub query_set_size: usize,
}

/// One point of the click-fraction sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub audiobook_share: f64,
}

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("cutoff c must be at least 1")]
    InvalidCutoff,
    #[error("synthetic sample size {requested} exceeds pool of {available}")]
    SampleExceedsPool { requested: usize, available: usize },
    #[error("click fraction {0} outside [0, 1]")]
    InvalidClickFraction(f64),
    #[error("fractions must be sorted ascending within [0, 1]")]
    InvalidFractions,
    #[error("retrievability references unknown entity \"{0}\"")]
    UnresolvedEntity(EntityId),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Accumulate retrievability over a query set: every entity ranked within
/// the top `c` of a query's results (with positive score) accrues that
/// query's weight. Every indexed entity appears in the result, at 0 when
/// never retrieved.
pub fn retrievability(
    index: &InvertedIndex,
    queries: &[WeightedQuery],
    c: usize,
) -> Result<BTreeMap<EntityId, f64>, SimulatorError> {
    if c == 0 {
        return Err(SimulatorError::InvalidCutoff);
    }
    let mut r: BTreeMap<EntityId, f64> = index
        .doc_entries()
        .map(|d| (d.id.clone(), 0.0))
        .collect();
    for query in queries {
        for hit in index.search(&query.text, c) {
            *r.entry(hit.doc_id).or_insert(0.0) += query.weight;
        }
    }
    Ok(r)
}

/// Percentage share of total retrievability per entity type:
/// `share(T) = 100 · Σ_{e∈T} r(e) / Σ_e r(e)`.
pub fn share_by_type(
    r: &BTreeMap<EntityId, f64>,
    catalog: &Catalog,
) -> Result<TypeShares, SimulatorError> {
    let mut per_type: BTreeMap<EntityType, f64> =
        EntityType::ALL.iter().map(|t| (*t, 0.0)).collect();
    let mut total = 0.0;
    for (id, value) in r {
        let entity = catalog
            .get(id)
            .ok_or_else(|| SimulatorError::UnresolvedEntity(id.clone()))?;
        *per_type.entry(entity.entity_type).or_insert(0.0) += value;
        total += value;
    }
    let all_zero = total <= 0.0;
    let shares = per_type
        .into_iter()
        .map(|(t, mass)| (t, if all_zero { 0.0 } else { 100.0 * mass / total }))
        .collect();
    Ok(TypeShares {
        shares,
        total_retrievability: total,
        all_zero,
    })
}

/// Assemble the weighted query set for a configuration: log queries always,
/// plus — for configurations 3 and 4 — a seeded uniform sample of the
/// synthetic pool scaled by the click fraction. All weights are 1.
///
/// Sampling is a seeded shuffle followed by a prefix take, so samples are
/// nested across click fractions under a shared seed.
pub fn build_query_set(
    config: &SimulationConfig,
    log_queries: &[QueryLogRecord],
    synthetic_queries: &[SyntheticQuery],
) -> Result<Vec<WeightedQuery>, SimulatorError> {
    if !(0.0..=1.0).contains(&config.click_fraction) {
        return Err(SimulatorError::InvalidClickFraction(config.click_fraction));
    }
    let mut queries: Vec<WeightedQuery> = log_queries
        .iter()
        .map(|record| WeightedQuery {
            text: record.query_text.clone(),
            weight: 1.0,
        })
        .collect();

    if config.id.add_synthetic_queries() {
        let sample_size = match config.synthetic_query_sample_size {
            Some(requested) if requested > synthetic_queries.len() => {
                return Err(SimulatorError::SampleExceedsPool {
                    requested,
                    available: synthetic_queries.len(),
                })
            }
            Some(requested) => requested,
            None => synthetic_queries.len(),
        };
        let take = (config.click_fraction * sample_size as f64).floor() as usize;

        let mut pool: Vec<&SyntheticQuery> = synthetic_queries.iter().collect();
        pool.sort_by(|a, b| a.text.cmp(&b.text));
        let mut rng = ChaCha8Rng::seed_from_u64(config.random_seed);
        pool.shuffle(&mut rng);
        queries.extend(pool.into_iter().take(take).map(|q| WeightedQuery {
            text: q.text.clone(),
            weight: 1.0,
        }));
    }
    Ok(queries)
}

fn build_index_for(
    catalog: &Catalog,
    records: &[GenerationRecord],
    augment: bool,
    bm25: Bm25Params,
    analyzer: &Analyzer,
) -> Result<InvertedIndex, SimulatorError> {
    let by_entity: BTreeMap<&EntityId, &GenerationRecord> =
        records.iter().map(|r| (&r.entity_id, r)).collect();
    let mut documents: Vec<Document> = Vec::with_capacity(catalog.len());
    for entity in catalog.iter() {
        let augmentation = if augment {
            by_entity.get(&entity.id).copied()
        } else {
            None
        };
        documents.push(build_document(entity, augmentation, analyzer)?);
    }
    Ok(InvertedIndex::build(&documents, bm25, analyzer.clone())?)
}

/// Run one configuration end to end: build the (possibly augmented) index
/// and the query set, compute retrievability and type shares. Deterministic
/// given the seed.
pub fn run_configuration(
    catalog: &Catalog,
    records: &[GenerationRecord],
    log_queries: &[QueryLogRecord],
    config: &SimulationConfig,
    bm25: Bm25Params,
    analyzer: &Analyzer,
) -> Result<RetrievabilityReport, SimulatorError> {
    if config.cutoff_c == 0 {
        return Err(SimulatorError::InvalidCutoff);
    }
    let index = build_index_for(
        catalog,
        records,
        config.id.doc_augmentation(),
        bm25,
        analyzer,
    )?;
    let synthetic_pool = if config.id.add_synthetic_queries() {
        aggregate_queries(records)
    } else {
        Vec::new()
    };
    let queries = build_query_set(config, log_queries, &synthetic_pool)?;
    let r = retrievability(&index, &queries, config.cutoff_c)?;
    let per_type_share = share_by_type(&r, catalog)?;
    Ok(RetrievabilityReport {
        config: config.clone(),
        query_set_size: queries.len(),
        per_entity_r: r,
        per_type_share,
    })
}

/// Sweep the click fraction under configuration 4 with a shared seed,
/// reporting the audiobook share at each point. Fractions must be sorted
/// ascending within [0, 1].
pub fn sweep_click_fraction(
    catalog: &Catalog,
    records: &[GenerationRecord],
    log_queries: &[QueryLogRecord],
    fractions: &[f64],
    base: &SimulationConfig,
    bm25: Bm25Params,
    analyzer: &Analyzer,
) -> Result<Vec<SweepPoint>, SimulatorError> {
    let sorted_in_range = fractions.windows(2).all(|w| w[0] <= w[1])
        && fractions.iter().all(|f| (0.0..=1.0).contains(f));
    if !sorted_in_range {
        return Err(SimulatorError::InvalidFractions);
    }
    let mut points = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let config = SimulationConfig {
            id: ConfigId::Config4,
            click_fraction: fraction,
            ..base.clone()
        };
        let report = run_configuration(catalog, records, log_queries, &config, bm25, analyzer)?;
        points.push(SweepPoint {
            fraction,
            audiobook_share: report.per_type_share.share(EntityType::Audiobook),
        });
    }
    Ok(points)
}
