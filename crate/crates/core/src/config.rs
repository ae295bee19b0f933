//! Toolkit configuration file.
//!
//! One TOML file covers every tunable; CLI flags override file values. All
//! sections are optional and default to the documented values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::judge::JudgeRules;
use crate::llm_client::LlmConfig;
use crate::qac::RerankWeights;
use crate::retrieval::Bm25Params;
use crate::textproc::AnalyzerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QacParams {
    /// per-source candidate count
    pub k: usize,
    /// final suggestion count
    pub n: usize,
    pub weights: RerankWeights,
}

impl Default for QacParams {
    fn default() -> Self {
        Self {
            k: 10,
            n: 10,
            weights: RerankWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateParams {
    /// retrievability rank cutoff
    pub c: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self { c: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceIndexPaths {
    pub inverted: Option<String>,
    pub qac: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceParams {
    pub port: u16,
    #[serde(default)]
    pub index_paths: ServiceIndexPaths,
}

impl Default for ServiceParams {
    fn default() -> Self {
        Self {
            port: 8080,
            index_paths: ServiceIndexPaths {
                inverted: None,
                qac: None,
            },
        }
    }
}

impl Default for ServiceIndexPaths {
    fn default() -> Self {
        Self {
            inverted: None,
            qac: None,
        }
    }
}

/// The whole config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolkitConfig {
    pub analyzer: AnalyzerConfig,
    pub bm25: Bm25Params,
    pub qac: QacParams,
    pub judge: JudgeRules,
    pub llm: LlmConfig,
    pub simulate: SimulateParams,
    pub service: ServiceParams,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config file: {0}")]
    Parse(#[from] toml::de::Error),
}

impl ToolkitConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&raw)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_sane() {
        let config = ToolkitConfig::default();
        assert_eq!(config.qac.k, 10);
        assert_eq!(config.simulate.c, 100);
        assert_eq!(config.bm25.k1, 1.2);
        assert!(!config.analyzer.stemming);
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(
            &path,
            "[qac]\nk = 5\nn = 3\n\n[qac.weights]\nv = 2.0\ns = 0.5\n\n[qac.weights.source_prior]\nentity_titles = 0.0\nlog_queries = 0.0\nsynthetic_queries = 0.2\n\n[analyzer]\nstemming = true\n",
        )
        .unwrap();
        let config = ToolkitConfig::load(&path).unwrap();
        assert_eq!(config.qac.k, 5);
        assert_eq!(config.qac.n, 3);
        assert_eq!(config.qac.weights.v, 2.0);
        assert_eq!(config.qac.weights.source_prior.synthetic_queries, 0.2);
        assert!(config.analyzer.stemming);
        // untouched sections keep defaults
        assert_eq!(config.simulate.c, 100);
    }

    #[test]
    fn invalid_toml_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, "not = [valid").unwrap();
        assert!(matches!(
            ToolkitConfig::load(&path),
            Err(ConfigError::Parse(_))
        ));
    }
}
