//! Search-retrievability toolkit for cold-start catalogs.
//!
//! Synthetic queries are generated from item metadata (templates or an
//! external LLM), indexed as autocomplete completions, and appended to
//! document representations in a BM25 index. A simulation harness measures
//! how each intervention shifts retrievability across entity types, and a
//! judge scores generated queries on boolean quality dimensions.

pub mod catalog;
pub mod config;
pub mod judge;
pub mod llm_client;
pub mod qac;
pub mod qgen;
pub mod retrieval;
pub mod simulator;
pub mod textproc;
