//! Structure theory and subword complexity classification for morphic
//! sequences `ψ(φ^∞(a))`.
//!
//! The pipeline: parse a system ([`word_model`]), compute letter orders
//! ([`order_analysis`]), normalize the morphism ([`normalization`]), analyze
//! k-blocks and their evolutions ([`block_engine`]), classify
//! ([`evolution_classifier`]) and compare with direct factor counts
//! ([`complexity_meter`]).

pub mod block_engine;
pub mod cli_reporting;
pub mod complexity_meter;
pub mod evolution_classifier;
pub mod normalization;
pub mod order_analysis;
pub mod periodicity;
pub mod word_model;

pub use word_model::{LetterId, MorphicSystem, Occurrence, ProvenancePrefix, Word};
