//! Seeded action-sequence test generation with per-component provenance.
//!
//! The crate is organised around the lifecycle of a generated test:
//!
//! - [`corpus`]: tests, components, annotations and the `.test` format
//! - [`sut`]: the system-under-test contract and the bundled AVL and
//!   in-memory filesystem systems
//! - [`engine`]: sub-sequence replay generation, learning and campaigns
//! - [`postprocess`]: delta-debugging reduction and normalization
//! - [`pseudoprov`]: greedy pseudo-provenance reconstruction
//! - [`report`]: collective contribution tables
//! - [`cli`]: the `provtrail` command line

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod postprocess;
pub mod pseudoprov;
pub mod report;
pub mod rng;
pub mod sut;

pub use corpus::{
    parse_test, serialize_test, ActionText, Annotation, Component, Corpus, Origin, Test,
};
