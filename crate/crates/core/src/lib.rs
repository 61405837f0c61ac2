//! Hierarchical backbone extraction from object–tag bipartite networks.
//!
//! Tags that stand in a parent/child relation co-occur on objects more often
//! than chance, and the child's occurrences are mostly covered by the
//! parent's. This crate turns an object–tag bipartite graph into a directed
//! acyclic backbone over tags by
//!
//! * projecting onto tags ([`graph::project`]),
//! * pruning insignificant co-occurrences ([`backbone::prune`]),
//! * scoring and thresholding the conditional-probability asymmetry
//!   ([`backbone::build_backbone`]),
//! * and optionally removing transitively implied edges
//!   ([`backbone::transitive_reduce`]).
//!
//! It also ships the semi-synthetic benchmark generator ([`benchgen`]), the
//! edge/path scoring harness ([`evaluate`]), Gene Ontology and TSV readers
//! ([`ingest`]) and the file-level pipeline driven by the `hbackbone` binary
//! ([`pipeline`]).

pub mod backbone;
pub mod benchgen;
pub mod dag;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod pipeline;

pub use error::{Error, Result};
