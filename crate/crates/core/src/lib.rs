//! Graph-hop evidence retrieval over textual fact databases.
//!
//! The crate covers the data model and chain notation ([`model`]), the
//! explanation-graph metrics ([`metrics`]), pluggable evidence scorers
//! ([`scorers`]), forward/backward retrieval ([`retrieval`]), bidirectional
//! subgraph fusion ([`reconstruct`]), a symbolic reader ([`reader`]) and a
//! synthetic dataset generator ([`synthgen`]).

pub mod metrics;
pub mod model;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod reader;
pub mod reconstruct;
pub mod retrieval;
pub mod scorers;
pub mod seed;
pub mod synthgen;
