//! Butterfly (2x2 biclique) counting on bipartite edge streams.
//!
//! [`exact`] counts butterflies in a static graph, [`estimators`] and
//! [`window`] hold the bounded-memory streaming estimators, and [`bench`]
//! drives any of them through the [`registry`] against exact ground truth.

pub mod bench;
pub mod estimators;
pub mod exact;
pub mod graph;
pub mod ingest;
pub mod registry;
pub mod window;

pub use exact::{count_butterflies_exact, ButterflyCount};
pub use graph::{BipartiteAdjacency, Edge, TimedEdge};
pub use registry::{Registry, StreamEstimator};
