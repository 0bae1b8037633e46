//! Deterministic community detection on undirected graphs.
//!
//! The main engine is LabelRank: every node keeps a sparse probability
//! distribution over label ids (initially its neighborhood), and each
//! iteration applies four operators (propagation, inflation, cutoff, and
//! conditional update) until a repetition-count stop criterion fires.
//! Communities are the groups of nodes sharing the same highest-probability
//! label. The whole pipeline is deterministic: identical input and parameters
//! produce identical partitions and traces, regardless of how many worker
//! threads are used.
//!
//! A classic synchronous label propagation baseline ([`lpa`]) with seeded
//! random tie-breaking and Newman modularity evaluation ([`metrics`]) are
//! included for comparison experiments.
//!
//! ```
//! use labelrank::{dynamics, graph::Graph};
//!
//! // Two disjoint triangles separate into two communities.
//! let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
//! let result = dynamics::run_labelrank(&g, &dynamics::Params::default(), false).unwrap();
//! assert_eq!(result.partition.community_count(), 2);
//! ```

pub mod dynamics;
pub mod graph;
pub mod lpa;
pub mod metrics;
pub mod synthetic;

pub use dynamics::{run_labelrank, LabelRankResult, Params};
pub use graph::Graph;
pub use metrics::Partition;
