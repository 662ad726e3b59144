//! Exact graph dynamic programming: recursive partitioned all-pairs shortest
//! paths, windowed bit-parallel sequence-to-graph alignment, a workload planner,
//! and a parameterized cycle/energy model of a heterogeneous in-memory accelerator.

pub mod apsp;
pub mod cost;
pub mod error;
pub mod graph;
pub mod partition;
pub mod planner;
pub mod s2g;
pub mod weight;

pub use error::{Error, Result};
pub use weight::{Weight, INF_SENTINEL, MAX_EDGE_WEIGHT};

/// 32-bit instantiations used by the CLI and the hardware model.
pub type DistanceBlockU32 = apsp::DistanceBlock<u32>;
pub type ApspResultU32 = apsp::ApspResult<u32>;
pub type HierarchyU32 = partition::PartitionHierarchy<u32>;
