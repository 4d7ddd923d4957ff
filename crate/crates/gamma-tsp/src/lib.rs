//! Gamma-clustering toolkit for metric traveling-salesman problems.
//!
//! A `Γ`-cluster is a vertex subset whose cheapest outgoing edge (`α`)
//! exceeds its costliest internal edge (`β`) by a factor `Γ = α/β`. For
//! `Γ > 1` the maximal family of such clusters is unique and laminar, and
//! restricting tours to visit each cluster consecutively shrinks the
//! search space exponentially while keeping the clustered optimum within
//! `min(2, 1 + 3/(2Γ))` of the true optimum on metric instances.
//!
//! The crate provides:
//!
//! * [`graph`] — complete weighted graphs, metric checking, MSTs;
//! * [`instances`] — TSPLIB parsing plus synthetic generators;
//! * [`clustering`] — optimal Γ-clustering, a brute-force oracle, and
//!   laminar cluster trees;
//! * [`tours`] — tours, consecutive-visit checks, the `deform` repair
//!   procedure, and the MST-doubling 2-approximation;
//! * [`solvers`] — exact (Held-Karp, branch-and-bound, hierarchical
//!   decomposition) and heuristic solvers for TSP and clustered TSP;
//! * [`analysis`] — search-space ratios, approximation-gap measurement,
//!   and the tightness family.

// Index loops are the clearest rendering of the symmetric-matrix kernels
// here, and `!(x > y)` comparisons deliberately reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clustering;
pub mod graph;
pub mod instances;
pub mod solvers;
pub mod tours;

pub use clustering::{brute_force_clusters, gamma_clustering, ClusterMetrics, ClusterTree};
pub use graph::{MetricGraph, VertexSet};
pub use solvers::{solve_exact_ctsp, solve_exact_tsp, solve_heuristic, SolveReport, SolveStatus};
pub use tours::{Tour, TourKind};
