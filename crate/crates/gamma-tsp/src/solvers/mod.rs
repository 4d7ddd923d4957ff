//! Exact and heuristic tour solvers, plus the feasible-tour counter.
//!
//! Exact paths: Held-Karp dynamic programming up to 20 vertices, depth
//! first branch-and-bound with spanning-tree lower bounds up to 28, and
//! a decomposition solver that exploits a laminar clustering to solve
//! much larger constrained instances level by level.

mod branch_bound;
mod enumerate;
mod held_karp;
mod heuristic;
mod hierarchical;

pub use branch_bound::branch_and_bound;
pub use enumerate::{brute_force_tour, enumerate_feasible};
pub use held_karp::held_karp;
pub use heuristic::solve_heuristic;
pub use hierarchical::hierarchical_ctsp;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::clustering::ClusterTree;
use crate::graph::MetricGraph;
use crate::tours::Tour;

/// Largest size Held-Karp attempts before handing over to search.
pub const HELD_KARP_CAP: usize = 20;
/// Largest size the exact searchers accept.
pub const EXACT_CAP: usize = 28;
/// Largest per-level child count for the decomposition solver's DP.
pub const DP_WIDTH_CAP: usize = 18;
/// Largest size the permutation brute force accepts.
pub const BRUTE_FORCE_CAP: usize = 12;
/// Largest size the feasible-tour counter accepts.
pub const ENUMERATE_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("{n} vertices exceeds the exact-solver cap of {cap}; use the heuristic solver")]
    TooLarge { n: usize, cap: usize },
    #[error("clustering fails validation: {0}")]
    InvalidClustering(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeout,
    Infeasible,
}

/// Outcome of one solver run. `cost` always equals the tour's cost on
/// the graph it was solved against.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub tour: Tour,
    pub cost: f64,
    pub status: SolveStatus,
    pub nodes_expanded: u64,
    #[serde(serialize_with = "serialize_secs", rename = "elapsed_secs")]
    pub elapsed: Duration,
    pub solver_name: String,
}

fn serialize_secs<S: serde::Serializer>(d: &Duration, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_f64(d.as_secs_f64())
}

/// Solves the unconstrained problem exactly: dynamic programming when it
/// fits, branch-and-bound otherwise. Budget overruns return the incumbent
/// with a timeout status.
pub fn solve_exact_tsp(graph: &MetricGraph, budget: Duration) -> Result<SolveReport, SolverError> {
    let n = graph.vertex_count();
    if n <= HELD_KARP_CAP {
        Ok(held_karp(graph))
    } else if n <= EXACT_CAP {
        Ok(branch_and_bound(graph, None, budget))
    } else {
        Err(SolverError::TooLarge { n, cap: EXACT_CAP })
    }
}

/// Solves the consecutively-constrained problem exactly. An empty
/// clustering reduces to [`solve_exact_tsp`]. Otherwise the laminar
/// decomposition runs when every level is narrow enough for its DP, and
/// constrained branch-and-bound covers the rest.
pub fn solve_exact_ctsp(
    graph: &MetricGraph,
    clustering: &ClusterTree,
    budget: Duration,
) -> Result<SolveReport, SolverError> {
    let problems = crate::clustering::verify_clustering(graph, clustering);
    if !problems.is_empty() {
        return Err(SolverError::InvalidClustering(problems.join("; ")));
    }
    if clustering.is_empty() {
        return solve_exact_tsp(graph, budget);
    }
    match hierarchical_ctsp(graph, clustering, budget) {
        Ok(report) => Ok(report),
        Err(SolverError::TooLarge { .. }) if graph.vertex_count() <= EXACT_CAP => {
            Ok(branch_and_bound(graph, Some(clustering), budget))
        }
        Err(e) => Err(e),
    }
}
