//! Quantitative claims made executable: feasible-set size ratios, the
//! approximation-gap measurement, and the tightness-family curve.

use std::time::Duration;

use num::bigint::{BigInt, BigUint};
use num::rational::Ratio;
use num::ToPrimitive;
use serde::ser::SerializeStruct;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::clustering::{cluster_metrics, gamma_clustering, ClusterTree};
use crate::graph::MetricGraph;
use crate::instances::gen_lower_bound;
use crate::solvers::{solve_exact_ctsp, solve_exact_tsp, SolveStatus, SolverError};

/// Exact factorials are materialized up to this many vertices; beyond,
/// only the log-scale values are available.
pub const EXACT_FACTORIAL_CAP: usize = 5000;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cluster sizes sum to {sum}, exceeding {total} vertices")]
    SizesExceedTotal { sum: usize, total: usize },
    #[error("cluster sizes must be positive")]
    ZeroClusterSize,
    #[error("gamma must exceed 1, got {0}")]
    GammaTooSmall(f64),
    #[error("solver timed out (unclustered cost: {c_star:?}, clustered cost: {c_prime_star:?})")]
    TimedOut {
        c_star: Option<f64>,
        c_prime_star: Option<f64>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("clustering failed: {0}")]
    Clustering(String),
}

/// Size of the unconstrained versus constrained feasible sets, on a log
/// scale with exact big integers when small enough to materialize.
#[derive(Debug, Clone)]
pub struct SearchSpaceReport {
    pub n0_log10: f64,
    pub n1_log10: f64,
    pub ratio_log10: f64,
    pub n0_exact: Option<BigUint>,
    pub n1_exact: Option<BigUint>,
}

impl SearchSpaceReport {
    /// N1 / N0, the surviving fraction of the search space.
    pub fn reduction_factor(&self) -> f64 {
        match (&self.n0_exact, &self.n1_exact) {
            (Some(n0), Some(n1)) => Ratio::new(BigInt::from(n1.clone()), BigInt::from(n0.clone()))
                .to_f64()
                .unwrap_or(f64::NAN),
            _ => 10f64.powf(-self.ratio_log10),
        }
    }

    /// N1 in scientific notation as (mantissa, exponent).
    pub fn n1_scientific(&self) -> (f64, i32) {
        match &self.n1_exact {
            Some(n1) => big_to_scientific(n1),
            None => log10_to_scientific(self.n1_log10),
        }
    }
}

impl Serialize for SearchSpaceReport {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("SearchSpaceReport", 5)?;
        s.serialize_field("n0_log10", &self.n0_log10)?;
        s.serialize_field("n1_log10", &self.n1_log10)?;
        s.serialize_field("ratio_log10", &self.ratio_log10)?;
        s.serialize_field("n0_exact", &self.n0_exact.as_ref().map(|v| v.to_string()))?;
        s.serialize_field("n1_exact", &self.n1_exact.as_ref().map(|v| v.to_string()))?;
        s.end()
    }
}

fn big_to_scientific(x: &BigUint) -> (f64, i32) {
    let digits = x.to_string();
    let exp = digits.len() as i32 - 1;
    let head: String = digits.chars().take(15).collect();
    let mantissa = head.parse::<f64>().unwrap() / 10f64.powi(head.len() as i32 - 1);
    (mantissa, exp)
}

fn log10_to_scientific(log10: f64) -> (f64, i32) {
    let exp = log10.floor();
    (10f64.powf(log10 - exp), exp as i32)
}

fn factorial(n: usize) -> BigUint {
    let mut acc = BigUint::from(1u8);
    for i in 2..=n as u64 {
        acc *= i;
    }
    acc
}

fn log10_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) / std::f64::consts::LN_10
}

/// The ratio N0 / N1 of unconstrained to constrained solution counts for
/// a non-nested clustering: N0 = |V|! and N1 = m! * prod(|V_i|!), where
/// m counts the clusters plus one singleton per uncovered vertex.
pub fn search_space_ratio(
    total_vertices: usize,
    cluster_sizes: &[usize],
) -> Result<SearchSpaceReport, AnalysisError> {
    if cluster_sizes.contains(&0) {
        return Err(AnalysisError::ZeroClusterSize);
    }
    let covered: usize = cluster_sizes.iter().sum();
    if covered > total_vertices {
        return Err(AnalysisError::SizesExceedTotal {
            sum: covered,
            total: total_vertices,
        });
    }
    let m = cluster_sizes.len() + (total_vertices - covered);
    let n0_log10 = log10_factorial(total_vertices);
    let n1_log10 = log10_factorial(m)
        + cluster_sizes
            .iter()
            .map(|&s| log10_factorial(s))
            .sum::<f64>();
    let exact = total_vertices <= EXACT_FACTORIAL_CAP;
    let (n0_exact, n1_exact) = if exact {
        let n1 = cluster_sizes
            .iter()
            .fold(factorial(m), |acc, &s| acc * factorial(s));
        (Some(factorial(total_vertices)), Some(n1))
    } else {
        (None, None)
    };
    Ok(SearchSpaceReport {
        n0_log10,
        n1_log10,
        ratio_log10: n0_log10 - n1_log10,
        n0_exact,
        n1_exact,
    })
}

/// Measured clustered-versus-free optimality gap on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub c_star: f64,
    pub c_prime_star: f64,
    pub ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub cluster_count: usize,
}

/// The guarantee `min(2, 1 + 3 / (2 * gamma))`.
pub fn gap_bound(gamma: f64) -> f64 {
    2f64.min(1.0 + 3.0 / (2.0 * gamma))
}

/// Clusters the graph at the threshold, solves both problems exactly,
/// and reports the cost ratio against the guarantee.
pub fn measure_gap(
    graph: &MetricGraph,
    gamma: f64,
    budget: Duration,
) -> Result<GapReport, AnalysisError> {
    let tree =
        gamma_clustering(graph, gamma).map_err(|e| AnalysisError::Clustering(e.to_string()))?;
    let free = solve_exact_tsp(graph, budget)?;
    if free.status != SolveStatus::Optimal {
        return Err(AnalysisError::TimedOut {
            c_star: Some(free.cost),
            c_prime_star: None,
        });
    }
    let clustered = solve_exact_ctsp(graph, &tree, budget)?;
    if clustered.status != SolveStatus::Optimal {
        return Err(AnalysisError::TimedOut {
            c_star: Some(free.cost),
            c_prime_star: Some(clustered.cost),
        });
    }
    let ratio = clustered.cost / free.cost;
    let bound = gap_bound(gamma);
    Ok(GapReport {
        c_star: free.cost,
        c_prime_star: clustered.cost,
        ratio,
        bound,
        within_bound: ratio <= bound + 1e-9,
        cluster_count: tree.len(),
    })
}

/// Measures the gap ratio across the scalable family with separation
/// exactly `gamma`, for `n = 0..=n_max`. Stops early (with the points
/// collected so far) once instances outgrow the exact solvers.
pub fn tightness_curve(gamma: f64, n_max: usize) -> Result<Vec<(usize, f64)>, AnalysisError> {
    if !(gamma > 1.0) {
        return Err(AnalysisError::GammaTooSmall(gamma));
    }
    let budget = Duration::from_secs(600);
    let mut out = Vec::new();
    for n in 0..=n_max {
        let inst = gen_lower_bound(n, gamma, 1.0).expect("gamma > 1 was checked");
        let metrics =
            cluster_metrics(&inst.graph, &inst.cluster).expect("family cluster is a proper subset");
        let tree = ClusterTree::from_clusters(gamma, vec![(inst.cluster.clone(), metrics)]);
        let free = match solve_exact_tsp(&inst.graph, budget) {
            Ok(r) if r.status == SolveStatus::Optimal => r,
            _ => break,
        };
        let clustered = match solve_exact_ctsp(&inst.graph, &tree, budget) {
            Ok(r) if r.status == SolveStatus::Optimal => r,
            _ => break,
        };
        out.push((n, clustered.cost / free.cost));
    }
    Ok(out)
}

/// The limiting gap ratio of the family, `1 + 2 / (2 * gamma + 1)`.
pub fn tightness_limit(gamma: f64) -> f64 {
    1.0 + 2.0 / (2.0 * gamma + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_full_cluster_means_no_reduction() {
        let r = search_space_ratio(10, &[10]).unwrap();
        assert_eq!(r.n0_exact, r.n1_exact);
        assert!(r.ratio_log10.abs() < 1e-12);
    }

    #[test]
    fn four_vertices_two_pairs() {
        let r = search_space_ratio(4, &[2, 2]).unwrap();
        assert_eq!(r.n0_exact.unwrap(), BigUint::from(24u32));
        assert_eq!(r.n1_exact.unwrap(), BigUint::from(8u32));
        assert!((10f64.powf(r.ratio_log10) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn log_identity_holds() {
        let r = search_space_ratio(100, &[25, 25, 25, 25]).unwrap();
        assert!((r.ratio_log10 - (r.n0_log10 - r.n1_log10)).abs() < 1e-12);
    }

    #[test]
    fn headline_numbers() {
        let r = search_space_ratio(100, &[25, 25, 25, 25]).unwrap();
        let (mant, exp) = r.n1_scientific();
        assert_eq!(exp, 102);
        assert!((mant - 1.39).abs() < 0.01, "mantissa {mant}");
        let factor = r.reduction_factor();
        assert!((factor / 1.49e-56 - 1.0).abs() < 0.005, "factor {factor:e}");
    }

    #[test]
    fn oversized_sizes_rejected() {
        assert!(search_space_ratio(5, &[3, 3]).is_err());
        assert!(search_space_ratio(5, &[0]).is_err());
    }

    #[test]
    fn gap_is_one_without_clusters() {
        let g = MetricGraph::from_fn(6, |_, _| 2.0).unwrap();
        let r = measure_gap(&g, 1.5, Duration::from_secs(30)).unwrap();
        assert_eq!(r.cluster_count, 0);
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert!(r.within_bound);
    }

    #[test]
    fn tightness_single_point_matches_closed_form() {
        // n = 0 at separation 2: costs (2a+b) and (2a+3b)-2b with a=2, b=1.
        let curve = tightness_curve(2.0, 0).unwrap();
        assert_eq!(curve.len(), 1);
        assert!((curve[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limits() {
        assert!((tightness_limit(2.0) - 1.4).abs() < 1e-12);
        assert!(tightness_limit(1e9) < 1.0 + 1e-8);
    }
}
