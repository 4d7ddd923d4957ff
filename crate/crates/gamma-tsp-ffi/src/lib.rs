//! C ABI over the gamma-tsp library.
//!
//! All types cross the boundary as opaque handles created and released
//! by `gt_*` functions; every fallible call returns a [`GtStatus`] and
//! leaves a human-readable message for [`gt_last_error`] on failure.
//! The matching declarations live in `include/gamma_tsp.h`, which is
//! maintained by hand and kept in sync by a test in this crate.
//!
//! Thread safety: handles are not synchronized; a handle may only be
//! used by one thread at a time. The error message store is
//! thread-local, so concurrent calls on different threads are fine.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use gamma_tsp::clustering::gamma_clustering;
use gamma_tsp::instances::{instance_to_graph, parse_tsplib};
use gamma_tsp::{
    solve_exact_ctsp, solve_exact_tsp, solve_heuristic, ClusterTree, MetricGraph, SolveReport,
    SolveStatus,
};

/// Result code of a fallible `gt_*` call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GtStatus {
    GtOk = 0,
    GtNullArgument = 1,
    GtInvalidArgument = 2,
    GtParseError = 3,
    GtSolveError = 4,
    GtPanic = 5,
}

/// Opaque complete weighted graph handle.
pub struct GtGraph(MetricGraph);

/// Opaque clustering handle: the maximal family at some threshold.
pub struct GtClustering(ClusterTree);

/// Opaque solve-report handle: tour, cost, and solver counters.
pub struct GtReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: GtStatus, message: impl Into<String>) -> GtStatus {
    set_error(message.into());
    status
}

/// Message for the most recent failure on this thread, or null if no
/// `gt_*` call has failed yet. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn gt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |message| message.as_ptr())
    })
}

fn guarded(body: impl FnOnce() -> GtStatus) -> GtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(GtStatus::GtPanic, format!("internal panic: {message}"))
        }
    }
}

/// Parses a TSPLIB-format document into a graph handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid
/// pointer; on success `*out` owns the graph until `gt_graph_free`.
#[no_mangle]
pub unsafe extern "C" fn gt_graph_parse_tsplib(
    text: *const c_char,
    out: *mut *mut GtGraph,
) -> GtStatus {
    if text.is_null() || out.is_null() {
        return fail(
            GtStatus::GtNullArgument,
            "gt_graph_parse_tsplib: null argument",
        );
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(
            GtStatus::GtInvalidArgument,
            "gt_graph_parse_tsplib: text is not UTF-8",
        );
    };
    guarded(
        || match parse_tsplib(text).and_then(|inst| instance_to_graph(&inst)) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(GtGraph(graph)));
                GtStatus::GtOk
            }
            Err(err) => fail(GtStatus::GtParseError, err.to_string()),
        },
    )
}

/// Builds a graph from a row-major `n` by `n` symmetric weight matrix.
///
/// # Safety
/// `weights` must point to `n * n` doubles and `out` must be valid; on
/// success `*out` owns the graph until `gt_graph_free`.
#[no_mangle]
pub unsafe extern "C" fn gt_graph_from_weights(
    n: usize,
    weights: *const f64,
    out: *mut *mut GtGraph,
) -> GtStatus {
    if weights.is_null() || out.is_null() {
        return fail(
            GtStatus::GtNullArgument,
            "gt_graph_from_weights: null argument",
        );
    }
    let flat = std::slice::from_raw_parts(weights, n * n);
    guarded(|| {
        let rows: Vec<Vec<f64>> = flat.chunks(n).map(<[f64]>::to_vec).collect();
        match MetricGraph::from_weights(rows) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(GtGraph(graph)));
                GtStatus::GtOk
            }
            Err(err) => fail(GtStatus::GtInvalidArgument, err.to_string()),
        }
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_graph_vertex_count(graph: *const GtGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// Writes the edge weight between `a` and `b` to `out`.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_graph_weight(
    graph: *const GtGraph,
    a: usize,
    b: usize,
    out: *mut f64,
) -> GtStatus {
    let (Some(graph), false) = (graph.as_ref(), out.is_null()) else {
        return fail(GtStatus::GtNullArgument, "gt_graph_weight: null argument");
    };
    let n = graph.0.vertex_count();
    if a >= n || b >= n {
        return fail(
            GtStatus::GtInvalidArgument,
            format!("gt_graph_weight: vertex out of range (n = {n})"),
        );
    }
    *out = graph.0.weight(a, b);
    GtStatus::GtOk
}

/// Releases a graph handle; null is ignored.
///
/// # Safety
/// `graph` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_graph_free(graph: *mut GtGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Computes the maximal clustering of `graph` at threshold `gamma`.
///
/// # Safety
/// `graph` must be a live handle and `out` valid; on success `*out`
/// owns the clustering until `gt_clustering_free`.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_compute(
    graph: *const GtGraph,
    gamma: f64,
    out: *mut *mut GtClustering,
) -> GtStatus {
    let (Some(graph), false) = (graph.as_ref(), out.is_null()) else {
        return fail(
            GtStatus::GtNullArgument,
            "gt_clustering_compute: null argument",
        );
    };
    guarded(|| match gamma_clustering(&graph.0, gamma) {
        Ok(tree) => {
            *out = Box::into_raw(Box::new(GtClustering(tree)));
            GtStatus::GtOk
        }
        Err(err) => fail(GtStatus::GtInvalidArgument, err.to_string()),
    })
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `clustering` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_len(clustering: *const GtClustering) -> usize {
    clustering.as_ref().map_or(0, |c| c.0.len())
}

/// Writes the member count of cluster `index` to `out`.
///
/// # Safety
/// `clustering` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_cluster_size(
    clustering: *const GtClustering,
    index: usize,
    out: *mut usize,
) -> GtStatus {
    let (Some(clustering), false) = (clustering.as_ref(), out.is_null()) else {
        return fail(
            GtStatus::GtNullArgument,
            "gt_clustering_cluster_size: null argument",
        );
    };
    match clustering.0.clusters().get(index) {
        Some((set, _)) => {
            *out = set.len();
            GtStatus::GtOk
        }
        None => fail(
            GtStatus::GtInvalidArgument,
            format!("gt_clustering_cluster_size: index {index} out of range"),
        ),
    }
}

/// Copies the sorted vertex indices of cluster `index` into `buffer`.
/// `capacity` must be at least the cluster size.
///
/// # Safety
/// `clustering` must be a live handle and `buffer` must point to at
/// least `capacity` writable elements.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_cluster_members(
    clustering: *const GtClustering,
    index: usize,
    buffer: *mut usize,
    capacity: usize,
) -> GtStatus {
    let (Some(clustering), false) = (clustering.as_ref(), buffer.is_null()) else {
        return fail(
            GtStatus::GtNullArgument,
            "gt_clustering_cluster_members: null argument",
        );
    };
    let Some((set, _)) = clustering.0.clusters().get(index) else {
        return fail(
            GtStatus::GtInvalidArgument,
            format!("gt_clustering_cluster_members: index {index} out of range"),
        );
    };
    if capacity < set.len() {
        return fail(
            GtStatus::GtInvalidArgument,
            format!(
                "gt_clustering_cluster_members: capacity {capacity} below cluster size {}",
                set.len()
            ),
        );
    }
    let members = set.members();
    std::ptr::copy_nonoverlapping(members.as_ptr(), buffer, members.len());
    GtStatus::GtOk
}

/// Writes the separation ratio of cluster `index` to `out`.
///
/// # Safety
/// `clustering` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_cluster_gamma(
    clustering: *const GtClustering,
    index: usize,
    out: *mut f64,
) -> GtStatus {
    let (Some(clustering), false) = (clustering.as_ref(), out.is_null()) else {
        return fail(
            GtStatus::GtNullArgument,
            "gt_clustering_cluster_gamma: null argument",
        );
    };
    match clustering.0.clusters().get(index) {
        Some((_, metrics)) => {
            *out = metrics.gamma;
            GtStatus::GtOk
        }
        None => fail(
            GtStatus::GtInvalidArgument,
            format!("gt_clustering_cluster_gamma: index {index} out of range"),
        ),
    }
}

/// Releases a clustering handle; null is ignored.
///
/// # Safety
/// `clustering` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_clustering_free(clustering: *mut GtClustering) {
    if !clustering.is_null() {
        drop(Box::from_raw(clustering));
    }
}

/// Solver selector for [`gt_solve`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GtSolver {
    /// Exact, honoring the clustering's consecutiveness constraints.
    GtSolverExact = 0,
    /// Nearest-neighbor plus 2-opt, repaired to constraint feasibility.
    GtSolverHeuristic = 1,
    /// Exact on the plain unconstrained problem; ignores `clustering`.
    GtSolverTsp = 2,
}

/// Solves `graph`, optionally constrained by `clustering` (nullable).
///
/// # Safety
/// `graph` must be a live handle, `clustering` null or a live handle,
/// and `out` valid; on success `*out` owns the report until
/// `gt_report_free`.
#[no_mangle]
pub unsafe extern "C" fn gt_solve(
    graph: *const GtGraph,
    clustering: *const GtClustering,
    solver: GtSolver,
    budget_secs: f64,
    seed: u64,
    out: *mut *mut GtReport,
) -> GtStatus {
    let (Some(graph), false) = (graph.as_ref(), out.is_null()) else {
        return fail(GtStatus::GtNullArgument, "gt_solve: null argument");
    };
    if !(budget_secs > 0.0 && budget_secs.is_finite()) {
        return fail(
            GtStatus::GtInvalidArgument,
            format!("gt_solve: budget_secs must be positive and finite (got {budget_secs})"),
        );
    }
    let clustering = clustering.as_ref().map(|c| &c.0);
    let budget = Duration::from_secs_f64(budget_secs);
    guarded(|| {
        let solved = match (solver, clustering) {
            (GtSolver::GtSolverExact, Some(tree)) => solve_exact_ctsp(&graph.0, tree, budget),
            (GtSolver::GtSolverExact, None) | (GtSolver::GtSolverTsp, _) => {
                solve_exact_tsp(&graph.0, budget)
            }
            (GtSolver::GtSolverHeuristic, tree) => {
                Ok(solve_heuristic(&graph.0, tree, budget, seed))
            }
        };
        match solved {
            Ok(report) => {
                *out = Box::into_raw(Box::new(GtReport(report)));
                GtStatus::GtOk
            }
            Err(err) => fail(GtStatus::GtSolveError, err.to_string()),
        }
    })
}

/// Tour cost, or NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_report_cost(report: *const GtReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.cost)
}

/// Solve status: 0 optimal, 1 feasible but budget-limited,
/// 2 infeasible, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_report_status(report: *const GtReport) -> i32 {
    report.as_ref().map_or(-1, |r| match r.0.status {
        SolveStatus::Optimal => 0,
        SolveStatus::FeasibleTimeout => 1,
        SolveStatus::Infeasible => 2,
    })
}

/// Search nodes expanded, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_report_nodes_expanded(report: *const GtReport) -> u64 {
    report.as_ref().map_or(0, |r| r.0.nodes_expanded)
}

/// Number of vertices in the tour, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_report_tour_len(report: *const GtReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.tour.order.len())
}

/// Copies the tour's vertex order into `buffer`. `capacity` must be at
/// least `gt_report_tour_len(report)`.
///
/// # Safety
/// `report` must be a live handle and `buffer` must point to at least
/// `capacity` writable elements.
#[no_mangle]
pub unsafe extern "C" fn gt_report_tour(
    report: *const GtReport,
    buffer: *mut usize,
    capacity: usize,
) -> GtStatus {
    let (Some(report), false) = (report.as_ref(), buffer.is_null()) else {
        return fail(GtStatus::GtNullArgument, "gt_report_tour: null argument");
    };
    let order = &report.0.tour.order;
    if capacity < order.len() {
        return fail(
            GtStatus::GtInvalidArgument,
            format!(
                "gt_report_tour: capacity {capacity} below tour length {}",
                order.len()
            ),
        );
    }
    std::ptr::copy_nonoverlapping(order.as_ptr(), buffer, order.len());
    GtStatus::GtOk
}

/// Releases a report handle; null is ignored.
///
/// # Safety
/// `report` must be null or an unreleased handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gt_report_free(report: *mut GtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
