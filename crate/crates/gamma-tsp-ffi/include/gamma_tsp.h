/* C interface to the gamma-tsp clustering and solving library.
 *
 * Every handle type is opaque: create it with a gt_* constructor, pass
 * it back by pointer, and release it with the matching gt_*_free. All
 * fallible calls return a GtStatus; on failure, gt_last_error() holds a
 * message valid until the next failing call on the same thread.
 *
 * Handles are not synchronized; use each handle from one thread at a
 * time. Kept in sync with the Rust definitions by a test in the
 * gamma-tsp-ffi crate.
 */

#ifndef GAMMA_TSP_H
#define GAMMA_TSP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Result code of a fallible gt_* call. */
typedef enum GtStatus {
  GT_OK = 0,
  GT_NULL_ARGUMENT = 1,
  GT_INVALID_ARGUMENT = 2,
  GT_PARSE_ERROR = 3,
  GT_SOLVE_ERROR = 4,
  GT_PANIC = 5,
} GtStatus;

/* Solver selector for gt_solve. */
typedef enum GtSolver {
  /* Exact, honoring the clustering's consecutiveness constraints. */
  GT_SOLVER_EXACT = 0,
  /* Nearest-neighbor plus 2-opt, repaired to constraint feasibility. */
  GT_SOLVER_HEURISTIC = 1,
  /* Exact on the plain unconstrained problem; ignores the clustering. */
  GT_SOLVER_TSP = 2,
} GtSolver;

/* Opaque complete weighted graph handle. */
typedef struct GtGraph GtGraph;

/* Opaque clustering handle: the maximal family at some threshold. */
typedef struct GtClustering GtClustering;

/* Opaque solve-report handle: tour, cost, and solver counters. */
typedef struct GtReport GtReport;

/* Message for the most recent failure on this thread, or NULL if no
 * gt_* call has failed yet. */
const char *gt_last_error(void);

/* Parses a TSPLIB-format document into a graph handle. */
GtStatus gt_graph_parse_tsplib(const char *text, GtGraph **out);

/* Builds a graph from a row-major n-by-n symmetric weight matrix. */
GtStatus gt_graph_from_weights(size_t n, const double *weights, GtGraph **out);

/* Number of vertices, or 0 for a null handle. */
size_t gt_graph_vertex_count(const GtGraph *graph);

/* Writes the edge weight between a and b to out. */
GtStatus gt_graph_weight(const GtGraph *graph, size_t a, size_t b, double *out);

/* Releases a graph handle; NULL is ignored. */
void gt_graph_free(GtGraph *graph);

/* Computes the maximal clustering of graph at threshold gamma (> 1). */
GtStatus gt_clustering_compute(const GtGraph *graph, double gamma,
                               GtClustering **out);

/* Number of clusters, or 0 for a null handle. */
size_t gt_clustering_len(const GtClustering *clustering);

/* Writes the member count of cluster `index` to out. */
GtStatus gt_clustering_cluster_size(const GtClustering *clustering,
                                    size_t index, size_t *out);

/* Copies the sorted vertex indices of cluster `index` into buffer;
 * capacity must be at least the cluster size. */
GtStatus gt_clustering_cluster_members(const GtClustering *clustering,
                                       size_t index, size_t *buffer,
                                       size_t capacity);

/* Writes the separation ratio of cluster `index` to out. */
GtStatus gt_clustering_cluster_gamma(const GtClustering *clustering,
                                     size_t index, double *out);

/* Releases a clustering handle; NULL is ignored. */
void gt_clustering_free(GtClustering *clustering);

/* Solves graph, optionally constrained by clustering (nullable).
 * budget_secs must be positive; seed feeds the heuristic solver. */
GtStatus gt_solve(const GtGraph *graph, const GtClustering *clustering,
                  GtSolver solver, double budget_secs, uint64_t seed,
                  GtReport **out);

/* Tour cost, or NaN for a null handle. */
double gt_report_cost(const GtReport *report);

/* Solve status: 0 optimal, 1 feasible but budget-limited, 2 infeasible,
 * -1 for a null handle. */
int32_t gt_report_status(const GtReport *report);

/* Search nodes expanded, or 0 for a null handle. */
uint64_t gt_report_nodes_expanded(const GtReport *report);

/* Number of vertices in the tour, or 0 for a null handle. */
size_t gt_report_tour_len(const GtReport *report);

/* Copies the tour's vertex order into buffer; capacity must be at
 * least gt_report_tour_len(report). */
GtStatus gt_report_tour(const GtReport *report, size_t *buffer,
                        size_t capacity);

/* Releases a report handle; NULL is ignored. */
void gt_report_free(GtReport *report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GAMMA_TSP_H */
