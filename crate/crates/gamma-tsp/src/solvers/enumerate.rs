//! Permutation enumeration: a brute-force optimal-tour oracle and the
//! feasible-tour counter, both with hard size caps.

use std::time::Instant;

use crate::clustering::ClusterTree;
use crate::graph::MetricGraph;
use crate::solvers::{SolveReport, SolveStatus, SolverError, BRUTE_FORCE_CAP, ENUMERATE_CAP};
use crate::tours::{is_consecutive, tour_cost, Tour, TourKind};

fn for_each_cycle(n: usize, mut visit: impl FnMut(&[usize])) {
    // Heap's algorithm over vertices 1..n with vertex 0 fixed in front.
    let mut order: Vec<usize> = (0..n).collect();
    let m = n - 1;
    let mut c = vec![0usize; m];
    visit(&order);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(1, i + 1);
            } else {
                order.swap(c[i] + 1, i + 1);
            }
            visit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn feasible(order: &[usize], clustering: Option<&ClusterTree>) -> bool {
    let Some(tree) = clustering else { return true };
    let probe = Tour {
        kind: TourKind::Cycle,
        order: order.to_vec(),
    };
    tree.vertex_sets().all(|set| is_consecutive(&probe, set))
}

/// Exhaustive minimum over all cyclic permutations, optionally restricted
/// to tours visiting every cluster consecutively. Capped at
/// [`BRUTE_FORCE_CAP`] vertices.
pub fn brute_force_tour(
    graph: &MetricGraph,
    clustering: Option<&ClusterTree>,
) -> Result<SolveReport, SolverError> {
    let n = graph.vertex_count();
    if n > BRUTE_FORCE_CAP {
        return Err(SolverError::TooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let start = Instant::now();
    if n <= 2 {
        let tour = Tour {
            kind: TourKind::Cycle,
            order: (0..n).collect(),
        };
        let cost = tour_cost(graph, &tour);
        return Ok(SolveReport {
            tour,
            cost,
            status: SolveStatus::Optimal,
            nodes_expanded: 0,
            elapsed: start.elapsed(),
            solver_name: "brute-force".into(),
        });
    }
    let mut best = f64::INFINITY;
    let mut best_order: Vec<usize> = Vec::new();
    let mut nodes = 0u64;
    for_each_cycle(n, |order| {
        nodes += 1;
        if !feasible(order, clustering) {
            return;
        }
        let mut cost = 0.0;
        for i in 0..n {
            cost += graph.weight(order[i], order[(i + 1) % n]);
        }
        if cost < best - 1e-12 {
            best = cost;
            best_order = order.to_vec();
        }
    });
    let tour = Tour {
        kind: TourKind::Cycle,
        order: best_order,
    }
    .normalized();
    let cost = tour_cost(graph, &tour);
    Ok(SolveReport {
        tour,
        cost,
        status: SolveStatus::Optimal,
        nodes_expanded: nodes,
        elapsed: start.elapsed(),
        solver_name: "brute-force".into(),
    })
}

/// Counts directed Hamiltonian cycles with vertex 0 fixed as the start
/// that satisfy every consecutiveness constraint. Both traversal
/// directions count separately. Capped at [`ENUMERATE_CAP`] vertices.
pub fn enumerate_feasible(
    graph: &MetricGraph,
    clustering: &ClusterTree,
) -> Result<u64, SolverError> {
    let n = graph.vertex_count();
    if n > ENUMERATE_CAP {
        return Err(SolverError::TooLarge {
            n,
            cap: ENUMERATE_CAP,
        });
    }
    if n == 1 {
        return Ok(1);
    }
    let mut count = 0u64;
    for_each_cycle(n, |order| {
        if feasible(order, Some(clustering)) {
            count += 1;
        }
    });
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{cluster_metrics, ClusterTree};
    use crate::graph::VertexSet;

    fn flat_tree(graph: &MetricGraph, sets: Vec<Vec<usize>>) -> ClusterTree {
        let clusters = sets
            .into_iter()
            .map(|s| {
                let set = VertexSet::new(s, graph.vertex_count()).unwrap();
                let m = cluster_metrics(graph, &set).unwrap();
                (set, m)
            })
            .collect();
        ClusterTree::from_clusters(1.5, clusters)
    }

    #[test]
    fn unconstrained_count_is_factorial() {
        let g = MetricGraph::from_fn(6, |_, _| 1.0).unwrap();
        let tree = ClusterTree::empty(1.5);
        assert_eq!(enumerate_feasible(&g, &tree).unwrap(), 120);
    }

    #[test]
    fn two_triples_match_closed_form() {
        let g = MetricGraph::from_fn(6, |_, _| 1.0).unwrap();
        let tree = flat_tree(&g, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        // With a fixed start and both directions counted, a partition
        // into blocks of sizes s_i admits (m-1)! * prod(s_i!) cycles:
        // here 1! * 3! * 3! = 36.
        assert_eq!(enumerate_feasible(&g, &tree).unwrap(), 36);
    }

    #[test]
    fn size_cap_enforced() {
        let g = MetricGraph::from_fn(11, |_, _| 1.0).unwrap();
        assert!(enumerate_feasible(&g, &ClusterTree::empty(2.0)).is_err());
        let g13 = MetricGraph::from_fn(13, |_, _| 1.0).unwrap();
        assert!(brute_force_tour(&g13, None).is_err());
    }

    #[test]
    fn brute_force_square() {
        let pts = [(0.0f64, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let g = MetricGraph::from_fn(4, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1))
            .unwrap();
        let r = brute_force_tour(&g, None).unwrap();
        assert!((r.cost - 4.0).abs() < 1e-12);
    }
}
