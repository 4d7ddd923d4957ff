//! Exact TSP by dynamic programming over (visited set, endpoint) states.

use std::time::Instant;

use crate::graph::MetricGraph;
use crate::solvers::{SolveReport, SolveStatus, HELD_KARP_CAP};
use crate::tours::{tour_cost, Tour, TourKind};

/// Solves the instance to optimality in O(2^n n^2) time. Vertex 0 is the
/// fixed start; ties during reconstruction break toward lower vertex
/// indices and the reported tour is rotation-normalized.
///
/// Panics if the instance exceeds [`HELD_KARP_CAP`] vertices.
pub fn held_karp(graph: &MetricGraph) -> SolveReport {
    let n = graph.vertex_count();
    assert!(
        n <= HELD_KARP_CAP,
        "held_karp called with {n} > {HELD_KARP_CAP} vertices"
    );
    let start = Instant::now();
    let finish = |tour: Tour, nodes: u64| {
        let cost = tour_cost(graph, &tour);
        SolveReport {
            tour,
            cost,
            status: SolveStatus::Optimal,
            nodes_expanded: nodes,
            elapsed: start.elapsed(),
            solver_name: "held-karp".into(),
        }
    };
    if n <= 2 {
        let tour = Tour {
            kind: TourKind::Cycle,
            order: (0..n).collect(),
        };
        return finish(tour, 0);
    }

    // States range over subsets of vertices 1..n; vertex v maps to bit
    // v - 1. dp[mask * m + j] = cheapest path 0 -> (j+1) visiting exactly
    // the vertices of mask.
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = graph.weight(0, j + 1);
    }
    let mut nodes = 0u64;
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * m + j];
            if !cur.is_finite() {
                continue;
            }
            nodes += 1;
            let rest = full & !mask;
            let mut k_bits = rest;
            while k_bits != 0 {
                let k = k_bits.trailing_zeros() as usize;
                k_bits &= k_bits - 1;
                let next = mask | (1 << k);
                let cand = cur + graph.weight(j + 1, k + 1);
                let slot = next * m + k;
                if cand < dp[slot] {
                    dp[slot] = cand;
                    parent[slot] = j as u8;
                }
            }
        }
    }
    let mut best_j = 0;
    let mut best = f64::INFINITY;
    for j in 0..m {
        let total = dp[full * m + j] + graph.weight(j + 1, 0);
        if total < best {
            best = total;
            best_j = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = best_j;
    while mask != 0 {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    let tour = Tour {
        kind: TourKind::Cycle,
        order,
    }
    .normalized();
    finish(tour, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_the_unique_cycle() {
        let g = MetricGraph::from_weights(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ])
        .unwrap();
        let r = held_karp(&g);
        assert_eq!(r.cost, 6.0);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn unit_square_takes_the_perimeter() {
        let pts: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let g = MetricGraph::from_fn(4, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1))
            .unwrap();
        let r = held_karp(&g);
        assert!((r.cost - 4.0).abs() < 1e-12);
        assert_eq!(r.tour.normalized().order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn tiny_sizes_are_degenerate() {
        let g = MetricGraph::from_weights(vec![vec![0.0]]).unwrap();
        assert_eq!(held_karp(&g).cost, 0.0);
        let g2 = MetricGraph::from_weights(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(held_karp(&g2).cost, 6.0);
    }

    #[test]
    fn matches_permutation_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let n = rng.gen_range(4..9);
            let g = MetricGraph::from_fn(n, |_, _| rng.gen_range(1.0..10.0f64).round()).unwrap();
            let exact = held_karp(&g);
            let brute = crate::solvers::brute_force_tour(&g, None).unwrap();
            assert!((exact.cost - brute.cost).abs() < 1e-9);
        }
    }
}
