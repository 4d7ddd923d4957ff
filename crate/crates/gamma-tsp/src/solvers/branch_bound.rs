//! Depth-first branch-and-bound with spanning-tree lower bounds.
//!
//! Subtours cannot arise because partial solutions are simple paths
//! extended from a fixed root. With a clustering attached, per-cluster
//! phase tracking rejects any extension that would split a cluster's
//! visit into separate runs, mirroring the degree restrictions an
//! integer-programming formulation would place on cluster boundaries.

use std::time::{Duration, Instant};

use crate::clustering::ClusterTree;
use crate::graph::MetricGraph;
use crate::solvers::{solve_heuristic, SolveReport, SolveStatus};
use crate::tours::{tour_cost, Tour, TourKind};

/// Visit phase of one cluster along the growing path.
///
/// Clusters containing the root may wrap across the cycle closure: they
/// begin `Prefix` (the path start is inside), fall to `Middle` once left,
/// and may re-enter once as `Suffix`, which must then last to the end.
/// Other clusters go `Before` -> `Inside` -> `After` with no re-entry.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Before,
    Inside,
    After,
    Prefix,
    Middle,
    Suffix,
}

struct ClusterState {
    member_mask: u32,
    size: u32,
    visited: u32,
    phase: Phase,
}

impl ClusterState {
    fn contains(&self, v: usize) -> bool {
        self.member_mask >> v & 1 == 1
    }

    /// Whether appending `v` keeps a consecutive visit reachable.
    fn allows(&self, v: usize) -> bool {
        match (self.contains(v), self.phase) {
            (true, Phase::After) => false,
            (false, Phase::Inside) => self.visited == self.size,
            (false, Phase::Suffix) => false,
            _ => true,
        }
    }

    fn apply(&mut self, v: usize) -> Phase {
        let old = self.phase;
        if self.contains(v) {
            self.visited += 1;
            self.phase = match self.phase {
                Phase::Before | Phase::Inside => Phase::Inside,
                Phase::Middle | Phase::Suffix => Phase::Suffix,
                keep @ (Phase::Prefix | Phase::After) => keep,
            };
        } else {
            self.phase = match self.phase {
                Phase::Inside => Phase::After,
                Phase::Prefix => Phase::Middle,
                keep => keep,
            };
        }
        old
    }

    fn undo(&mut self, v: usize, old: Phase) {
        if self.contains(v) {
            self.visited -= 1;
        }
        self.phase = old;
    }
}

struct Search<'a> {
    graph: &'a MetricGraph,
    n: usize,
    deadline: Option<Instant>,
    clusters: Vec<ClusterState>,
    path: Vec<usize>,
    visited_mask: u32,
    best_cost: f64,
    best_order: Vec<usize>,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    /// Path cost so far plus a minimum spanning tree over the unvisited
    /// vertices, plus the cheapest edge from each loose end of the path
    /// into the unvisited set. Any completion is a path from the current
    /// end through every unvisited vertex back to the start, which
    /// contains exactly such a structure, so this never overestimates.
    fn lower_bound(&self, cost_so_far: f64) -> f64 {
        let last = *self.path.last().unwrap();
        let members: Vec<usize> = (0..self.n)
            .filter(|&v| self.visited_mask >> v & 1 == 0)
            .collect();
        let k = members.len();
        if k == 0 {
            return cost_so_far + self.graph.weight(last, self.path[0]);
        }
        let mut in_tree = vec![false; k];
        let mut dist = vec![f64::INFINITY; k];
        dist[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..k {
            let mut u = usize::MAX;
            for i in 0..k {
                if !in_tree[i] && (u == usize::MAX || dist[i] < dist[u]) {
                    u = i;
                }
            }
            in_tree[u] = true;
            total += dist[u];
            for i in 0..k {
                if !in_tree[i] {
                    let w = self.graph.weight(members[u], members[i]);
                    if w < dist[i] {
                        dist[i] = w;
                    }
                }
            }
        }
        let attach = |end: usize| {
            members
                .iter()
                .map(|&v| self.graph.weight(end, v))
                .fold(f64::INFINITY, f64::min)
        };
        total += attach(last);
        if self.path.len() > 1 {
            total += attach(self.path[0]);
        } else if k > 1 {
            // Closing the cycle needs a second, distinct edge at the root.
            let mut lo = f64::INFINITY;
            let mut hi = f64::INFINITY;
            for &v in &members {
                let w = self.graph.weight(last, v);
                if w < lo {
                    hi = lo;
                    lo = w;
                } else if w < hi {
                    hi = w;
                }
            }
            total += hi;
        }
        cost_so_far + total
    }

    fn dfs(&mut self, cost_so_far: f64) {
        if self.timed_out {
            return;
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.timed_out = true;
                return;
            }
        }
        if self.path.len() == self.n {
            let total = cost_so_far + self.graph.weight(*self.path.last().unwrap(), self.path[0]);
            if total < self.best_cost - 1e-12 {
                self.best_cost = total;
                self.best_order = self.path.clone();
            }
            return;
        }
        if self.lower_bound(cost_so_far) >= self.best_cost - 1e-12 {
            return;
        }
        let last = *self.path.last().unwrap();
        let mut candidates: Vec<usize> = (0..self.n)
            .filter(|&v| self.visited_mask >> v & 1 == 0)
            .filter(|&v| self.clusters.iter().all(|c| c.allows(v)))
            .collect();
        candidates.sort_by(|&a, &b| {
            self.graph
                .weight(last, a)
                .partial_cmp(&self.graph.weight(last, b))
                .unwrap()
                .then(a.cmp(&b))
        });
        for v in candidates {
            self.nodes += 1;
            let old: Vec<Phase> = self.clusters.iter_mut().map(|c| c.apply(v)).collect();
            self.path.push(v);
            self.visited_mask |= 1 << v;
            self.dfs(cost_so_far + self.graph.weight(last, v));
            self.visited_mask &= !(1 << v);
            self.path.pop();
            for (c, o) in self.clusters.iter_mut().zip(old) {
                c.undo(v, o);
            }
            if self.timed_out {
                return;
            }
        }
    }
}

/// Exact solve by search from root vertex 0. With `clustering`, only
/// tours visiting every cluster consecutively are considered. Returns
/// the incumbent with a timeout status when the budget runs out.
pub fn branch_and_bound(
    graph: &MetricGraph,
    clustering: Option<&ClusterTree>,
    budget: Duration,
) -> SolveReport {
    let start = Instant::now();
    let n = graph.vertex_count();
    assert!(n <= 32, "branch_and_bound state uses 32-bit masks");
    let solver_name = if clustering.is_some() {
        "branch-bound-ctsp"
    } else {
        "branch-bound-tsp"
    };
    if n <= 2 {
        let tour = Tour {
            kind: TourKind::Cycle,
            order: (0..n).collect(),
        };
        let cost = tour_cost(graph, &tour);
        return SolveReport {
            tour,
            cost,
            status: SolveStatus::Optimal,
            nodes_expanded: 0,
            elapsed: start.elapsed(),
            solver_name: solver_name.into(),
        };
    }
    // Seed the incumbent so pruning has something to cut against.
    let warm = solve_heuristic(graph, clustering, Duration::from_millis(50), 0);
    let clusters = clustering
        .map(|tree| {
            tree.clusters()
                .iter()
                .map(|(set, _)| {
                    let mut mask = 0u32;
                    for v in set.iter() {
                        mask |= 1 << v;
                    }
                    let contains_root = set.contains(0);
                    ClusterState {
                        member_mask: mask,
                        size: set.len() as u32,
                        visited: if contains_root { 1 } else { 0 },
                        phase: if contains_root {
                            Phase::Prefix
                        } else {
                            Phase::Before
                        },
                    }
                })
                .collect()
        })
        .unwrap_or_default();
    let deadline = start.checked_add(budget);
    let mut search = Search {
        graph,
        n,
        deadline,
        clusters,
        path: vec![0],
        visited_mask: 1,
        best_cost: warm.cost,
        best_order: warm.tour.order.clone(),
        nodes: 0,
        timed_out: false,
    };
    search.dfs(0.0);
    let status = if search.timed_out {
        SolveStatus::FeasibleTimeout
    } else {
        SolveStatus::Optimal
    };
    let tour = Tour {
        kind: TourKind::Cycle,
        order: search.best_order.clone(),
    }
    .normalized();
    let cost = tour_cost(graph, &tour);
    SolveReport {
        tour,
        cost,
        status,
        nodes_expanded: search.nodes,
        elapsed: start.elapsed(),
        solver_name: solver_name.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::gamma_clustering;
    use crate::instances::gen_planted;
    use crate::solvers::{brute_force_tour, held_karp};
    use crate::tours::is_consecutive;

    fn budget() -> Duration {
        Duration::from_secs(60)
    }

    #[test]
    fn agrees_with_held_karp_unconstrained() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..8 {
            let n = rng.gen_range(5..10);
            let g = MetricGraph::from_fn(n, |_, _| rng.gen_range(1.0..10.0f64).round()).unwrap();
            let a = held_karp(&g);
            let b = branch_and_bound(&g, None, budget());
            assert!((a.cost - b.cost).abs() < 1e-9);
            assert_eq!(b.status, SolveStatus::Optimal);
        }
    }

    #[test]
    fn constrained_matches_filtered_brute_force() {
        for seed in 0..6 {
            let (g, tree) = gen_planted(&[3, 3, 2], 1.8, seed).unwrap();
            let exact = branch_and_bound(&g, Some(&tree), budget());
            let brute = brute_force_tour(&g, Some(&tree)).unwrap();
            assert!(
                (exact.cost - brute.cost).abs() < 1e-9,
                "seed {seed}: {} vs {}",
                exact.cost,
                brute.cost
            );
            for (set, _) in tree.clusters() {
                assert!(is_consecutive(&exact.tour, set));
            }
        }
    }

    #[test]
    fn constraint_covers_the_wrapping_cluster() {
        // A cluster containing the root vertex must be allowed to finish
        // across the cycle closure.
        let (g, tree) = gen_planted(&[4, 3], 2.0, 3).unwrap();
        assert!(tree.clusters().iter().any(|(s, _)| s.contains(0)));
        let exact = branch_and_bound(&g, Some(&tree), budget());
        let brute = brute_force_tour(&g, Some(&tree)).unwrap();
        assert!((exact.cost - brute.cost).abs() < 1e-9);
    }

    #[test]
    fn constraints_only_prune() {
        let (g, _) = gen_planted(&[4, 4], 2.0, 17).unwrap();
        let tree = gamma_clustering(&g, 2.0).unwrap();
        let with = branch_and_bound(&g, Some(&tree), budget());
        let without = branch_and_bound(&g, None, budget());
        assert!(with.nodes_expanded <= without.nodes_expanded);
        assert!(with.cost >= without.cost - 1e-9);
    }

    #[test]
    fn zero_budget_returns_incumbent() {
        let (g, _) = gen_planted(&[4, 4], 2.0, 2).unwrap();
        let r = branch_and_bound(&g, None, Duration::ZERO);
        assert_eq!(r.status, SolveStatus::FeasibleTimeout);
        assert_eq!(r.tour.order.len(), g.vertex_count());
    }
}
