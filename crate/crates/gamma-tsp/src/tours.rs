//! Tours, consecutive-visit checking, the deform repair operation with
//! its cost accounting, the surcharged overlay graph used by the bound
//! tests, and the MST-doubling tour construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{cluster_metrics, ClusterTree};
use crate::graph::{MetricGraph, MetricState, VertexSet};

#[derive(Debug, Error)]
pub enum TourError {
    #[error("tour is empty")]
    Empty,
    #[error("tour repeats vertex {0}")]
    RepeatedVertex(usize),
    #[error("tour vertex {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },
    #[error("surcharged overlay is ambiguous under nested clusters")]
    NestedClustering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TourKind {
    Cycle,
    OpenPath,
}

/// A non-repeating vertex sequence, read cyclically or as an open path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub kind: TourKind,
    pub order: Vec<usize>,
}

/// The {kind, order, cost} JSON shape.
#[derive(Debug, Serialize, Deserialize)]
pub struct TourRecord {
    pub kind: TourKind,
    pub order: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    pub fn new(kind: TourKind, order: Vec<usize>, vertex_count: usize) -> Result<Self, TourError> {
        if order.is_empty() {
            return Err(TourError::Empty);
        }
        let mut seen = vec![false; vertex_count];
        for &v in &order {
            if v >= vertex_count {
                return Err(TourError::IndexOutOfRange {
                    index: v,
                    vertex_count,
                });
            }
            if seen[v] {
                return Err(TourError::RepeatedVertex(v));
            }
            seen[v] = true;
        }
        Ok(Self { kind, order })
    }

    pub fn cycle(order: Vec<usize>, vertex_count: usize) -> Result<Self, TourError> {
        Self::new(TourKind::Cycle, order, vertex_count)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The same cycle rotated and oriented canonically: starts at its
    /// smallest vertex and takes the lexicographically smaller direction.
    /// Open paths are returned with the smaller endpoint first.
    pub fn normalized(&self) -> Tour {
        match self.kind {
            TourKind::Cycle => {
                let n = self.order.len();
                let mut best: Option<Vec<usize>> = None;
                for dir in [false, true] {
                    let seq: Vec<usize> = if dir {
                        self.order.iter().rev().copied().collect()
                    } else {
                        self.order.clone()
                    };
                    let start = seq
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, v)| **v)
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    let rotated: Vec<usize> = (0..n).map(|i| seq[(start + i) % n]).collect();
                    if best.as_ref().is_none_or(|b| rotated < *b) {
                        best = Some(rotated);
                    }
                }
                Tour {
                    kind: TourKind::Cycle,
                    order: best.unwrap(),
                }
            }
            TourKind::OpenPath => {
                let mut order = self.order.clone();
                if order.first() > order.last() {
                    order.reverse();
                }
                Tour {
                    kind: TourKind::OpenPath,
                    order,
                }
            }
        }
    }

    pub fn record(&self, graph: &MetricGraph) -> TourRecord {
        TourRecord {
            kind: self.kind,
            order: self.order.clone(),
            cost: tour_cost(graph, self),
        }
    }

    /// TSPLIB-style tour text with 1-based vertex ids.
    pub fn to_tsplib(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("NAME: {name}\n"));
        out.push_str("TYPE: TOUR\n");
        out.push_str(&format!("DIMENSION: {}\n", self.order.len()));
        out.push_str("TOUR_SECTION\n");
        for &v in &self.order {
            out.push_str(&format!("{}\n", v + 1));
        }
        out.push_str("-1\nEOF\n");
        out
    }
}

/// Sum of consecutive edge weights; cycles include the closing edge.
pub fn tour_cost(graph: &MetricGraph, tour: &Tour) -> f64 {
    let mut cost: f64 = tour
        .order
        .windows(2)
        .map(|w| graph.weight(w[0], w[1]))
        .sum();
    if tour.kind == TourKind::Cycle && tour.order.len() > 1 {
        cost += graph.weight(*tour.order.last().unwrap(), tour.order[0]);
    }
    cost
}

/// Number of tour edges with exactly one endpoint in the cluster,
/// counting the closing edge for cycles.
pub fn inter_set_edges(tour: &Tour, cluster: &VertexSet) -> usize {
    let n = tour.order.len();
    let limit = match tour.kind {
        TourKind::Cycle if n > 1 => n,
        _ => n.saturating_sub(1),
    };
    (0..limit)
        .filter(|&i| cluster.contains(tour.order[i]) != cluster.contains(tour.order[(i + 1) % n]))
        .count()
}

/// True iff the visited members of the cluster form one contiguous run;
/// for cycles the run may wrap across the closing edge.
pub fn is_consecutive(tour: &Tour, cluster: &VertexSet) -> bool {
    let visited = tour.order.iter().filter(|v| cluster.contains(**v)).count();
    if visited <= 1 || visited == tour.order.len() {
        return true;
    }
    match tour.kind {
        TourKind::Cycle => inter_set_edges(tour, cluster) <= 2,
        TourKind::OpenPath => {
            let positions: Vec<usize> = tour
                .order
                .iter()
                .enumerate()
                .filter(|(_, v)| cluster.contains(**v))
                .map(|(i, _)| i)
                .collect();
            positions.last().unwrap() - positions[0] == positions.len() - 1
        }
    }
}

/// The cost accounting of one deform call. `extra_visits` is the `n`
/// with the input having `2(n + 1)` inter-set edges; when the base graph
/// is metric and the cluster's separation exceeds 1, the cost increase is
/// at most `(2n + 1) * beta`.
#[derive(Debug, Clone, Serialize)]
pub struct DeformReport {
    pub input_cost: f64,
    pub output_cost: f64,
    pub extra_visits: usize,
    /// `(2n + 1) * beta`; absent when the cluster is not a proper subset
    /// of size >= 2 (its beta is then undefined).
    pub bound: Option<f64>,
    /// False when the graph is known non-metric, in which case the bound
    /// value carries no guarantee.
    pub bound_applicable: bool,
}

fn compact_to_first_run(order: &[usize], cluster: &VertexSet) -> Vec<usize> {
    let first = order
        .iter()
        .position(|v| cluster.contains(*v))
        .expect("caller checked the cluster is visited");
    let mut out: Vec<usize> = order[..first].to_vec();
    out.extend(order.iter().filter(|v| cluster.contains(**v)));
    out.extend(order[first..].iter().filter(|v| !cluster.contains(**v)));
    out
}

/// Reorders the tour so the cluster's visited members become one
/// contiguous run, keeping the relative order of cluster vertices and of
/// the rest. Tours already visiting the cluster consecutively (cyclically,
/// for cycles) are returned untouched.
pub fn deform(graph: &MetricGraph, tour: &Tour, cluster: &VertexSet) -> (Tour, DeformReport) {
    let input_cost = tour_cost(graph, tour);
    let edges = inter_set_edges(tour, cluster);
    let extra_visits = (edges / 2).saturating_sub(1);
    let bound = cluster_metrics(graph, cluster)
        .ok()
        .map(|m| (2.0 * extra_visits as f64 + 1.0) * m.beta);
    let bound_applicable = graph.metric_state() != MetricState::ViolationsFound;
    if is_consecutive(tour, cluster) {
        let report = DeformReport {
            input_cost,
            output_cost: input_cost,
            extra_visits,
            bound,
            bound_applicable,
        };
        return (tour.clone(), report);
    }
    // For cycles, rotate so the sequence starts outside the cluster; a
    // non-member exists because a tour fully inside the cluster is
    // trivially consecutive.
    let order: Vec<usize> = match tour.kind {
        TourKind::Cycle => {
            let s = tour
                .order
                .iter()
                .position(|v| !cluster.contains(*v))
                .expect("non-consecutive tour has a vertex outside the cluster");
            let n = tour.order.len();
            (0..n).map(|i| tour.order[(s + i) % n]).collect()
        }
        TourKind::OpenPath => tour.order.clone(),
    };
    let out = Tour {
        kind: tour.kind,
        order: compact_to_first_run(&order, cluster),
    };
    let output_cost = tour_cost(graph, &out);
    (
        out,
        DeformReport {
            input_cost,
            output_cost,
            extra_visits,
            bound,
            bound_applicable,
        },
    )
}

/// Applies deform for every cluster of the tree, in the order given by
/// `cluster_order` (indices into the tree). The result visits every
/// cluster consecutively and does not depend on the order.
///
/// Order independence needs one fixed frame of reference: cycles are
/// rotated once, up front, to start at the smallest vertex belonging to
/// no cluster (when one exists), and each per-cluster pass then treats
/// the sequence as a plain array. If no pass changes anything the input
/// is returned as-is.
pub fn deform_all(tour: &Tour, clustering: &ClusterTree, cluster_order: &[usize]) -> Tour {
    let in_any = |v: usize| clustering.vertex_sets().any(|s| s.contains(v));
    let mut order: Vec<usize> = match tour.kind {
        TourKind::Cycle => {
            let free = tour
                .order
                .iter()
                .enumerate()
                .filter(|(_, v)| !in_any(**v))
                .min_by_key(|(_, v)| **v)
                .map(|(i, _)| i);
            match free {
                Some(s) => {
                    let n = tour.order.len();
                    (0..n).map(|i| tour.order[(s + i) % n]).collect()
                }
                None => tour.order.clone(),
            }
        }
        TourKind::OpenPath => tour.order.clone(),
    };
    let mut changed = false;
    for &ci in cluster_order {
        let cluster = &clustering.clusters()[ci].0;
        let block = {
            let positions: Vec<usize> = order
                .iter()
                .enumerate()
                .filter(|(_, v)| cluster.contains(**v))
                .map(|(i, _)| i)
                .collect();
            positions.is_empty() || positions.last().unwrap() - positions[0] == positions.len() - 1
        };
        if !block {
            order = compact_to_first_run(&order, cluster);
            changed = true;
        }
    }
    if changed {
        Tour {
            kind: tour.kind,
            order,
        }
    } else {
        tour.clone()
    }
}

/// The base graph with every edge between two different clusters
/// surcharged by `(3/2) * max(beta_i, beta_j)`. Vertices outside every
/// stored cluster count as singletons with beta = 0. Only defined for
/// non-nested clusterings.
pub struct ModifiedGraph<'a> {
    base: &'a MetricGraph,
    cluster_of: Vec<Option<usize>>,
    betas: Vec<f64>,
}

impl<'a> ModifiedGraph<'a> {
    pub fn new(base: &'a MetricGraph, clustering: &ClusterTree) -> Result<Self, TourError> {
        if !clustering.is_flat() {
            return Err(TourError::NestedClustering);
        }
        let mut cluster_of = vec![None; base.vertex_count()];
        let mut betas = Vec::with_capacity(clustering.len());
        for (ci, (set, m)) in clustering.clusters().iter().enumerate() {
            for v in set.iter() {
                cluster_of[v] = Some(ci);
            }
            betas.push(m.beta);
        }
        Ok(Self {
            base,
            cluster_of,
            betas,
        })
    }

    fn beta_at(&self, v: usize) -> f64 {
        self.cluster_of[v].map_or(0.0, |c| self.betas[c])
    }

    /// The surcharged weight of one edge.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        let w = self.base.weight(a, b);
        if self.cluster_of[a] == self.cluster_of[b] && self.cluster_of[a].is_some() {
            w
        } else {
            w + 1.5 * self.beta_at(a).max(self.beta_at(b))
        }
    }

    /// Tour cost under the surcharged weights.
    pub fn cost(&self, tour: &Tour) -> f64 {
        let mut cost: f64 = tour.order.windows(2).map(|w| self.weight(w[0], w[1])).sum();
        if tour.kind == TourKind::Cycle && tour.order.len() > 1 {
            cost += self.weight(*tour.order.last().unwrap(), tour.order[0]);
        }
        cost
    }
}

/// Builds a cycle over the given vertices by doubling the MST: duplicate
/// every tree edge, walk the resulting Euler tour, and keep each
/// vertex's first appearance. The result costs at most twice the MST
/// weight for any walk; the walk's root and branch order are chosen so
/// that every well-separated cluster of the induced graph stays
/// contiguous whenever some walk achieves that. On cluster-free graphs
/// this reduces to a plain preorder from the lowest vertex with branches
/// in ascending order.
pub fn mst_doubling_tour(graph: &MetricGraph, vertices: &VertexSet) -> Tour {
    if vertices.len() <= 1 {
        let order = vertices.members().to_vec();
        return Tour {
            kind: TourKind::Cycle,
            order,
        };
    }
    let sub = graph
        .induced_subgraph(vertices)
        .expect("non-empty vertex set");
    let k = sub.graph.vertex_count();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for e in sub.graph.minimum_spanning_tree() {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    // Every cluster separated above 1, in local indices; a laminar
    // family, each member spanning a connected piece of the tree.
    let family: Vec<VertexSet> = crate::clustering::gamma_clustering(&sub.graph, 1.0 + 1e-9)
        .map(|t| t.clusters().iter().map(|(s, _)| s.clone()).collect())
        .unwrap_or_default();
    // Prefer rooting the walk outside the clusters; try candidates until
    // one keeps every cluster contiguous.
    let mut roots: Vec<usize> = (0..k).collect();
    let depth = |v: usize| family.iter().filter(|s| s.contains(v)).count();
    roots.sort_by_key(|&v| (depth(v), v));
    let mut fallback: Option<Vec<usize>> = None;
    for &root in &roots {
        let order = preorder(&adj, &family, root);
        let local = Tour {
            kind: TourKind::Cycle,
            order,
        };
        if family.iter().all(|s| is_consecutive(&local, s)) {
            return relabel(local, &sub.to_parent);
        }
        fallback.get_or_insert(local.order);
    }
    relabel(
        Tour {
            kind: TourKind::Cycle,
            order: fallback.unwrap(),
        },
        &sub.to_parent,
    )
}

fn relabel(mut tour: Tour, to_parent: &[usize]) -> Tour {
    for v in &mut tour.order {
        *v = to_parent[*v];
    }
    tour
}

/// First-appearance order of an Euler walk from `root`. At each vertex
/// the branches sharing the most clusters with it are walked first, and
/// among those, branches that stay inside every shared cluster before
/// branches that escape one: an escaping branch re-emerges outside, so
/// anything after it would split the cluster.
fn preorder(adj: &[Vec<usize>], family: &[VertexSet], root: usize) -> Vec<usize> {
    let k = adj.len();
    // subtree[v] = vertices at or below v when rooted at `root`.
    let mut parent = vec![usize::MAX; k];
    let mut topo = Vec::with_capacity(k);
    let mut stack = vec![root];
    let mut seen = vec![false; k];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        topo.push(v);
        for &c in &adj[v] {
            if !seen[c] {
                seen[c] = true;
                parent[c] = v;
                stack.push(c);
            }
        }
    }
    let mut subtree: Vec<Vec<usize>> = (0..k).map(|v| vec![v]).collect();
    for &v in topo.iter().rev() {
        if parent[v] != usize::MAX {
            let own = subtree[v].clone();
            subtree[parent[v]].extend(own);
        }
    }
    // Walk with the branch ordering described above.
    let mut order = Vec::with_capacity(k);
    let mut visited = vec![false; k];
    let mut walk = vec![root];
    while let Some(v) = walk.pop() {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        order.push(v);
        let mut children: Vec<usize> = adj[v].iter().copied().filter(|&c| parent[c] == v).collect();
        children.sort_by_key(|&c| {
            let shared = family
                .iter()
                .filter(|s| s.contains(v) && s.contains(c))
                .count();
            let escapes = family
                .iter()
                .filter(|s| {
                    s.contains(v) && s.contains(c) && subtree[c].iter().any(|&u| !s.contains(u))
                })
                .count();
            (usize::MAX - shared, escapes, c)
        });
        for &c in children.iter().rev() {
            walk.push(c);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ClusterMetrics;

    fn triangle() -> MetricGraph {
        MetricGraph::from_weights(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 2.0],
            vec![3.0, 2.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn cycle_cost_sums_all_edges() {
        let g = triangle();
        let t = Tour::cycle(vec![0, 1, 2], 3).unwrap();
        assert_eq!(tour_cost(&g, &t), 6.0);
    }

    #[test]
    fn single_vertex_path_costs_zero() {
        let g = triangle();
        let t = Tour::new(TourKind::OpenPath, vec![1], 3).unwrap();
        assert_eq!(tour_cost(&g, &t), 0.0);
    }

    #[test]
    fn reversal_preserves_cycle_cost() {
        let g = MetricGraph::from_fn(5, |i, j| ((i * 3 + j) % 7 + 1) as f64).unwrap();
        let t = Tour::cycle(vec![0, 2, 4, 1, 3], 5).unwrap();
        let r = Tour::cycle(vec![3, 1, 4, 2, 0], 5).unwrap();
        assert_eq!(tour_cost(&g, &t), tour_cost(&g, &r));
    }

    #[test]
    fn tour_validation() {
        assert!(matches!(Tour::cycle(vec![], 3), Err(TourError::Empty)));
        assert!(matches!(
            Tour::cycle(vec![0, 0], 3),
            Err(TourError::RepeatedVertex(0))
        ));
        assert!(matches!(
            Tour::cycle(vec![0, 3], 3),
            Err(TourError::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn consecutive_block_detection() {
        let cl = VertexSet::new(vec![0, 1], 4).unwrap();
        let adjacent = Tour::cycle(vec![0, 1, 2, 3], 4).unwrap();
        assert!(is_consecutive(&adjacent, &cl));
        let split = Tour::cycle(vec![0, 2, 1, 3], 4).unwrap();
        assert!(!is_consecutive(&split, &cl));
        // Wraps across the closing edge of a cycle.
        let wrapped = Tour::cycle(vec![1, 2, 3, 0], 4).unwrap();
        assert!(is_consecutive(&wrapped, &cl));
        // But not across the ends of an open path.
        let path = Tour::new(TourKind::OpenPath, vec![1, 2, 3, 0], 4).unwrap();
        assert!(!is_consecutive(&path, &cl));
    }

    #[test]
    fn deform_moves_cluster_to_first_run() {
        let g = MetricGraph::from_fn(4, |_, _| 1.0).unwrap();
        let cl = VertexSet::new(vec![0, 2], 4).unwrap();
        let t = Tour::new(TourKind::OpenPath, vec![0, 1, 2, 3], 4).unwrap();
        let (out, _) = deform(&g, &t, &cl);
        assert_eq!(out.order, vec![0, 2, 1, 3]);
    }

    #[test]
    fn deform_early_return_leaves_tour_alone() {
        let g = MetricGraph::from_fn(4, |_, _| 1.0).unwrap();
        let cl = VertexSet::new(vec![1, 2], 4).unwrap();
        let t = Tour::new(TourKind::OpenPath, vec![0, 1, 2, 3], 4).unwrap();
        let (out, report) = deform(&g, &t, &cl);
        assert_eq!(out, t);
        assert_eq!(report.input_cost, report.output_cost);
    }

    #[test]
    fn deform_is_idempotent() {
        let g = MetricGraph::from_fn(6, |i, j| (1 + (i * 5 + j) % 4) as f64).unwrap();
        let cl = VertexSet::new(vec![1, 3, 5], 6).unwrap();
        let t = Tour::cycle(vec![0, 1, 2, 3, 4, 5], 6).unwrap();
        let (once, _) = deform(&g, &t, &cl);
        let (twice, _) = deform(&g, &once, &cl);
        assert_eq!(once, twice);
        assert!(is_consecutive(&once, &cl));
    }

    #[test]
    fn deform_all_order_independent_flat() {
        let g = MetricGraph::from_fn(7, |_, _| 1.0).unwrap();
        let a = VertexSet::new(vec![1, 4], 7).unwrap();
        let b = VertexSet::new(vec![2, 5], 7).unwrap();
        let c = VertexSet::new(vec![3, 6], 7).unwrap();
        let m = ClusterMetrics {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        };
        let tree = ClusterTree::from_clusters(1.5, vec![(a, m), (b, m), (c, m)]);
        let t = Tour::cycle(vec![0, 1, 2, 3, 4, 5, 6], 7).unwrap();
        let mut outputs = Vec::new();
        for perm in [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ] {
            let out = deform_all(&t, &tree, &perm);
            for (set, _) in tree.clusters() {
                assert!(is_consecutive(&out, set));
            }
            outputs.push(out);
        }
        for o in &outputs[1..] {
            assert_eq!(o, &outputs[0]);
        }
        let _ = g;
    }

    #[test]
    fn deform_all_handles_nesting() {
        let inner = VertexSet::new(vec![1, 2], 6).unwrap();
        let outer = VertexSet::new(vec![1, 2, 3, 4], 6).unwrap();
        let m = ClusterMetrics {
            alpha: 2.0,
            beta: 1.0,
            gamma: 2.0,
        };
        let tree = ClusterTree::from_clusters(1.5, vec![(inner, m), (outer, m)]);
        let t = Tour::cycle(vec![0, 1, 5, 3, 2, 4], 6).unwrap();
        for perm in [[0, 1], [1, 0]] {
            let out = deform_all(&t, &tree, &perm);
            for (set, _) in tree.clusters() {
                assert!(
                    is_consecutive(&out, set),
                    "perm {perm:?} broke {:?}",
                    set.members()
                );
            }
        }
    }

    #[test]
    fn deform_all_feasible_input_unchanged() {
        let a = VertexSet::new(vec![1, 2], 5).unwrap();
        let m = ClusterMetrics {
            alpha: 2.0,
            beta: 1.0,
            gamma: 2.0,
        };
        let tree = ClusterTree::from_clusters(1.5, vec![(a, m)]);
        let t = Tour::cycle(vec![3, 1, 2, 0, 4], 5).unwrap();
        assert_eq!(deform_all(&t, &tree, &[0]), t);
    }

    #[test]
    fn modified_cost_plain_inside_cluster() {
        let g = MetricGraph::from_fn(5, |_, _| 2.0).unwrap();
        let set = VertexSet::new(vec![0, 1, 2], 5).unwrap();
        let m = cluster_metrics(&g, &set).unwrap();
        let tree = ClusterTree::from_clusters(1.00001, vec![(set, m)]);
        let mg = ModifiedGraph::new(&g, &tree).unwrap();
        let inside = Tour::new(TourKind::OpenPath, vec![0, 1, 2], 5).unwrap();
        assert_eq!(mg.cost(&inside), tour_cost(&g, &inside));
    }

    #[test]
    fn modified_cost_surcharges_crossing_edges() {
        // Two clusters with beta 2 and 4; a crossing edge of base cost 10
        // contributes 10 + 1.5 * 4.
        let g = MetricGraph::from_fn(4, |i, j| match (i, j) {
            (0, 1) => 2.0,
            (2, 3) => 4.0,
            _ => 10.0,
        })
        .unwrap();
        let a = VertexSet::new(vec![0, 1], 4).unwrap();
        let b = VertexSet::new(vec![2, 3], 4).unwrap();
        let ma = cluster_metrics(&g, &a).unwrap();
        let mb = cluster_metrics(&g, &b).unwrap();
        let tree = ClusterTree::from_clusters(1.5, vec![(a, ma), (b, mb)]);
        let mg = ModifiedGraph::new(&g, &tree).unwrap();
        assert_eq!(mg.weight(1, 2), 16.0);
        assert_eq!(mg.weight(0, 1), 2.0);
    }

    #[test]
    fn modified_graph_rejects_nesting() {
        let g = MetricGraph::from_fn(5, |_, _| 1.0).unwrap();
        let inner = VertexSet::new(vec![0, 1], 5).unwrap();
        let outer = VertexSet::new(vec![0, 1, 2], 5).unwrap();
        let m = ClusterMetrics {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        };
        let tree = ClusterTree::from_clusters(1.5, vec![(inner, m), (outer, m)]);
        assert!(matches!(
            ModifiedGraph::new(&g, &tree),
            Err(TourError::NestedClustering)
        ));
    }

    #[test]
    fn mst_doubling_on_three_vertices_is_the_triangle() {
        let g = triangle();
        let t = mst_doubling_tour(&g, &g.all_vertices());
        assert_eq!(t.normalized().order, vec![0, 1, 2]);
        assert_eq!(t.order.len(), 3);
    }

    #[test]
    fn mst_doubling_cost_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(4..12);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
                .collect();
            let g = MetricGraph::from_fn(n, |i, j| {
                ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
            })
            .unwrap();
            let t = mst_doubling_tour(&g, &g.all_vertices());
            assert_eq!(t.order.len(), n);
            assert!(tour_cost(&g, &t) <= 2.0 * g.mst_weight() + 1e-9);
        }
    }

    #[test]
    fn tsplib_tour_text() {
        let t = Tour::cycle(vec![2, 0, 1], 3).unwrap();
        let text = t.to_tsplib("t");
        assert!(text.contains("TOUR_SECTION\n3\n1\n2\n-1\n"));
    }
}
