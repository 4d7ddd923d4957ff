//! Complete weighted graphs, metric validation, and minimum spanning trees.

use std::sync::atomic::{AtomicU8, Ordering};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("weight matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("asymmetric weights at ({a}, {b}): {w_ab} vs {w_ba}")]
    Asymmetric {
        a: usize,
        b: usize,
        w_ab: f64,
        w_ba: f64,
    },
    #[error("nonzero diagonal at vertex {0}")]
    NonzeroDiagonal(usize),
    #[error("negative weight {w} at ({a}, {b})")]
    Negative { a: usize, b: usize, w: f64 },
    #[error("empty induced subgraph")]
    EmptySubset,
    #[error("vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },
    #[error("duplicate vertex index {0} in vertex set")]
    DuplicateIndex(usize),
}

/// Result of the most recent triangle-inequality scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricState {
    Unchecked,
    Metric,
    ViolationsFound,
}

/// A sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    /// Builds a set from arbitrary indices, sorting and rejecting
    /// duplicates or out-of-range entries.
    pub fn new(mut members: Vec<usize>, vertex_count: usize) -> Result<Self, GraphError> {
        members.sort_unstable();
        for pair in members.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::DuplicateIndex(pair[0]));
            }
        }
        if let Some(&last) = members.last() {
            if last >= vertex_count {
                return Err(GraphError::IndexOutOfRange {
                    index: last,
                    vertex_count,
                });
            }
        }
        Ok(Self { members })
    }

    /// Internal constructor for indices already known to be sorted and unique.
    pub(crate) fn from_sorted_unchecked(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// True if `self ⊆ other`.
    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }

    /// True if the two sets share no vertex.
    pub fn is_disjoint_from(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| !other.contains(v))
    }
}

/// An edge of a spanning tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// A complete symmetric weighted graph with non-negative weights and a
/// zero diagonal. Immutable after construction; all operations are pure.
#[derive(Debug)]
pub struct MetricGraph {
    n: usize,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
    integral: bool,
    metric_state: AtomicU8,
}

impl Clone for MetricGraph {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            weights: self.weights.clone(),
            labels: self.labels.clone(),
            integral: self.integral,
            metric_state: AtomicU8::new(self.metric_state.load(Ordering::Relaxed)),
        }
    }
}

/// An induced subgraph together with the map from its local indices back
/// to the parent graph's vertex indices.
#[derive(Debug, Clone)]
pub struct InducedSubgraph {
    pub graph: MetricGraph,
    pub to_parent: Vec<usize>,
}

const STATE_UNCHECKED: u8 = 0;
const STATE_METRIC: u8 = 1;
const STATE_VIOLATIONS: u8 = 2;

impl MetricGraph {
    /// Builds a graph from a full square weight matrix, validating
    /// symmetry, zero diagonal, and non-negativity.
    pub fn from_weights(rows: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
        }
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let w = rows[i][j];
                if i == j {
                    if w != 0.0 {
                        return Err(GraphError::NonzeroDiagonal(i));
                    }
                } else {
                    if w < 0.0 {
                        return Err(GraphError::Negative { a: i, b: j, w });
                    }
                    if rows[j][i] != w {
                        return Err(GraphError::Asymmetric {
                            a: i,
                            b: j,
                            w_ab: w,
                            w_ba: rows[j][i],
                        });
                    }
                }
                weights[i * n + j] = w;
            }
        }
        Ok(Self::from_flat_unchecked(n, weights, None))
    }

    /// Builds a graph by evaluating `weight(i, j)` for `i < j`.
    pub fn from_fn(
        n: usize,
        mut weight: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = weight(i, j);
                if w < 0.0 {
                    return Err(GraphError::Negative { a: i, b: j, w });
                }
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Ok(Self::from_flat_unchecked(n, weights, None))
    }

    fn from_flat_unchecked(n: usize, weights: Vec<f64>, labels: Option<Vec<String>>) -> Self {
        let integral = weights
            .iter()
            .all(|w| w.fract() == 0.0 && w.abs() < 2f64.powi(53));
        Self {
            n,
            weights,
            labels,
            integral,
            metric_state: AtomicU8::new(STATE_UNCHECKED),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.n + b]
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    /// True if every weight is an exactly representable integer. Gamma
    /// threshold comparisons then use exact cross-multiplication.
    pub fn weights_are_integral(&self) -> bool {
        self.integral
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, &w| m.max(w))
    }

    /// Default triangle-inequality tolerance: `1e-9 ×` the largest edge
    /// weight. TSPLIB's rounded distances can violate metricity by up to
    /// a unit, so callers wanting strictness should pass `0.0`.
    pub fn default_metric_tolerance(&self) -> f64 {
        1e-9 * self.max_weight()
    }

    pub fn metric_state(&self) -> MetricState {
        match self.metric_state.load(Ordering::Relaxed) {
            STATE_METRIC => MetricState::Metric,
            STATE_VIOLATIONS => MetricState::ViolationsFound,
            _ => MetricState::Unchecked,
        }
    }

    /// Scans all ordered triples for triangle-inequality violations
    /// `w(a,c) > w(a,b) + w(b,c) + tol` and records the outcome on the
    /// graph. Reports rather than rejects.
    pub fn check_metric(&self, tol: f64) -> Vec<(usize, usize, usize)> {
        let mut violations = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if b == a {
                    continue;
                }
                for c in 0..self.n {
                    if c == a || c == b {
                        continue;
                    }
                    if self.weight(a, c) > self.weight(a, b) + self.weight(b, c) + tol {
                        violations.push((a, b, c));
                    }
                }
            }
        }
        let state = if violations.is_empty() {
            STATE_METRIC
        } else {
            STATE_VIOLATIONS
        };
        self.metric_state.store(state, Ordering::Relaxed);
        violations
    }

    /// Extracts the complete subgraph on `subset`, re-indexed from zero.
    /// The returned map recovers the original indices.
    pub fn induced_subgraph(&self, subset: &VertexSet) -> Result<InducedSubgraph, GraphError> {
        if subset.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        if let Some(&max) = subset.members().last() {
            if max >= self.n {
                return Err(GraphError::IndexOutOfRange {
                    index: max,
                    vertex_count: self.n,
                });
            }
        }
        let to_parent: Vec<usize> = subset.members().to_vec();
        let k = to_parent.len();
        let mut weights = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                weights[i * k + j] = self.weight(to_parent[i], to_parent[j]);
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| to_parent.iter().map(|&v| l[v].clone()).collect());
        Ok(InducedSubgraph {
            graph: Self::from_flat_unchecked(k, weights, labels),
            to_parent,
        })
    }

    /// Prim's algorithm with an adjacency-matrix scan, O(n²). Ties are
    /// broken by the smallest vertex index (both in the choice of the
    /// next vertex and by keeping the first-found parent), so the output
    /// is deterministic even with repeated weights.
    pub fn minimum_spanning_tree(&self) -> Vec<MstEdge> {
        let n = self.n;
        let mut in_tree = vec![false; n];
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        dist[0] = 0.0;
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if !in_tree[v] && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            in_tree[u] = true;
            if parent[u] != usize::MAX {
                edges.push(MstEdge {
                    a: parent[u].min(u),
                    b: parent[u].max(u),
                    weight: dist[u],
                });
            }
            for v in 0..n {
                let w = self.weight(u, v);
                if !in_tree[v] && w < dist[v] {
                    dist[v] = w;
                    parent[v] = u;
                }
            }
        }
        edges
    }

    /// Total MST weight; convenience for tests and bounds.
    pub fn mst_weight(&self) -> f64 {
        self.minimum_spanning_tree().iter().map(|e| e.weight).sum()
    }

    /// The full vertex set of this graph.
    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::from_sorted_unchecked((0..self.n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(ab: f64, bc: f64, ac: f64) -> MetricGraph {
        MetricGraph::from_weights(vec![
            vec![0.0, ab, ac],
            vec![ab, 0.0, bc],
            vec![ac, bc, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn check_metric_equality_boundary() {
        let g = triangle(1.0, 1.0, 2.0);
        assert!(g.check_metric(0.0).is_empty());
        assert_eq!(g.metric_state(), MetricState::Metric);
    }

    #[test]
    fn check_metric_reports_violation() {
        let g = triangle(1.0, 1.0, 3.0);
        let violations = g.check_metric(0.0);
        assert!(violations.contains(&(0, 1, 2)));
        assert_eq!(g.metric_state(), MetricState::ViolationsFound);
    }

    #[test]
    fn induced_subgraph_identity() {
        let g = triangle(1.0, 2.0, 3.0);
        let sub = g.induced_subgraph(&g.all_vertices()).unwrap();
        assert_eq!(sub.graph.vertex_count(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(sub.graph.weight(i, j), g.weight(i, j));
            }
        }
    }

    #[test]
    fn induced_subgraph_pair() {
        let g = MetricGraph::from_fn(4, |i, j| (i + j) as f64).unwrap();
        let s = VertexSet::new(vec![0, 2], 4).unwrap();
        let sub = g.induced_subgraph(&s).unwrap();
        assert_eq!(sub.graph.vertex_count(), 2);
        assert_eq!(sub.graph.weight(0, 1), g.weight(0, 2));
        assert_eq!(sub.to_parent, vec![0, 2]);
    }

    #[test]
    fn induced_subgraph_empty_errors() {
        let g = triangle(1.0, 1.0, 1.0);
        let s = VertexSet::new(vec![], 3).unwrap();
        assert!(matches!(
            g.induced_subgraph(&s),
            Err(GraphError::EmptySubset)
        ));
    }

    #[test]
    fn mst_triangle_takes_two_smallest() {
        let g = triangle(1.0, 2.0, 3.0);
        let mst = g.minimum_spanning_tree();
        assert_eq!(mst.len(), 2);
        let total: f64 = mst.iter().map(|e| e.weight).sum();
        assert_eq!(total, 3.0);
    }

    #[test]
    fn mst_single_vertex() {
        let g = MetricGraph::from_weights(vec![vec![0.0]]).unwrap();
        assert!(g.minimum_spanning_tree().is_empty());
    }

    #[test]
    fn mst_matches_brute_force_enumeration() {
        // n = 6: enumerate all spanning trees via Prüfer sequences (6^4).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 6usize;
        let g = MetricGraph::from_fn(n, |_, _| rng.gen_range(1.0..10.0)).unwrap();
        let mut best = f64::INFINITY;
        let total = n.pow(n as u32 - 2);
        for code in 0..total {
            let mut pruefer = Vec::with_capacity(n - 2);
            let mut c = code;
            for _ in 0..n - 2 {
                pruefer.push(c % n);
                c /= n;
            }
            let mut degree = vec![1usize; n];
            for &p in &pruefer {
                degree[p] += 1;
            }
            let mut weight = 0.0;
            let mut deg = degree.clone();
            let mut used = vec![false; n];
            for &p in &pruefer {
                let leaf = (0..n).find(|&v| deg[v] == 1 && !used[v]).unwrap();
                weight += g.weight(leaf, p);
                used[leaf] = true;
                deg[p] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
            weight += g.weight(rest[0], rest[1]);
            best = best.min(weight);
        }
        let mst: f64 = g.mst_weight();
        assert!((mst - best).abs() < 1e-9, "prim {mst} vs brute {best}");
    }

    #[test]
    fn mst_weight_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = MetricGraph::from_fn(8, |i, j| ((i * 13 + j * 7) % 11 + 1) as f64).unwrap();
        let mut perm: Vec<usize> = (0..8).collect();
        perm.shuffle(&mut rng);
        let h = MetricGraph::from_fn(8, |i, j| g.weight(perm[i], perm[j])).unwrap();
        assert!((g.mst_weight() - h.mst_weight()).abs() < 1e-9);
    }
}
