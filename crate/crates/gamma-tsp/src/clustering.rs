//! Γ-cluster detection: per-set separation metrics, the MST edge-deletion
//! algorithm that finds the unique maximal clustering for Γ > 1, a
//! subset-enumeration oracle, and the laminar cluster forest.

use num::bigint::BigInt;
use num::rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{MetricGraph, MstEdge, VertexSet};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("beta undefined (empty intra-edge set)")]
    BetaUndefined,
    #[error("alpha undefined (no outside vertex)")]
    AlphaUndefined,
    #[error("uniqueness not guaranteed below gamma = 1 (got {0})")]
    GammaTooSmall(f64),
    #[error("oracle size cap: {0} vertices exceeds the limit of 16")]
    OracleSizeCap(usize),
}

/// Separation metrics of one cluster: `alpha` is the cheapest edge with
/// exactly one endpoint inside, `beta` the costliest edge with both
/// endpoints inside, and `gamma = alpha / beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// A laminar family of clusters above a common gamma threshold. Singleton
/// clusters and the full vertex set are implicit and never stored.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    gamma_threshold: f64,
    clusters: Vec<(VertexSet, ClusterMetrics)>,
    parents: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ClusterJson {
    vertices: Vec<usize>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    parent_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ClusterTreeJson {
    gamma_threshold: f64,
    clusters: Vec<ClusterJson>,
}

impl Serialize for ClusterTree {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let clusters = self
            .clusters
            .iter()
            .zip(&self.parents)
            .map(|((set, m), parent)| ClusterJson {
                vertices: set.members().to_vec(),
                alpha: m.alpha,
                beta: m.beta,
                gamma: m.gamma,
                parent_index: *parent,
            })
            .collect();
        ClusterTreeJson {
            gamma_threshold: self.gamma_threshold,
            clusters,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ClusterTree {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = ClusterTreeJson::deserialize(de)?;
        let mut clusters = Vec::with_capacity(raw.clusters.len());
        let mut parents = Vec::with_capacity(raw.clusters.len());
        for c in raw.clusters {
            let max = c.vertices.iter().copied().max().map_or(0, |m| m + 1);
            let set = VertexSet::new(c.vertices, max).map_err(serde::de::Error::custom)?;
            clusters.push((
                set,
                ClusterMetrics {
                    alpha: c.alpha,
                    beta: c.beta,
                    gamma: c.gamma,
                },
            ));
            parents.push(c.parent_index);
        }
        Ok(ClusterTree {
            gamma_threshold: raw.gamma_threshold,
            clusters,
            parents,
        })
    }
}

impl ClusterTree {
    /// An empty clustering at the given threshold (no non-trivial clusters).
    pub fn empty(gamma_threshold: f64) -> Self {
        Self {
            gamma_threshold,
            clusters: Vec::new(),
            parents: Vec::new(),
        }
    }

    /// Builds a tree from explicit clusters, sorting them canonically and
    /// deriving parent links. Does not validate laminarity or thresholds;
    /// use [`verify_clustering`] for that.
    pub fn from_clusters(gamma_threshold: f64, clusters: Vec<(VertexSet, ClusterMetrics)>) -> Self {
        let mut clusters = clusters;
        sort_canonical(&mut clusters);
        let parents = derive_parents(&clusters);
        Self {
            gamma_threshold,
            clusters,
            parents,
        }
    }

    pub fn gamma_threshold(&self) -> f64 {
        self.gamma_threshold
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &[(VertexSet, ClusterMetrics)] {
        &self.clusters
    }

    pub fn vertex_sets(&self) -> impl Iterator<Item = &VertexSet> {
        self.clusters.iter().map(|(s, _)| s)
    }

    /// Index of the smallest stored strict superset, if any.
    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    /// Indices of clusters whose parent is `index` (`None` for roots).
    pub fn children(&self, index: Option<usize>) -> Vec<usize> {
        self.parents
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == index)
            .map(|(i, _)| i)
            .collect()
    }

    /// True if no two stored clusters are nested.
    pub fn is_flat(&self) -> bool {
        self.parents.iter().all(|p| p.is_none())
    }
}

fn sort_canonical(clusters: &mut [(VertexSet, ClusterMetrics)]) {
    clusters.sort_by(|(a, _), (b, _)| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.members().cmp(b.members()))
    });
}

fn derive_parents(clusters: &[(VertexSet, ClusterMetrics)]) -> Vec<Option<usize>> {
    let mut parents = vec![None; clusters.len()];
    for (i, (set, _)) in clusters.iter().enumerate() {
        let mut best: Option<usize> = None;
        for (j, (other, _)) in clusters.iter().enumerate() {
            if j != i
                && set.len() < other.len()
                && set.is_subset_of(other)
                && best.is_none_or(|b| other.len() < clusters[b].0.len())
            {
                best = Some(j);
            }
        }
        parents[i] = best;
    }
    parents
}

/// Decides `alpha / beta >= gamma` without epsilon drift: exact rational
/// cross-multiplication when both weights are integers, otherwise a float
/// comparison with 1e-12 relative tolerance.
pub(crate) fn separation_at_least(alpha: f64, beta: f64, gamma: f64, integral: bool) -> bool {
    debug_assert!(beta > 0.0);
    if integral && alpha.fract() == 0.0 && beta.fract() == 0.0 {
        if let Some(g) = BigRational::from_float(gamma) {
            let a = BigRational::from_integer(BigInt::from(alpha as i64));
            let b = BigRational::from_integer(BigInt::from(beta as i64));
            return a >= g * b;
        }
    }
    alpha >= gamma * beta * (1.0 - 1e-12)
}

/// Computes (alpha, beta, gamma) for a proper subset of size >= 2 by a
/// full edge scan.
pub fn cluster_metrics(
    graph: &MetricGraph,
    subset: &VertexSet,
) -> Result<ClusterMetrics, ClusterError> {
    let n = graph.vertex_count();
    if subset.len() < 2 {
        return Err(ClusterError::BetaUndefined);
    }
    if subset.len() >= n {
        return Err(ClusterError::AlphaUndefined);
    }
    let mut inside = vec![false; n];
    for v in subset.iter() {
        inside[v] = true;
    }
    let mut alpha = f64::INFINITY;
    let mut beta: f64 = 0.0;
    for a in subset.iter() {
        for b in 0..n {
            if b == a {
                continue;
            }
            let w = graph.weight(a, b);
            if inside[b] {
                beta = beta.max(w);
            } else {
                alpha = alpha.min(w);
            }
        }
    }
    Ok(ClusterMetrics {
        alpha,
        beta,
        gamma: alpha / beta,
    })
}

/// Finds the unique maximal clustering at threshold `gamma > 1` by
/// repeatedly deleting the most expensive spanning-tree edges.
///
/// The loop pops a tree off a stack, removes every edge tying the maximum
/// cost `alpha`, and tests each resulting component: the induced subgraph
/// must be complete and its worst internal weight `beta` must satisfy
/// `alpha / beta >= gamma`. Components with more than one vertex are
/// pushed back for further splitting. Runs in O(n³).
pub fn gamma_clustering(graph: &MetricGraph, gamma: f64) -> Result<ClusterTree, ClusterError> {
    if !(gamma > 1.0) {
        return Err(ClusterError::GammaTooSmall(gamma));
    }
    let n = graph.vertex_count();
    if n < 3 {
        // No proper subset of size >= 2 exists.
        return Ok(ClusterTree::empty(gamma));
    }
    let integral = graph.weights_are_integral();
    let mut found: Vec<(VertexSet, ClusterMetrics)> = Vec::new();
    let mut stack: Vec<Vec<MstEdge>> = vec![graph.minimum_spanning_tree()];
    while let Some(tree) = stack.pop() {
        if tree.is_empty() {
            continue;
        }
        let alpha = tree
            .iter()
            .map(|e| e.weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let kept: Vec<&MstEdge> = tree.iter().filter(|e| e.weight < alpha).collect();
        // Vertices of this subtree, then connected components under the
        // surviving edges.
        let mut verts: Vec<usize> = tree.iter().flat_map(|e| [e.a, e.b]).collect();
        verts.sort_unstable();
        verts.dedup();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in verts.iter().enumerate() {
            local[v] = i;
        }
        let mut comp = (0..verts.len()).collect::<Vec<usize>>();
        for e in &kept {
            union(&mut comp, local[e.a], local[e.b]);
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
        for (i, &v) in verts.iter().enumerate() {
            groups[find(&mut comp, i)].push(v);
        }
        for group in groups.into_iter().filter(|g| g.len() > 1) {
            if group.len() < n && is_clique(graph, &group) {
                let mut beta: f64 = 0.0;
                for (i, &a) in group.iter().enumerate() {
                    for &b in &group[i + 1..] {
                        beta = beta.max(graph.weight(a, b));
                    }
                }
                if beta > 0.0 && separation_at_least(alpha, beta, gamma, integral) {
                    let set = VertexSet::from_sorted_unchecked(group.clone());
                    let metrics = cluster_metrics(graph, &set)?;
                    found.push((set, metrics));
                }
            }
            let sub: Vec<MstEdge> = kept
                .iter()
                .filter(|e| group.binary_search(&e.a).is_ok())
                .map(|e| **e)
                .collect();
            if !sub.is_empty() {
                stack.push(sub);
            }
        }
    }
    Ok(ClusterTree::from_clusters(gamma, found))
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra] = rb;
    }
}

/// Graphs here are complete by construction, so every positive-weight
/// subset passes; kept so the algorithm stays honest if an incomplete
/// representation is ever added.
fn is_clique(_graph: &MetricGraph, _group: &[usize]) -> bool {
    true
}

/// Enumerates every proper subset of size >= 2 and returns those whose
/// separation meets the threshold. Exponential; capped at 16 vertices.
pub fn brute_force_clusters(
    graph: &MetricGraph,
    gamma: f64,
) -> Result<Vec<VertexSet>, ClusterError> {
    let n = graph.vertex_count();
    if n > 16 {
        return Err(ClusterError::OracleSizeCap(n));
    }
    if !(gamma > 1.0) {
        return Err(ClusterError::GammaTooSmall(gamma));
    }
    let integral = graph.weights_are_integral();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size >= n {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let set = VertexSet::from_sorted_unchecked(members);
        let m = cluster_metrics(graph, &set)?;
        if m.beta > 0.0 && separation_at_least(m.alpha, m.beta, gamma, integral) {
            out.push(set);
        }
    }
    out.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.members().cmp(b.members()))
    });
    Ok(out)
}

/// Recomputes every invariant of a cluster tree against the graph and
/// returns human-readable descriptions of any violations.
pub fn verify_clustering(graph: &MetricGraph, tree: &ClusterTree) -> Vec<String> {
    let n = graph.vertex_count();
    let integral = graph.weights_are_integral();
    let mut problems = Vec::new();
    for (i, (set, stored)) in tree.clusters().iter().enumerate() {
        if set.len() < 2 || set.len() >= n {
            problems.push(format!("cluster {i} has trivial size {}", set.len()));
            continue;
        }
        if set.members().last().copied().unwrap_or(0) >= n {
            problems.push(format!("cluster {i} references a vertex outside the graph"));
            continue;
        }
        let m = cluster_metrics(graph, set).expect("size checked above");
        if (m.alpha - stored.alpha).abs() > 1e-9 * m.alpha.max(1.0)
            || (m.beta - stored.beta).abs() > 1e-9 * m.beta.max(1.0)
        {
            problems.push(format!(
                "cluster {i}: stored (alpha {}, beta {}) but recomputed ({}, {})",
                stored.alpha, stored.beta, m.alpha, m.beta
            ));
        }
        if !separation_at_least(m.alpha, m.beta, tree.gamma_threshold(), integral) {
            problems.push(format!(
                "cluster {i}: separation {} below threshold {}",
                m.gamma,
                tree.gamma_threshold()
            ));
        }
    }
    for (i, (a, _)) in tree.clusters().iter().enumerate() {
        for (j, (b, _)) in tree.clusters().iter().enumerate().skip(i + 1) {
            let nested = a.is_subset_of(b) || b.is_subset_of(a);
            if !nested && !a.is_disjoint_from(b) {
                problems.push(format!("clusters {i} and {j} overlap without nesting"));
            }
        }
    }
    for (i, (set, _)) in tree.clusters().iter().enumerate() {
        let expected = {
            let mut best: Option<usize> = None;
            for (j, (other, _)) in tree.clusters().iter().enumerate() {
                if j != i
                    && set.len() < other.len()
                    && set.is_subset_of(other)
                    && best.is_none_or(|b| other.len() < tree.clusters()[b].0.len())
                {
                    best = Some(j);
                }
            }
            best
        };
        if tree.parent(i) != expected {
            problems.push(format!(
                "cluster {i}: parent link {:?} but smallest strict superset is {:?}",
                tree.parent(i),
                expected
            ));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from(rows: Vec<Vec<f64>>) -> MetricGraph {
        MetricGraph::from_weights(rows).unwrap()
    }

    #[test]
    fn metrics_basic_pair() {
        // 4 vertices; {0,1} joined by weight 1, everything else weight 3.
        let g = MetricGraph::from_fn(4, |i, j| if (i, j) == (0, 1) { 1.0 } else { 3.0 }).unwrap();
        let s = VertexSet::new(vec![0, 1], 4).unwrap();
        let m = cluster_metrics(&g, &s).unwrap();
        assert_eq!((m.alpha, m.beta, m.gamma), (3.0, 1.0, 3.0));
    }

    #[test]
    fn metrics_rejects_singleton_and_full_set() {
        let g = MetricGraph::from_fn(3, |_, _| 1.0).unwrap();
        let single = VertexSet::new(vec![0], 3).unwrap();
        assert!(matches!(
            cluster_metrics(&g, &single),
            Err(ClusterError::BetaUndefined)
        ));
        assert!(matches!(
            cluster_metrics(&g, &g.all_vertices()),
            Err(ClusterError::AlphaUndefined)
        ));
    }

    #[test]
    fn equal_weights_yield_no_clusters() {
        let g = MetricGraph::from_fn(6, |_, _| 2.0).unwrap();
        let tree = gamma_clustering(&g, 1.000001).unwrap();
        assert!(tree.is_empty());
        assert!(brute_force_clusters(&g, 1.000001).unwrap().is_empty());
    }

    #[test]
    fn rejects_gamma_at_most_one() {
        let g = MetricGraph::from_fn(4, |_, _| 1.0).unwrap();
        assert!(gamma_clustering(&g, 1.0).is_err());
        assert!(gamma_clustering(&g, 0.5).is_err());
        assert!(brute_force_clusters(&g, 1.0).is_err());
    }

    #[test]
    fn oracle_size_cap() {
        let g = MetricGraph::from_fn(17, |i, j| (i + j) as f64).unwrap();
        assert!(matches!(
            brute_force_clusters(&g, 2.0),
            Err(ClusterError::OracleSizeCap(17))
        ));
    }

    #[test]
    fn brute_force_small_triangle() {
        let g = graph_from(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 5.0],
            vec![5.0, 5.0, 0.0],
        ]);
        let found = brute_force_clusters(&g, 2.0).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].members(), &[0, 1]);
    }

    #[test]
    fn algorithm_matches_oracle_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let n = rng.gen_range(4..=9);
            // Shortest-path closure of random weights gives a metric graph
            // with clusters appearing by chance.
            let mut w = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen_range(1.0..20.0f64).round();
                    w[i][j] = v;
                    w[j][i] = v;
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            w[i][j] = w[i][j].min(w[i][k] + w[k][j]);
                        }
                    }
                }
            }
            let g = graph_from(w);
            for gamma in [1.01, 1.5, 2.0, 5.0] {
                let tree = gamma_clustering(&g, gamma).unwrap();
                let oracle = brute_force_clusters(&g, gamma).unwrap();
                let algo: Vec<&VertexSet> = tree.vertex_sets().collect();
                assert_eq!(algo.len(), oracle.len(), "count mismatch at gamma {gamma}");
                for (a, b) in algo.iter().zip(&oracle) {
                    assert_eq!(a.members(), b.members());
                }
                assert!(verify_clustering(&g, &tree).is_empty());
            }
        }
    }

    #[test]
    fn monotone_in_gamma() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 8;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(1.0..30.0f64).round();
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w[i][j] = w[i][j].min(w[i][k] + w[k][j]);
                    }
                }
            }
        }
        let g = graph_from(w);
        let lo = gamma_clustering(&g, 1.1).unwrap();
        let hi = gamma_clustering(&g, 2.0).unwrap();
        for set in hi.vertex_sets() {
            assert!(lo.vertex_sets().any(|s| s == set));
        }
    }

    #[test]
    fn verify_flags_overlap_and_threshold() {
        let g = MetricGraph::from_fn(5, |i, j| if i < 2 && j < 2 { 1.0 } else { 10.0 }).unwrap();
        let a = VertexSet::new(vec![0, 1, 2], 5).unwrap();
        let b = VertexSet::new(vec![2, 3], 5).unwrap();
        let ma = cluster_metrics(&g, &a).unwrap();
        let mb = cluster_metrics(&g, &b).unwrap();
        let tree = ClusterTree::from_clusters(50.0, vec![(a, ma), (b, mb)]);
        let problems = verify_clustering(&g, &tree);
        assert!(problems.iter().any(|p| p.contains("overlap")));
        assert!(problems.iter().any(|p| p.contains("threshold")));
    }

    #[test]
    fn json_round_trip() {
        let g = MetricGraph::from_fn(4, |i, j| if (i, j) == (0, 1) { 1.0 } else { 4.0 }).unwrap();
        let tree = gamma_clustering(&g, 2.0).unwrap();
        assert_eq!(tree.len(), 1);
        let json = serde_json::to_string(&tree).unwrap();
        let back: ClusterTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(
            back.clusters()[0].0.members(),
            tree.clusters()[0].0.members()
        );
        assert_eq!(back.gamma_threshold(), tree.gamma_threshold());
    }

    #[test]
    fn exact_threshold_comparison_on_integer_weights() {
        // alpha = 3, beta = 2: gamma 1.5 exactly meets the threshold.
        assert!(separation_at_least(3.0, 2.0, 1.5, true));
        assert!(!separation_at_least(3.0, 2.0, 1.5000001, true));
        // And a value fractionally above 1 at Table-scale thresholds.
        assert!(separation_at_least(1000001.0, 1000000.0, 1.000001, true));
        assert!(!separation_at_least(1000000.0, 1000000.0, 1.000001, true));
    }
}
