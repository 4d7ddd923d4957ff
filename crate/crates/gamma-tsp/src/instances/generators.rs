//! Synthetic instance generators: the tightness family of triples, grid
//! office maps with obstacle-aware Manhattan shortest paths, and random
//! graphs with planted clusters.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clustering::{cluster_metrics, ClusterTree};
use crate::graph::{MetricGraph, VertexSet};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("gamma <= 1 family not constructible (alpha {alpha} <= beta {beta})")]
    AlphaNotAboveBeta { alpha: f64, beta: f64 },
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("gamma must exceed 1, got {0}")]
    GammaTooSmall(f64),
    #[error("no non-trivial cluster possible: every planted size is below 2")]
    NoNonTrivialCluster,
    #[error("map row {row} has width {len}, expected {expected}")]
    RaggedMap {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("map contains invalid character {0:?}")]
    BadMapChar(char),
    #[error("map has fewer than one waypoint")]
    NoWaypoints,
    #[error("waypoints {a} and {b} are mutually unreachable")]
    Unreachable { a: usize, b: usize },
}

/// The scalable family of vertex triples whose clustered-versus-free
/// optimal costs follow closed forms. Each triple `t` contributes one
/// bottom vertex and two top vertices; the top row forms the single
/// cluster.
///
/// Weight layout, for triples indexed `t = 0..=n`:
/// * any two top vertices: `beta`;
/// * two bottom vertices: `2*alpha + beta`;
/// * bottom vertex of triple `t` to its own second top vertex, and to the
///   first top vertex of triple `t+1` (cyclically): `alpha`;
/// * every other bottom-to-top pair: `alpha + beta`.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub triples: usize,
    pub alpha: f64,
    pub beta: f64,
    pub cluster: VertexSet,
    pub graph: MetricGraph,
}

/// Builds the family member with `n + 1` triples, i.e. `3(n + 1)` vertices.
pub fn gen_lower_bound(n: usize, alpha: f64, beta: f64) -> Result<LowerBoundInstance, GenError> {
    if beta <= 0.0 {
        return Err(GenError::NonPositiveBeta(beta));
    }
    if alpha <= beta {
        return Err(GenError::AlphaNotAboveBeta { alpha, beta });
    }
    let triples = n + 1;
    let size = 3 * triples;
    // Vertex layout: triple t owns bottom 3t, top 3t+1 and 3t+2.
    let is_top = |v: usize| !v.is_multiple_of(3);
    let graph = MetricGraph::from_fn(size, |i, j| match (is_top(i), is_top(j)) {
        (true, true) => beta,
        (false, false) => 2.0 * alpha + beta,
        (top_i, _) => {
            let (bottom, top) = if top_i { (j, i) } else { (i, j) };
            let (tb, tt) = (bottom / 3, top / 3);
            let special = (tb == tt && top % 3 == 2) || ((tb + 1) % triples == tt && top % 3 == 1);
            if special {
                alpha
            } else {
                alpha + beta
            }
        }
    })
    .expect("weights are positive by construction");
    let cluster = VertexSet::from_sorted_unchecked((0..size).filter(|&v| is_top(v)).collect());
    Ok(LowerBoundInstance {
        triples,
        alpha,
        beta,
        cluster,
        graph,
    })
}

/// A rectangular cell map: `#` blocks, `.` is free, `W` marks a waypoint.
#[derive(Debug, Clone)]
pub struct GridOfficeMap {
    pub width: usize,
    pub height: usize,
    /// Row-major; `true` means blocked.
    pub obstacles: Vec<bool>,
    /// Waypoint cell coordinates `(row, col)` in reading order.
    pub waypoints: Vec<(usize, usize)>,
}

impl GridOfficeMap {
    /// Parses the plain-text map format, one row per line.
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut obstacles = Vec::with_capacity(width * height);
        let mut waypoints = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != width {
                return Err(GenError::RaggedMap {
                    row: r,
                    len: chars.len(),
                    expected: width,
                });
            }
            for (c, ch) in chars.into_iter().enumerate() {
                match ch {
                    '#' => obstacles.push(true),
                    '.' => obstacles.push(false),
                    'W' => {
                        obstacles.push(false);
                        waypoints.push((r, c));
                    }
                    other => return Err(GenError::BadMapChar(other)),
                }
            }
        }
        if waypoints.is_empty() {
            return Err(GenError::NoWaypoints);
        }
        Ok(Self {
            width,
            height,
            obstacles,
            waypoints,
        })
    }

    fn bfs_from(&self, start: (usize, usize)) -> Vec<Option<usize>> {
        let idx = |r: usize, c: usize| r * self.width + c;
        let mut dist = vec![None; self.width * self.height];
        let mut queue = VecDeque::new();
        dist[idx(start.0, start.1)] = Some(0);
        queue.push_back(start);
        while let Some((r, c)) = queue.pop_front() {
            let d = dist[idx(r, c)].unwrap();
            let mut step = |nr: usize, nc: usize| {
                if !self.obstacles[idx(nr, nc)] && dist[idx(nr, nc)].is_none() {
                    dist[idx(nr, nc)] = Some(d + 1);
                    queue.push_back((nr, nc));
                }
            };
            if r > 0 {
                step(r - 1, c);
            }
            if r + 1 < self.height {
                step(r + 1, c);
            }
            if c > 0 {
                step(r, c - 1);
            }
            if c + 1 < self.width {
                step(r, c + 1);
            }
        }
        dist
    }
}

/// Turns a map into the complete graph of 4-connected shortest-path
/// distances between its waypoints. Shortest-path distances satisfy the
/// triangle inequality exactly.
pub fn gen_office(map: &GridOfficeMap) -> Result<MetricGraph, GenError> {
    let k = map.waypoints.len();
    let mut weights = vec![vec![0.0; k]; k];
    for (i, &wp) in map.waypoints.iter().enumerate() {
        let dist = map.bfs_from(wp);
        for (j, &(r, c)) in map.waypoints.iter().enumerate() {
            match dist[r * map.width + c] {
                Some(d) => weights[i][j] = d as f64,
                None => return Err(GenError::Unreachable { a: i, b: j }),
            }
        }
    }
    Ok(MetricGraph::from_weights(weights).expect("BFS distances are symmetric and non-negative"))
}

/// Generates a random metric graph whose maximal clustering at the given
/// threshold is exactly the planted family.
///
/// Planted groups occupy consecutive vertex ranges. Weights inside a
/// group and weights between groups are drawn from two disjoint bands,
/// each narrow enough (band ratio below `gamma`) that no subset other
/// than a whole planted group can reach the threshold, and separated so
/// every planted group does. A spare background vertex is added when a
/// single group would otherwise cover every vertex. The result is closed
/// under all-pairs shortest paths, which the band choice makes a no-op.
pub fn gen_planted(
    cluster_sizes: &[usize],
    gamma: f64,
    seed: u64,
) -> Result<(MetricGraph, ClusterTree), GenError> {
    if !(gamma > 1.0) {
        return Err(GenError::GammaTooSmall(gamma));
    }
    if cluster_sizes.iter().all(|&s| s < 2) {
        return Err(GenError::NoNonTrivialCluster);
    }
    let total: usize = cluster_sizes.iter().sum();
    let planted = cluster_sizes.iter().filter(|&&s| s >= 2).count();
    let free_given: usize = cluster_sizes.iter().filter(|&&s| s < 2).sum();
    // A lone cluster needs an outside vertex for its crossing edges to
    // exist at all. Three or more need one so the spanning tree can join
    // the clusters through it instead of using a cluster as a through
    // station (see the tiered inter bands below); exactly two clusters
    // join by a single edge and need no helper.
    let background = usize::from(free_given == 0 && planted != 2);
    let n = total + background;

    // Group id per vertex; the background vertex (if any) gets its own.
    let mut group = Vec::with_capacity(n);
    for (gi, &s) in cluster_sizes.iter().enumerate() {
        group.extend(std::iter::repeat_n(gi, s));
    }
    if background == 1 {
        group.push(cluster_sizes.len());
    }

    // Band design: intra weights in [1, f_intra], inter weights in
    // [g_lo, g_lo + delta], with both band ratios below gamma, the
    // bands separated by more than gamma, and delta <= 1 so no two-hop
    // path undercuts a direct edge.
    let spread = (gamma - 1.0).min(1.0) / 2.0;
    let f_intra = 1.0 + spread / 2.0;
    let g_lo = gamma * f_intra * 1.01;
    let delta = (g_lo * spread).min(1.0);

    // The inter band is split into three tiers: free-free cheapest,
    // free-cluster next, cluster-cluster dearest. Every minimum spanning
    // tree then spans the free vertices first and hangs each cluster off
    // them (or joins two lone clusters by a single edge), so no cluster
    // ever carries more than one tree edge across its boundary. All
    // tiers stay inside the inter band, so the separation analysis is
    // unchanged.
    let in_cluster: Vec<bool> = group
        .iter()
        .map(|&g| g < cluster_sizes.len() && cluster_sizes[g] >= 2)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if group[i] == group[j] {
                rng.gen_range(1.0..f_intra)
            } else {
                let (lo, hi) = match (in_cluster[i], in_cluster[j]) {
                    (true, true) => (0.8, 1.0),
                    (true, false) | (false, true) => (0.4, 0.6),
                    (false, false) => (0.0, 0.2),
                };
                rng.gen_range(g_lo + lo * delta..g_lo + hi * delta)
            };
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    // Metric closure; a no-op by construction, kept as a safety net.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let via = w[i][k] + w[k][j];
                    if via < w[i][j] {
                        w[i][j] = via;
                    }
                }
            }
        }
    }
    let graph = MetricGraph::from_weights(w).expect("generated weights are well-formed");

    let mut clusters = Vec::new();
    let mut start = 0;
    for &s in cluster_sizes {
        if s >= 2 {
            let set = VertexSet::from_sorted_unchecked((start..start + s).collect());
            let metrics = cluster_metrics(&graph, &set)
                .expect("planted cluster is a proper subset of size >= 2");
            clusters.push((set, metrics));
        }
        start += s;
    }
    Ok((graph, ClusterTree::from_clusters(gamma, clusters)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::brute_force_clusters;

    #[test]
    fn lower_bound_minimal_size() {
        let inst = gen_lower_bound(0, 2.0, 1.0).unwrap();
        assert_eq!(inst.graph.vertex_count(), 3);
        assert_eq!(inst.cluster.len(), 2);
    }

    #[test]
    fn lower_bound_cluster_metrics() {
        let inst = gen_lower_bound(1, 2.0, 1.0).unwrap();
        assert_eq!(inst.graph.vertex_count(), 6);
        let m = cluster_metrics(&inst.graph, &inst.cluster).unwrap();
        assert_eq!(m.alpha, 2.0);
        assert_eq!(m.beta, 1.0);
        assert_eq!(m.gamma, 2.0);
    }

    #[test]
    fn lower_bound_is_metric_at_zero_tolerance() {
        let inst = gen_lower_bound(3, 3.0, 1.0).unwrap();
        assert!(inst.graph.check_metric(0.0).is_empty());
    }

    #[test]
    fn lower_bound_rejects_gamma_at_most_one() {
        assert!(gen_lower_bound(1, 1.0, 1.0).is_err());
        assert!(gen_lower_bound(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn lower_bound_cluster_is_the_only_cluster() {
        let inst = gen_lower_bound(1, 2.0, 1.0).unwrap();
        let found = brute_force_clusters(&inst.graph, 1.5).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].members(), inst.cluster.members());
    }

    #[test]
    fn office_straight_line_distance() {
        let map = GridOfficeMap::parse("W......W\n").unwrap();
        let g = gen_office(&map).unwrap();
        assert_eq!(g.weight(0, 1), 7.0);
    }

    #[test]
    fn office_wall_forces_detour() {
        let map = GridOfficeMap::parse(concat!(
            "W..#..W\n", //
            "...#...\n", //
            ".......\n",
        ))
        .unwrap();
        let g = gen_office(&map).unwrap();
        // Around the wall: down to row 2, across, back up.
        assert_eq!(g.weight(0, 1), 10.0);
    }

    #[test]
    fn office_collinear_additivity() {
        let map = GridOfficeMap::parse("W..W...W\n").unwrap();
        let g = gen_office(&map).unwrap();
        assert_eq!(g.weight(0, 2), g.weight(0, 1) + g.weight(1, 2));
    }

    #[test]
    fn office_unreachable_pair_is_an_error() {
        let map = GridOfficeMap::parse("W#W\n").unwrap();
        match gen_office(&map) {
            Err(GenError::Unreachable { .. }) => {}
            other => panic!("expected unreachable error, got {other:?}"),
        }
    }

    #[test]
    fn office_metric_at_zero_tolerance() {
        let map = GridOfficeMap::parse(concat!(
            "W...#..W\n",
            "..#.#.#.\n",
            "W.#...#W\n",
            "....W...\n",
        ))
        .unwrap();
        let g = gen_office(&map).unwrap();
        assert!(g.check_metric(0.0).is_empty());
    }

    #[test]
    fn planted_pairs_found_by_oracle() {
        let (g, tree) = gen_planted(&[2, 2], 2.0, 11).unwrap();
        assert_eq!(g.vertex_count(), 4);
        let found = brute_force_clusters(&g, 2.0).unwrap();
        assert_eq!(found.len(), 2);
        let planted: Vec<_> = tree.vertex_sets().collect();
        for f in &found {
            assert!(planted.iter().any(|p| p.members() == f.members()));
        }
    }

    #[test]
    fn planted_single_cluster_gets_background_vertex() {
        let (g, tree) = gen_planted(&[5], 1.5, 3).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(tree.len(), 1);
        let found = brute_force_clusters(&g, 1.5).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].members(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn planted_rejects_degenerate_input() {
        assert!(gen_planted(&[1], 2.0, 0).is_err());
        assert!(gen_planted(&[3, 3], 1.0, 0).is_err());
    }

    #[test]
    fn planted_deterministic_per_seed() {
        let (a, _) = gen_planted(&[3, 4], 1.3, 77).unwrap();
        let (b, _) = gen_planted(&[3, 4], 1.3, 77).unwrap();
        for i in 0..a.vertex_count() {
            for j in 0..a.vertex_count() {
                assert_eq!(a.weight(i, j), b.weight(i, j));
            }
        }
    }

    #[test]
    fn planted_metric_and_exactly_planted_across_gammas() {
        for (sizes, gamma, seed) in [
            (vec![2, 3], 2.0f64, 5u64),
            (vec![3, 3, 2], 1.01, 6),
            (vec![4, 2], 5.0, 7),
            (vec![2, 2, 2, 2], 1.5, 8),
        ] {
            let (g, tree) = gen_planted(&sizes, gamma, seed).unwrap();
            assert!(g.check_metric(1e-12).is_empty());
            let found = brute_force_clusters(&g, gamma).unwrap();
            assert_eq!(found.len(), tree.len(), "sizes {sizes:?} gamma {gamma}");
        }
    }
}
