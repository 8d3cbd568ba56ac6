//! Undirected simple graphs with optional binary node features and labels.
//!
//! `Graph` is immutable after construction and safe to share across threads
//! for read-only metric computation. All constructors normalize their input
//! to a simple graph: self-loops and duplicate edges are dropped (counted
//! where the caller asks for it), and every endpoint must be `< n`.

mod io;

pub use io::{
    load_edge_list, load_features_csv, load_labels_csv, save_edge_list, EdgeListFormat,
    LoadedGraph,
};

use crate::error::{Error, Result};
use rand::Rng;

pub const MAX_FEATURES: usize = 50;

/// Binary node-feature matrix, row-major, entries in {0,1}, `d <= 50`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Features {
    d: usize,
    rows: Vec<u8>,
}

impl Features {
    pub fn new(n: usize, d: usize, rows: Vec<u8>) -> Result<Self> {
        if d == 0 || d > MAX_FEATURES {
            return Err(Error::invalid(format!(
                "feature dimension {d} outside 1..={MAX_FEATURES}; pre-select at most {MAX_FEATURES} columns"
            )));
        }
        if rows.len() != n * d {
            return Err(Error::invalid(format!(
                "feature matrix has {} entries, expected {}x{}",
                rows.len(),
                n,
                d
            )));
        }
        if rows.iter().any(|&b| b > 1) {
            return Err(Error::invalid("feature entries must be 0 or 1"));
        }
        Ok(Features { d, rows })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, v: usize) -> &[u8] {
        &self.rows[v * self.d..(v + 1) * self.d]
    }

    pub fn bit(&self, v: usize, j: usize) -> u8 {
        self.rows[v * self.d + j]
    }
}

/// Undirected simple graph on nodes `0..n-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    m: usize,
    features: Option<Features>,
    labels: Option<Vec<u32>>,
}

/// Counts of entries dropped while normalizing an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DropStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Build a graph, dropping self-loops and duplicate edges silently.
    /// Endpoints `>= n` are an error.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        Ok(Self::new_counting(n, edges)?.0)
    }

    /// Like [`Graph::new`], but reports how many self-loops and duplicates
    /// were dropped.
    pub fn new_counting<I>(n: usize, edges: I) -> Result<(Self, DropStats)>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut stats = DropStats::default();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({u},{v}) has endpoint >= n={n}"
                )));
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut m = 0usize;
        for list in adj.iter_mut() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            stats.duplicates += before - list.len();
            m += list.len();
        }
        // each duplicate edge was counted once per endpoint
        stats.duplicates /= 2;
        m /= 2;
        Ok((
            Graph {
                n,
                adj,
                m,
                features: None,
                labels: None,
            },
            stats,
        ))
    }

    pub fn with_features(mut self, features: Features) -> Result<Self> {
        if features.rows.len() != self.n * features.d {
            return Err(Error::invalid("feature row count does not match node count"));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid("label count does not match node count"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u < self.n && v < self.n && self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&w| (w as usize) > u)
                .map(move |&w| (u as u32, w))
        })
    }

    pub fn features(&self) -> Option<&Features> {
        self.features.as_ref()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence {
            degrees: self.adj.iter().map(|l| l.len() as u32).collect(),
        }
    }

    /// Induced subgraph `G[S]` with ids re-compacted to `0..|S|-1` in
    /// ascending order of the original ids. Returns the new->old id map.
    /// Features and labels of kept nodes carry over.
    pub fn induced_subgraph(&self, s: &[u32]) -> Result<(Graph, Vec<u32>)> {
        let mut kept: Vec<u32> = s.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&v| v as usize >= self.n) {
            return Err(Error::invalid(format!("node id {bad} out of range")));
        }
        let mut old_to_new = vec![u32::MAX; self.n];
        for (new, &old) in kept.iter().enumerate() {
            old_to_new[old as usize] = new as u32;
        }
        let edges = self.edges().filter_map(|(u, v)| {
            let (nu, nv) = (old_to_new[u as usize], old_to_new[v as usize]);
            (nu != u32::MAX && nv != u32::MAX).then_some((nu, nv))
        });
        let mut g = Graph::new(kept.len(), edges)?;
        if let Some(f) = &self.features {
            let rows: Vec<u8> = kept
                .iter()
                .flat_map(|&old| f.row(old as usize).iter().copied())
                .collect();
            g = g.with_features(Features::new(kept.len(), f.d, rows)?)?;
        }
        if let Some(l) = &self.labels {
            g = g.with_labels(kept.iter().map(|&old| l[old as usize]).collect())?;
        }
        Ok((g, kept))
    }
}

/// Per-node degree vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    pub fn as_slice(&self) -> &[u32] {
        &self.degrees
    }

    pub fn sum(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.degrees.iter().map(|&d| d as f64).collect()
    }
}

/// Node -> community labeling with ids dense in `0..k-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
}

impl Partition {
    /// Compact arbitrary labels to dense ids in first-appearance order.
    pub fn from_labels(raw: &[u32]) -> Self {
        let mut remap: Vec<(u32, u32)> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &l in raw {
            let id = match remap.iter().find(|(orig, _)| *orig == l) {
                Some(&(_, id)) => id,
                None => {
                    let id = remap.len() as u32;
                    remap.push((l, id));
                    id
                }
            };
            labels.push(id);
        }
        Partition { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n as u32).collect(),
        }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }
}

/// Connected components by BFS: returns per-node component ids (dense, in
/// order of discovery from node 0) and the size of each component.
pub fn connected_components(g: &Graph) -> (Vec<u32>, Vec<usize>) {
    let n = g.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        sizes.push(0);
        comp[start] = id;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            sizes[id as usize] += 1;
            for &w in g.neighbors(v) {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = id;
                    queue.push_back(w as usize);
                }
            }
        }
    }
    (comp, sizes)
}

/// Sample a graph where each pair `(u, v)` is an edge independently with
/// probability `min(1, d_u * d_v / sum(d))`.
pub fn chung_lu_sample<R: Rng + ?Sized>(expected_degrees: &[f64], rng: &mut R) -> Result<Graph> {
    let n = expected_degrees.len();
    if n < 2 {
        return Err(Error::invalid("chung_lu_sample requires n >= 2"));
    }
    if expected_degrees.iter().any(|&d| !d.is_finite() || d < 0.0) {
        return Err(Error::invalid(
            "expected degrees must be finite and non-negative",
        ));
    }
    let total: f64 = expected_degrees.iter().sum();
    let mut edges = Vec::new();
    if total > 0.0 {
        for u in 0..n {
            let du = expected_degrees[u];
            if du == 0.0 {
                continue;
            }
            for v in (u + 1)..n {
                let p = (du * expected_degrees[v] / total).min(1.0);
                if p > 0.0 && rng.random::<f64>() < p {
                    edges.push((u as u32, v as u32));
                }
            }
        }
    }
    Graph::new(n, edges)
}

/// Exact pair-inclusion probability used by [`chung_lu_sample`]; exposed so
/// callers can compute expected statistics of a sample.
pub fn chung_lu_pair_probability(expected_degrees: &[f64], u: usize, v: usize) -> f64 {
    let total: f64 = expected_degrees.iter().sum();
    if total <= 0.0 || u == v {
        return 0.0;
    }
    (expected_degrees[u] * expected_degrees[v] / total).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    fn k3() -> Graph {
        Graph::new(3, [(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn construction_normalizes() {
        let (g, stats) = Graph::new_counting(3, [(0, 1), (1, 0), (2, 2), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(stats.self_loops, 1);
        assert_eq!(stats.duplicates, 2);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn out_of_range_endpoint_rejected() {
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn degree_sequence_examples() {
        assert_eq!(k3().degree_sequence().as_slice(), &[2, 2, 2]);
        assert_eq!(path3().degree_sequence().as_slice(), &[1, 2, 1]);
        let empty = Graph::new(4, []).unwrap();
        assert_eq!(empty.degree_sequence().as_slice(), &[0, 0, 0, 0]);
        assert_eq!(k3().degree_sequence().sum(), 2 * k3().edge_count() as u64);
    }

    #[test]
    fn induced_subgraph_examples() {
        let (sub, map) = k3().induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(map, vec![0, 1]);

        let (copy, _) = k3().induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(copy.edges().collect::<Vec<_>>(), k3().edges().collect::<Vec<_>>());

        let (ends, _) = path3().induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(ends.node_count(), 2);
        assert_eq!(ends.edge_count(), 0);

        assert!(k3().induced_subgraph(&[0, 7]).is_err());
    }

    #[test]
    fn induced_subgraph_carries_attributes() {
        let g = Graph::new(3, [(0, 1)])
            .unwrap()
            .with_features(Features::new(3, 2, vec![1, 0, 0, 1, 1, 1]).unwrap())
            .unwrap()
            .with_labels(vec![5, 6, 7])
            .unwrap();
        let (sub, _) = g.induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(sub.features().unwrap().row(0), &[1, 0]);
        assert_eq!(sub.features().unwrap().row(1), &[1, 1]);
        assert_eq!(sub.labels().unwrap(), &[5, 7]);
    }

    #[test]
    fn features_reject_wide_or_nonbinary() {
        assert!(Features::new(1, 51, vec![0; 51]).is_err());
        assert!(Features::new(1, 2, vec![0, 2]).is_err());
    }

    #[test]
    fn chung_lu_all_zero_is_empty() {
        let mut rng = SeedTree::from_seed(1).rng();
        let g = chung_lu_sample(&[0.0, 0.0, 0.0], &mut rng).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn chung_lu_clamps_to_complete() {
        // d_u*d_v/sum(d) = 4(n-1)^2 / (2n(n-1)) = 2(n-1)/n >= 1, so every
        // pair probability clamps to 1 and the sample is complete.
        let n = 6;
        let degs = vec![2.0 * (n as f64 - 1.0); n];
        for u in 0..n {
            for v in (u + 1)..n {
                assert_eq!(chung_lu_pair_probability(&degs, u, v), 1.0);
            }
        }
        let mut rng = SeedTree::from_seed(2).rng();
        let g = chung_lu_sample(&degs, &mut rng).unwrap();
        assert_eq!(g.edge_count(), n * (n - 1) / 2);
    }

    #[test]
    fn chung_lu_pair_probability_small_graph() {
        // With d = [n-1; n] the ratio is (n-1)/n, strictly below 1: the
        // model underdraws dense small graphs rather than clamping.
        let degs = vec![3.0; 4];
        assert!((chung_lu_pair_probability(&degs, 0, 1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn chung_lu_matches_expectation_oracle() {
        // Oracle: E[deg_u] = sum_v min(1, d_u d_v / sum d). For d=[2;4] this
        // is 3 * 0.5 = 1.5 per node.
        let degs = vec![2.0; 4];
        let oracle: f64 = (1..4).map(|v| chung_lu_pair_probability(&degs, 0, v)).sum();
        assert!((oracle - 1.5).abs() < 1e-12);

        let mut rng = SeedTree::from_seed(3).rng();
        let samples = 10_000;
        let mut mean_deg = vec![0.0f64; 4];
        for _ in 0..samples {
            let g = chung_lu_sample(&degs, &mut rng).unwrap();
            for v in 0..4 {
                mean_deg[v] += g.degree(v) as f64;
            }
        }
        for v in 0..4 {
            mean_deg[v] /= samples as f64;
            assert!(
                (mean_deg[v] - oracle).abs() < 0.1,
                "node {v}: mean degree {} vs oracle {oracle}",
                mean_deg[v]
            );
        }
    }

    #[test]
    fn chung_lu_deterministic_per_seed() {
        let degs = vec![2.5, 1.0, 3.0, 0.5, 2.0];
        let a = chung_lu_sample(&degs, &mut SeedTree::from_seed(9).rng()).unwrap();
        let b = chung_lu_sample(&degs, &mut SeedTree::from_seed(9).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chung_lu_rejects_bad_input() {
        let mut rng = SeedTree::from_seed(1).rng();
        assert!(chung_lu_sample(&[1.0], &mut rng).is_err());
        assert!(chung_lu_sample(&[1.0, -0.5], &mut rng).is_err());
        assert!(chung_lu_sample(&[1.0, f64::NAN], &mut rng).is_err());
    }

    #[test]
    fn partition_compaction() {
        let p = Partition::from_labels(&[7, 3, 7, 9]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.num_communities(), 3);
    }
}
