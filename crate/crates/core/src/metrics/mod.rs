//! Descriptive graph metrics and the report container they feed.

pub mod centrality;
pub mod community;
pub mod distance;

pub use centrality::{
    betweenness, betweenness_exact, closeness, closeness_exact, pagerank, CentralityEstimate,
    CentralityMethod, CentralityMode, DEFAULT_TARGET_REL_ERROR, PAGERANK_DAMPING, PAGERANK_TOL,
};
pub use community::{ari, louvain, louvain_from, modularity};
pub use distance::{error, wasserstein1, ErrorKind};

use crate::error::{Error, Result};
use crate::graph::Graph;
use std::collections::BTreeMap;

/// A named metric value annotated with how it relates to a reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricEntry {
    pub value: f64,
    pub error_kind: ErrorKind,
}

/// Named metric values; error-kinded entries must be non-negative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    entries: BTreeMap<String, MetricEntry>,
}

impl MetricReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64, error_kind: ErrorKind) -> Result<()> {
        if error_kind != ErrorKind::Raw && !(value >= 0.0) {
            return Err(Error::invalid(format!(
                "{:?} metric value must be non-negative, got {value}",
                error_kind
            )));
        }
        self.entries.insert(name.into(), MetricEntry { value, error_kind });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&MetricEntry> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MetricEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `|E| / (n(n-1)/2)`.
pub fn density(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::invalid("density needs n >= 2"));
    }
    Ok(g.edge_count() as f64 / (n as f64 * (n as f64 - 1.0) / 2.0))
}

/// Harmonic diameter: the number of unordered vertex pairs divided by the
/// sum of reciprocal shortest distances. Unreachable pairs count in the
/// numerator and contribute zero to the sum, which keeps the metric finite
/// and meaningful on disconnected graphs.
pub fn harmonic_diameter(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::invalid("harmonic diameter needs n >= 2"));
    }
    let mut reciprocal_sum = 0.0f64;
    for s in 0..n {
        let mut dist = vec![-1i64; n];
        let mut queue = std::collections::VecDeque::new();
        dist[s] = 0;
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v as usize) {
                if dist[w as usize] < 0 {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        for t in 0..n {
            if t != s && dist[t] > 0 {
                reciprocal_sum += 1.0 / dist[t] as f64;
            }
        }
    }
    reciprocal_sum *= 0.5; // ordered -> unordered
    if reciprocal_sum == 0.0 {
        return Err(Error::Undefined("no reachable pairs".into()));
    }
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(pairs / reciprocal_sum)
}

/// Degree assortativity: the Pearson correlation of endpoint degrees over
/// directed edge copies. `None` for degree-regular graphs, where the
/// correlation is undefined.
pub fn assortativity(g: &Graph) -> Result<Option<f64>> {
    if g.edge_count() == 0 {
        return Err(Error::invalid("assortativity needs at least one edge"));
    }
    let count = 2.0 * g.edge_count() as f64;
    let (mut s1, mut s2, mut sp) = (0.0f64, 0.0f64, 0.0f64);
    for (u, v) in g.edges() {
        let (x, y) = (g.degree(u as usize) as f64, g.degree(v as usize) as f64);
        s1 += x + y;
        s2 += x * x + y * y;
        sp += 2.0 * x * y;
    }
    let num = sp - s1 * s1 / count;
    let den = s2 - s1 * s1 / count;
    if den.abs() < 1e-9 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

/// Per-node clustering coefficient `2 T(v) / (deg(v)(deg(v)-1))`, zero for
/// nodes of degree below two.
pub fn clustering_coefficients(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut triangles = vec![0u64; n];
    for (u, v) in g.edges() {
        // common neighbors of a sorted-list pair; each triangle {u,v,w}
        // increments w once per one of its three edges
        let (a, b) = (g.neighbors(u as usize), g.neighbors(v as usize));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    triangles[a[i] as usize] += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            let d = g.degree(v) as f64;
            if d < 2.0 {
                0.0
            } else {
                2.0 * triangles[v] as f64 / (d * (d - 1.0))
            }
        })
        .collect()
}
