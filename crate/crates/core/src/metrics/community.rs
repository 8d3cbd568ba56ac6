//! Community structure: modularity, Louvain detection, and partition
//! agreement via the adjusted Rand index.

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use rand::seq::SliceRandom;
use rand::Rng;

/// Newman modularity of a partition:
/// `(1/2|E|) * sum_ij (A_ij - deg_i deg_j / 2|E|) delta(c_i, c_j)`
/// over ordered pairs, evaluated per community for efficiency.
pub fn modularity(g: &Graph, c: &Partition) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::invalid("modularity requires at least one edge"));
    }
    if c.len() != g.node_count() {
        return Err(Error::Incompatible("partition size != node count".into()));
    }
    let k = c.num_communities();
    let mut intra = vec![0u64; k];
    let mut degsum = vec![0u64; k];
    let labels = c.labels();
    for v in 0..g.node_count() {
        degsum[labels[v] as usize] += g.degree(v) as u64;
    }
    for (u, v) in g.edges() {
        if labels[u as usize] == labels[v as usize] {
            intra[labels[u as usize] as usize] += 1;
        }
    }
    let m = m as f64;
    let two_m = 2.0 * m;
    let q = (0..k)
        .map(|i| intra[i] as f64 / m - (degsum[i] as f64 / two_m).powi(2))
        .sum();
    Ok(q)
}

// Louvain works on a weighted view so aggregated levels reuse the same
// local-moving code. Self-loop weight counts twice in a node's strength.
struct WeightedGraph {
    n: usize,
    adj: Vec<Vec<(u32, f64)>>,
    self_loop: Vec<f64>,
    total_weight: f64,
}

impl WeightedGraph {
    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in g.edges() {
            adj[u as usize].push((v, 1.0));
            adj[v as usize].push((u, 1.0));
        }
        WeightedGraph {
            n,
            adj,
            self_loop: vec![0.0; n],
            total_weight: g.edge_count() as f64,
        }
    }

    fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loop[v]
    }

    /// One pass of greedy local moving until no node improves. Returns the
    /// node labels (dense) after moving.
    fn local_move<R: Rng + ?Sized>(&self, initial: &[u32], rng: &mut R) -> Vec<u32> {
        let n = self.n;
        let two_m = 2.0 * self.total_weight;
        let mut labels: Vec<u32> = initial.to_vec();
        let strengths: Vec<f64> = (0..n).map(|v| self.strength(v)).collect();
        let ncomm = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut comm_tot = vec![0.0f64; ncomm];
        for v in 0..n {
            comm_tot[labels[v] as usize] += strengths[v];
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        // scratch accumulator for weights into neighbor communities
        let mut k_vc = vec![0.0f64; ncomm];
        let mut touched: Vec<u32> = Vec::new();

        let mut moved = true;
        while moved {
            moved = false;
            for &v in &order {
                let current = labels[v];
                comm_tot[current as usize] -= strengths[v];

                touched.clear();
                for &(u, w) in &self.adj[v] {
                    let c = labels[u as usize];
                    if k_vc[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    k_vc[c as usize] += w;
                }
                if !touched.contains(&current) {
                    touched.push(current);
                }
                touched.sort_unstable();

                let mut best_comm = current;
                let mut best_gain = f64::NEG_INFINITY;
                for &c in &touched {
                    let gain =
                        k_vc[c as usize] - strengths[v] * comm_tot[c as usize] / two_m;
                    // strict improvement, ties resolved to the smallest id
                    // by the sorted candidate order
                    if gain > best_gain + 1e-12 {
                        best_gain = gain;
                        best_comm = c;
                    }
                }

                for &c in &touched {
                    k_vc[c as usize] = 0.0;
                }

                comm_tot[best_comm as usize] += strengths[v];
                if best_comm != current {
                    labels[v] = best_comm;
                    moved = true;
                }
            }
        }
        labels
    }

    /// Collapse communities into supernodes.
    fn aggregate(&self, dense_labels: &[u32], ncomm: usize) -> WeightedGraph {
        let mut self_loop = vec![0.0f64; ncomm];
        let mut pair_weight: std::collections::BTreeMap<(u32, u32), f64> =
            std::collections::BTreeMap::new();
        for v in 0..self.n {
            let cv = dense_labels[v];
            self_loop[cv as usize] += self.self_loop[v];
            for &(u, w) in &self.adj[v] {
                if (u as usize) < v {
                    continue; // count undirected edges once
                }
                if u as usize == v {
                    continue;
                }
                let cu = dense_labels[u as usize];
                if cu == cv {
                    self_loop[cv as usize] += w;
                } else {
                    let key = (cv.min(cu), cv.max(cu));
                    *pair_weight.entry(key).or_insert(0.0) += w;
                }
            }
        }
        let mut adj = vec![Vec::new(); ncomm];
        for (&(a, b), &w) in &pair_weight {
            adj[a as usize].push((b, w));
            adj[b as usize].push((a, w));
        }
        WeightedGraph {
            n: ncomm,
            adj,
            self_loop,
            total_weight: self.total_weight,
        }
    }
}

fn compact(labels: &[u32]) -> (Vec<u32>, usize) {
    let p = Partition::from_labels(labels);
    let k = p.num_communities();
    (p.labels().to_vec(), k)
}

/// Louvain community detection starting from singleton communities.
/// Deterministic given the generator; the returned partition's modularity
/// is at least that of the singleton partition.
pub fn louvain<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<Partition> {
    louvain_from(g, &Partition::singletons(g.node_count()), rng)
}

/// Louvain seeded with an initial partition.
pub fn louvain_from<R: Rng + ?Sized>(
    g: &Graph,
    initial: &Partition,
    rng: &mut R,
) -> Result<Partition> {
    if g.edge_count() == 0 {
        return Err(Error::invalid("louvain requires at least one edge"));
    }
    if initial.len() != g.node_count() {
        return Err(Error::Incompatible("initial partition size != node count".into()));
    }

    let n = g.node_count();
    // original node -> supernode of the current level
    let mut supernode: Vec<u32> = (0..n as u32).collect();
    // supernode -> community within the current level
    let mut membership: Vec<u32> = initial.labels().to_vec();
    let mut level = WeightedGraph::from_graph(g);

    let mut node_labels: Vec<u32> = membership.clone();
    let mut best_q = modularity(g, &Partition::from_labels(&node_labels))?;

    loop {
        let moved = level.local_move(&membership, rng);
        let (dense, ncomm) = compact(&moved);
        let candidate: Vec<u32> = supernode.iter().map(|&s| dense[s as usize]).collect();
        let q = modularity(g, &Partition::from_labels(&candidate))?;
        if q <= best_q + 1e-9 {
            break;
        }
        best_q = q;
        node_labels = candidate;
        if ncomm == level.n {
            // nothing merged; a further level would be identical
            break;
        }
        level = level.aggregate(&dense, ncomm);
        supernode = supernode.iter().map(|&s| dense[s as usize]).collect();
        membership = (0..ncomm as u32).collect();
    }

    Ok(Partition::from_labels(&node_labels))
}

/// Adjusted Rand index between two partitions of the same node set.
/// 1 iff the partitions agree up to relabeling.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Incompatible("partitions have different sizes".into()));
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::invalid("ari requires non-empty partitions"));
    }
    let ka = a.num_communities();
    let kb = b.num_communities();
    let mut table = vec![0u64; ka * kb];
    let mut row = vec![0u64; ka];
    let mut col = vec![0u64; kb];
    for v in 0..n {
        let (i, j) = (a.labels()[v] as usize, b.labels()[v] as usize);
        table[i * kb + j] += 1;
        row[i] += 1;
        col[j] += 1;
    }
    let comb2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().map(|&x| comb2(x)).sum();
    let sum_a: f64 = row.iter().map(|&x| comb2(x)).sum();
    let sum_b: f64 = col.iter().map(|&x| comb2(x)).sum();
    let total = comb2(n as u64);
    if total == 0.0 {
        return Ok(1.0); // single node: trivially identical
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom.abs() < 1e-12 {
        // degenerate: both partitions trivial in the same way
        let same = Partition::from_labels(a.labels()) == Partition::from_labels(b.labels());
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}
