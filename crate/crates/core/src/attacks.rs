//! Baseline empirical privacy attacks and their scoring metrics.
//!
//! Edge scenario: membership inference over labeled pairs (a raw
//! membership predictor plus a calibrated common-neighbor score) and edge
//! set reconstruction scored by relative absolute error. Node scenario: a
//! seed-free signature-matching de-anonymizer scored by edge correctness
//! and the symmetric substructure score. The attacks are transparent
//! baselines feeding the benchmark's metrics, not reproductions of
//! published attack systems.

use crate::error::{Error, Result};
use crate::graph::Graph;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Injective map from private-graph node ids to original-graph node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeMapping {
    /// (private id, original id), sorted by private id.
    pairs: Vec<(u32, u32)>,
}

impl NodeMapping {
    pub fn new(mut pairs: Vec<(u32, u32)>) -> Result<Self> {
        pairs.sort_unstable();
        let mut priv_seen = BTreeSet::new();
        let mut orig_seen = BTreeSet::new();
        for &(p, o) in &pairs {
            if !priv_seen.insert(p) || !orig_seen.insert(o) {
                return Err(Error::invalid("node mapping must be injective"));
            }
        }
        Ok(NodeMapping { pairs })
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn original_of(&self, private: u32) -> Option<u32> {
        self.pairs
            .binary_search_by_key(&private, |&(p, _)| p)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// One attack measurement, serialized into the harness output alongside
/// utility rows.
#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub attack: String,
    pub metric: String,
    pub value: f64,
    pub epsilon: f64,
    pub trial: usize,
}

/// Accuracies of the two membership predictors on the evaluation pairs.
#[derive(Clone, Copy, Debug)]
pub struct MembershipReport {
    /// Predict "edge" iff the pair is an edge of the private graph.
    pub baseline_accuracy: f64,
    /// Common-neighbor count in the private graph, thresholded at the
    /// balanced-optimal point found on the calibration split.
    pub common_neighbor_accuracy: f64,
    pub threshold: u32,
}

fn common_neighbors(g: &Graph, u: usize, v: usize) -> u32 {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn check_pairs(g: &Graph, pairs: &[(u32, u32, bool)]) -> Result<()> {
    for &(u, v, _) in pairs {
        if u as usize >= g.node_count() || v as usize >= g.node_count() || u == v {
            return Err(Error::invalid(format!("pair ({u},{v}) invalid for this graph")));
        }
    }
    Ok(())
}

/// Edge membership inference against a private graph whose node ids align
/// with the original. `eval_pairs` must be balanced (equal numbers of true
/// edges and non-edges of the original graph); the common-neighbor
/// threshold is fitted on the disjoint `calibration_pairs`.
pub fn membership_inference(
    g_priv: &Graph,
    eval_pairs: &[(u32, u32, bool)],
    calibration_pairs: &[(u32, u32, bool)],
) -> Result<MembershipReport> {
    if eval_pairs.is_empty() || calibration_pairs.is_empty() {
        return Err(Error::invalid("membership inference requires non-empty pair sets"));
    }
    check_pairs(g_priv, eval_pairs)?;
    check_pairs(g_priv, calibration_pairs)?;
    let positives = eval_pairs.iter().filter(|&&(_, _, y)| y).count();
    if positives * 2 != eval_pairs.len() {
        return Err(Error::invalid(format!(
            "eval pairs unbalanced: {positives} edges vs {} non-edges",
            eval_pairs.len() - positives
        )));
    }

    let baseline_hits = eval_pairs
        .iter()
        .filter(|&&(u, v, y)| g_priv.has_edge(u as usize, v as usize) == y)
        .count();
    let baseline_accuracy = baseline_hits as f64 / eval_pairs.len() as f64;

    // balanced-optimal integer threshold on the calibration split
    let calib_scores: Vec<(u32, bool)> = calibration_pairs
        .iter()
        .map(|&(u, v, y)| (common_neighbors(g_priv, u as usize, v as usize), y))
        .collect();
    let max_score = calib_scores.iter().map(|&(s, _)| s).max().unwrap_or(0);
    let n_pos = calib_scores.iter().filter(|&&(_, y)| y).count().max(1) as f64;
    let n_neg = calib_scores.iter().filter(|&&(_, y)| !y).count().max(1) as f64;
    let mut best = (0u32, f64::NEG_INFINITY);
    for t in 0..=max_score + 1 {
        let tpr = calib_scores.iter().filter(|&&(s, y)| y && s >= t).count() as f64 / n_pos;
        let tnr = calib_scores.iter().filter(|&&(s, y)| !y && s < t).count() as f64 / n_neg;
        let balanced = 0.5 * (tpr + tnr);
        if balanced > best.1 {
            best = (t, balanced);
        }
    }
    let threshold = best.0;

    let cn_hits = eval_pairs
        .iter()
        .filter(|&&(u, v, y)| (common_neighbors(g_priv, u as usize, v as usize) >= threshold) == y)
        .count();
    Ok(MembershipReport {
        baseline_accuracy,
        common_neighbor_accuracy: cn_hits as f64 / eval_pairs.len() as f64,
        threshold,
    })
}

/// Draw balanced, disjoint evaluation and calibration splits from the
/// original graph: `pairs_per_class` true edges and non-edges each.
pub fn build_membership_splits<R: Rng + ?Sized>(
    g: &Graph,
    pairs_per_class: usize,
    rng: &mut R,
) -> Result<(Vec<(u32, u32, bool)>, Vec<(u32, u32, bool)>)> {
    if pairs_per_class == 0 {
        return Err(Error::invalid("pairs_per_class must be positive"));
    }
    let mut edges: Vec<(u32, u32)> = g.edges().collect();
    if edges.len() < 2 * pairs_per_class {
        return Err(Error::invalid(format!(
            "graph has {} edges, need {} for balanced splits",
            edges.len(),
            2 * pairs_per_class
        )));
    }
    edges.shuffle(rng);
    let non_edge_budget = 2 * pairs_per_class;
    let total_pairs = g.node_count() * (g.node_count() - 1) / 2;
    if total_pairs - g.edge_count() < non_edge_budget {
        return Err(Error::invalid("graph too dense to sample enough non-edges"));
    }
    let mut non_edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let n = g.node_count() as u32;
    let mut attempts = 0usize;
    while non_edges.len() < non_edge_budget {
        attempts += 1;
        if attempts > 500 * non_edge_budget + 10_000 {
            return Err(Error::invalid("non-edge sampling stalled"));
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if !g.has_edge(pair.0 as usize, pair.1 as usize) {
            non_edges.insert(pair);
        }
    }
    let mut non_edges: Vec<(u32, u32)> = non_edges.into_iter().collect();
    non_edges.shuffle(rng);

    let make = |es: &[(u32, u32)], nes: &[(u32, u32)]| -> Vec<(u32, u32, bool)> {
        es.iter()
            .map(|&(u, v)| (u, v, true))
            .chain(nes.iter().map(|&(u, v)| (u, v, false)))
            .collect()
    };
    let eval = make(&edges[..pairs_per_class], &non_edges[..pairs_per_class]);
    let calib = make(
        &edges[pairs_per_class..2 * pairs_per_class],
        &non_edges[pairs_per_class..2 * pairs_per_class],
    );
    Ok((eval, calib))
}

/// Relative absolute error of a reconstructed edge set:
/// `||A1 - A2||_F / ||A1||_F = sqrt(|E1 xor E2| / |E1|)`.
pub fn reconstruction_rae(g_original: &Graph, g_reconstructed: &Graph) -> Result<f64> {
    if g_original.node_count() != g_reconstructed.node_count() {
        return Err(Error::Incompatible("node counts differ".into()));
    }
    if g_original.edge_count() == 0 {
        return Err(Error::Undefined("original graph has no edges (zero denominator)".into()));
    }
    let e1: BTreeSet<(u32, u32)> = g_original.edges().collect();
    let e2: BTreeSet<(u32, u32)> = g_reconstructed.edges().collect();
    let sym_diff = e1.symmetric_difference(&e2).count();
    Ok((sym_diff as f64 / e1.len() as f64).sqrt())
}

/// The trivial reconstruction baseline: claim the private edge set is the
/// original one.
pub fn identity_reconstruction(g_priv: &Graph) -> Graph {
    g_priv.clone()
}

fn signature(g: &Graph, v: usize) -> (usize, Vec<u32>) {
    let mut nbr_degs: Vec<u32> = g.neighbors(v).iter().map(|&u| g.degree(u as usize) as u32).collect();
    nbr_degs.sort_unstable();
    (g.degree(v), nbr_degs)
}

/// Seed-free de-anonymization baseline: rank nodes of both graphs by the
/// structural signature (degree, sorted neighbor-degree multiset) and
/// match rank-wise. Injective and deterministic; ties fall back to node
/// id order.
pub fn seedfree_deanonymize(g_original: &Graph, g_priv: &Graph) -> Result<NodeMapping> {
    if g_original.node_count() == 0 || g_priv.node_count() == 0 {
        return Err(Error::invalid("de-anonymization requires non-empty graphs"));
    }
    let ranked = |g: &Graph| -> Vec<u32> {
        let mut sigs: Vec<(usize, Vec<u32>, u32)> = (0..g.node_count())
            .map(|v| {
                let (d, nd) = signature(g, v);
                (d, nd, v as u32)
            })
            .collect();
        sigs.sort();
        sigs.into_iter().map(|(_, _, v)| v).collect()
    };
    let orig_rank = ranked(g_original);
    let priv_rank = ranked(g_priv);
    let k = orig_rank.len().min(priv_rank.len());
    NodeMapping::new(
        priv_rank[..k]
            .iter()
            .zip(&orig_rank[..k])
            .map(|(&p, &o)| (p, o))
            .collect(),
    )
}

fn conserved_edges(g_original: &Graph, g_priv: &Graph, f: &NodeMapping) -> Result<usize> {
    // invert: original id -> private id
    let mut inv = vec![u32::MAX; g_original.node_count()];
    for &(p, o) in f.pairs() {
        if o as usize >= g_original.node_count() || p as usize >= g_priv.node_count() {
            return Err(Error::invalid("mapping endpoint out of range"));
        }
        inv[o as usize] = p;
    }
    Ok(g_original
        .edges()
        .filter(|&(a, b)| {
            let (pa, pb) = (inv[a as usize], inv[b as usize]);
            pa != u32::MAX && pb != u32::MAX && g_priv.has_edge(pa as usize, pb as usize)
        })
        .count())
}

/// Percentage of true edges conserved under the mapping:
/// `100 * |f(E1) cap E2| / |E1|`.
pub fn edge_correctness(g_original: &Graph, g_priv: &Graph, f: &NodeMapping) -> Result<f64> {
    if g_original.edge_count() == 0 {
        return Err(Error::Undefined("original graph has no edges".into()));
    }
    let conserved = conserved_edges(g_original, g_priv, f)?;
    Ok(100.0 * conserved as f64 / g_original.edge_count() as f64)
}

/// Symmetric substructure score:
/// `100 * conserved / (|E1| + |E(G2[f(V1)])| - conserved)`, identical
/// graphs under the identity mapping scoring 100.
pub fn s3_score(g_original: &Graph, g_priv: &Graph, f: &NodeMapping) -> Result<f64> {
    let conserved = conserved_edges(g_original, g_priv, f)?;
    let mapped_priv: Vec<u32> = f.pairs().iter().map(|&(p, _)| p).collect();
    let (induced, _) = g_priv.induced_subgraph(&mapped_priv)?;
    let denom =
        g_original.edge_count() as f64 + induced.edge_count() as f64 - conserved as f64;
    if denom == 0.0 {
        return Err(Error::Undefined("both edge sets empty under the mapping".into()));
    }
    Ok(100.0 * conserved as f64 / denom)
}
