//! Simulative and predictive tasks: independent-cascade influence spread
//! with greedy seed selection, PageRank ranking quality, and a small
//! gradient-checked GCN for link prediction and node classification.

pub mod gcn;

pub use gcn::{
    gcn_train_eval, make_link_test_set, make_node_test_set, FixedTestSet, GcnConfig, GcnTask,
    TaskScore,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{pagerank, PAGERANK_DAMPING, PAGERANK_TOL};
use crate::rng::SeedTree;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Configuration of the independent-cascade simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    /// Activation probability per edge. The benchmark default is 0.1;
    /// spread comparisons are only meaningful at a fixed value.
    pub edge_prob: f64,
    pub seed_fraction: f64,
    pub num_sims: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            edge_prob: 0.1,
            seed_fraction: 0.01,
            num_sims: 1000,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.edge_prob && self.edge_prob <= 1.0) {
            return Err(Error::invalid("edge_prob must lie in (0,1]"));
        }
        if !(0.0 < self.seed_fraction && self.seed_fraction <= 1.0) {
            return Err(Error::invalid("seed_fraction must lie in (0,1]"));
        }
        if self.num_sims < 1 {
            return Err(Error::invalid("num_sims must be >= 1"));
        }
        Ok(())
    }
}

fn one_cascade<R: Rng + ?Sized>(g: &Graph, seeds: &[u32], p: f64, rng: &mut R) -> usize {
    let mut active = vec![false; g.node_count()];
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            queue.push_back(s);
        }
    }
    let mut count = queue.len();
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u as usize) {
            if !active[v as usize] && (p >= 1.0 || rng.random::<f64>() < p) {
                active[v as usize] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}

/// Mean fraction of nodes activated over `cfg.num_sims` cascades started
/// from `seeds`. Each newly active node gets one chance to activate each
/// inactive neighbor with probability `cfg.edge_prob`.
pub fn independent_cascade<R: Rng + ?Sized>(
    g: &Graph,
    seeds: &[u32],
    cfg: &CascadeConfig,
    rng: &mut R,
) -> Result<f64> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(Error::invalid("independent_cascade requires a non-empty seed set"));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= g.node_count()) {
        return Err(Error::invalid(format!("seed {bad} out of range")));
    }
    let mut total = 0usize;
    for _ in 0..cfg.num_sims {
        total += one_cascade(g, seeds, cfg.edge_prob, rng);
    }
    Ok(total as f64 / (cfg.num_sims as f64 * g.node_count() as f64))
}

const SELECTION_SIMS: usize = 200;

/// Greedy influence-maximizing seed selection with lazy re-evaluation:
/// repeatedly add the node with the highest Monte-Carlo marginal spread
/// gain until `ceil(fraction * n)` seeds are chosen. Deterministic given
/// the generator: every marginal evaluation draws from a stream keyed by
/// (node, round), so the lazy evaluation order cannot perturb results.
pub fn select_seeds<R: Rng + ?Sized>(
    g: &Graph,
    fraction: f64,
    edge_prob: f64,
    rng: &mut R,
) -> Result<Vec<u32>> {
    select_seeds_with(g, fraction, edge_prob, SELECTION_SIMS, rng)
}

pub fn select_seeds_with<R: Rng + ?Sized>(
    g: &Graph,
    fraction: f64,
    edge_prob: f64,
    sims: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    if !(0.0 < fraction && fraction <= 1.0) {
        return Err(Error::invalid("fraction must lie in (0,1]"));
    }
    if !(0.0 < edge_prob && edge_prob <= 1.0) {
        return Err(Error::invalid("edge_prob must lie in (0,1]"));
    }
    if sims == 0 {
        return Err(Error::invalid("sims must be >= 1"));
    }
    let n = g.node_count();
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    if k == n {
        return Ok((0..n as u32).collect());
    }

    let tree = SeedTree::from_seed(rng.random()).child("celf");
    let mc_spread = |seeds: &[u32], node: u32, round: usize| -> f64 {
        let mut r = tree.child_index(node as u64).child_index(round as u64).rng();
        let mut scratch: Vec<u32> = seeds.to_vec();
        scratch.push(node);
        let mut total = 0usize;
        for _ in 0..sims {
            total += one_cascade(g, &scratch, edge_prob, &mut r);
        }
        total as f64 / sims as f64
    };
    let base_spread = |seeds: &[u32], round: usize| -> f64 {
        if seeds.is_empty() {
            return 0.0;
        }
        let mut r = tree.child("base").child_index(round as u64).rng();
        let mut total = 0usize;
        for _ in 0..sims {
            total += one_cascade(g, seeds, edge_prob, &mut r);
        }
        total as f64 / sims as f64
    };

    // max-heap entries ordered by gain, ties broken toward smaller ids
    #[derive(PartialEq)]
    struct Entry {
        gain: f64,
        node: u32,
        round: usize,
    }
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.gain
                .total_cmp(&other.gain)
                .then_with(|| other.node.cmp(&self.node))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let mut heap = std::collections::BinaryHeap::new();
    for v in 0..n as u32 {
        heap.push(Entry {
            gain: mc_spread(&[], v, 0),
            node: v,
            round: 0,
        });
    }
    let mut seeds: Vec<u32> = Vec::with_capacity(k);
    let mut current = 0.0f64;
    while seeds.len() < k {
        let top = heap.pop().expect("heap holds all unselected nodes");
        if top.round == seeds.len() {
            seeds.push(top.node);
            current += top.gain;
        } else {
            let round = seeds.len();
            let gain = mc_spread(&seeds, top.node, round) - current;
            heap.push(Entry {
                gain,
                node: top.node,
                round,
            });
        }
        // refresh the cached spread once per round for stable marginals
        if !seeds.is_empty() && seeds.len() < k {
            current = base_spread(&seeds, seeds.len());
        }
    }
    seeds.sort_unstable();
    Ok(seeds)
}

/// Absolute difference in mean influenced fraction between the original
/// and the private graph, with seeds selected independently on each.
pub fn spread_error<R: Rng + ?Sized>(
    g: &Graph,
    g_priv: &Graph,
    cfg: &CascadeConfig,
    rng: &mut R,
) -> Result<f64> {
    cfg.validate()?;
    if g.node_count() == 0 || g_priv.node_count() == 0 {
        return Err(Error::invalid("spread_error requires non-empty graphs"));
    }
    let tree = SeedTree::from_seed(rng.random());
    let run = |graph: &Graph, label: &str| -> Result<f64> {
        let mut r = tree.child(label).rng();
        let seeds = select_seeds(graph, cfg.seed_fraction, cfg.edge_prob, &mut r)?;
        independent_cascade(graph, &seeds, cfg, &mut r)
    };
    let a = run(g, "original")?;
    let b = run(g_priv, "private")?;
    Ok((a - b).abs())
}

/// Node ids sorted by score, descending, ties broken by ascending id.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    order: Vec<u32>,
    scores: Vec<f64>,
}

impl RankedList {
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut order: Vec<u32> = (0..scores.len() as u32).collect();
        order.sort_by(|&a, &b| {
            scores[b as usize]
                .total_cmp(&scores[a as usize])
                .then_with(|| a.cmp(&b))
        });
        let sorted = order.iter().map(|&v| scores[v as usize]).collect();
        RankedList {
            order,
            scores: sorted,
        }
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// NDCG of the ranking induced by `predicted_scores`, with gains taken
/// from `true_scores` and the ideal ordering as reference.
pub fn ndcg_from_scores(true_scores: &[f64], predicted_scores: &[f64]) -> Result<f64> {
    if true_scores.len() != predicted_scores.len() {
        return Err(Error::Incompatible("score vectors differ in length".into()));
    }
    if true_scores.is_empty() {
        return Err(Error::invalid("ndcg needs at least one item"));
    }
    let dcg = |order: &[u32]| -> f64 {
        order
            .iter()
            .enumerate()
            .map(|(i, &v)| true_scores[v as usize] / ((i + 2) as f64).log2())
            .sum()
    };
    let ideal = RankedList::from_scores(true_scores);
    let predicted = RankedList::from_scores(predicted_scores);
    let ideal_dcg = dcg(ideal.order());
    if ideal_dcg == 0.0 {
        return Err(Error::Undefined("all true gains are zero".into()));
    }
    Ok(dcg(predicted.order()) / ideal_dcg)
}

/// Ranking utility of a private graph: DCG of the ordering induced by the
/// private graph's PageRank, evaluated with the true PageRank as gains,
/// over the ideal DCG. Requires identical node sets.
pub fn pagerank_ndcg(g: &Graph, g_priv: &Graph) -> Result<f64> {
    if g.node_count() != g_priv.node_count() {
        return Err(Error::Incompatible(format!(
            "node counts differ: {} vs {}",
            g.node_count(),
            g_priv.node_count()
        )));
    }
    let truth = pagerank(g, PAGERANK_DAMPING, PAGERANK_TOL)?;
    let predicted = pagerank(g_priv, PAGERANK_DAMPING, PAGERANK_TOL)?;
    ndcg_from_scores(&truth, &predicted)
}

/// Absolute difference of two scores in [0,1].
pub fn predictive_error(metric_on_g: f64, metric_on_gpriv: f64) -> Result<f64> {
    for v in [metric_on_g, metric_on_gpriv] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("score {v} outside [0,1]")));
        }
    }
    Ok((metric_on_g - metric_on_gpriv).abs())
}

/// Upper bound on the advantage over random guessing of any binary
/// predictor aimed at the privacy target of an eps-DP mechanism:
/// `(e^eps - 1)/2`. Inverted, a desired advantage needs
/// `eps >= ln(2*adv + 1)`.
pub fn advantage_bound(epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    Ok((epsilon.exp() - 1.0) / 2.0)
}
