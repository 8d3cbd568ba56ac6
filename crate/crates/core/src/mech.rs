//! Baseline graph privatization mechanisms.
//!
//! Four baselines cover the transformation / trust / target axes:
//!
//! * [`edge_rr`] — local edge privacy by per-pair randomized response over
//!   the adjacency bits (direct perturbation).
//! * [`degree_laplace_chunglu`] — central edge privacy: Laplace-noise the
//!   degree sequence, then generate a fresh graph from it (perturbation
//!   then generation).
//! * [`pi_v_node_dp`] — node privacy by vertex removal plus randomly wired
//!   replacement vertices. Its feasibility constraints force the removal
//!   probability so close to 1 that the output degenerates to a random
//!   graph; [`pi_v_min_p`] computes that lower bound.
//! * [`attr_rr`] — node-attribute privacy by per-bit randomized response
//!   over feature vectors with the budget split across bits.

use crate::dp::{laplace_noise, rr_flip_prob, PrivacyParams, PrivacyTarget, SensitivitySpec, TrustModel};
use crate::error::{Error, Result};
use crate::graph::{chung_lu_sample, Features, Graph};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How a mechanism transforms the input graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transformation {
    Perturbation,
    PerturbThenGenerate,
}

/// Registry entry describing a mechanism instance.
#[derive(Clone, Debug)]
pub struct MechanismDescriptor {
    pub id: String,
    pub params: PrivacyParams,
    pub transformation: Transformation,
    pub notes: String,
}

/// Options for [`edge_rr_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct EdgeRrOptions {
    /// Subsample the output uniformly down to the input edge count. Off by
    /// default: the inflated density of the raw channel at small budgets is
    /// itself a finding worth preserving.
    pub project_to_input_edge_count: bool,
}

/// Randomized response over every adjacency bit: each unordered pair's
/// edge indicator is flipped independently with probability
/// `1/(1 + e^eps)`. Node set, features, and labels pass through unchanged.
pub fn edge_rr<R: Rng + ?Sized>(g: &Graph, params: &PrivacyParams, rng: &mut R) -> Result<Graph> {
    edge_rr_with(g, params, EdgeRrOptions::default(), rng)
}

pub fn edge_rr_with<R: Rng + ?Sized>(
    g: &Graph,
    params: &PrivacyParams,
    opts: EdgeRrOptions,
    rng: &mut R,
) -> Result<Graph> {
    require(params, PrivacyTarget::Edge, Some(TrustModel::Local), "edge-rr")?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::invalid("edge_rr requires n >= 2"));
    }
    let flip = rr_flip_prob(params.epsilon())?;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let bit = g.has_edge(u, v);
            let flipped = rng.random::<f64>() < flip;
            if bit != flipped {
                edges.push((u as u32, v as u32));
            }
        }
    }
    if opts.project_to_input_edge_count && edges.len() > g.edge_count() {
        edges.shuffle(rng);
        edges.truncate(g.edge_count());
        edges.sort_unstable();
    }
    carry_attributes(g, Graph::new(n, edges)?)
}

/// L1 sensitivity of the degree sequence under edge neighboring: toggling
/// one edge moves exactly two entries by one each.
pub const DEGREE_SEQUENCE_L1_SENSITIVITY: f64 = 2.0;

pub fn degree_sequence_sensitivity() -> SensitivitySpec {
    SensitivitySpec::l1(DEGREE_SEQUENCE_L1_SENSITIVITY).expect("constant is valid")
}

/// The noisy-degree intermediate of [`degree_laplace_chunglu`]: degrees
/// plus Laplace(2/eps) noise, clamped to `[0, n-1]` and rounded. Clamping
/// and rounding are post-processing and cost no budget.
pub fn noisy_degrees<R: Rng + ?Sized>(g: &Graph, epsilon: f64, rng: &mut R) -> Result<Vec<f64>> {
    let scale = degree_sequence_sensitivity().value / epsilon;
    let max_deg = (g.node_count() - 1) as f64;
    g.degree_sequence()
        .as_slice()
        .iter()
        .map(|&d| {
            let noisy = d as f64 + laplace_noise(scale, rng)?;
            Ok(noisy.clamp(0.0, max_deg).round())
        })
        .collect()
}

/// Perturbation-then-generation at edge privacy: Laplace-noise the degree
/// sequence, then sample a fresh graph from it with the Chung-Lu model.
/// Everything after the noise is post-processing, so the output satisfies
/// eps-edge-DP. Features and labels pass through (node set is unchanged).
pub fn degree_laplace_chunglu<R: Rng + ?Sized>(
    g: &Graph,
    params: &PrivacyParams,
    rng: &mut R,
) -> Result<Graph> {
    require(params, PrivacyTarget::Edge, Some(TrustModel::Central), "deg-lap-cl")?;
    if g.node_count() < 2 {
        return Err(Error::invalid("degree_laplace_chunglu requires n >= 2"));
    }
    let degrees = noisy_degrees(g, params.epsilon(), rng)?;
    let sampled = chung_lu_sample(&degrees, rng)?;
    carry_attributes(g, sampled)
}

/// Vertex-perturbation parameters. Construction enforces the two
/// feasibility constraints tying (p, q) to the claimed budget:
/// `1/p <= e^eps` and `p + (1-p) 2^n / (1-q) <= e^eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiVParams {
    p: f64,
    q: f64,
    n: usize,
}

impl PiVParams {
    pub fn new(p: f64, q: f64, n: usize, epsilon: f64) -> Result<Self> {
        if !(0.0 < p && p < 1.0) || !(0.0 < q && q < 1.0) {
            return Err(Error::invalid("p and q must lie strictly in (0,1)"));
        }
        if n < 2 {
            return Err(Error::invalid("pi-v requires n >= 2"));
        }
        let params = PiVParams { p, q, n };
        params.check_feasible(epsilon)?;
        Ok(params)
    }

    pub fn removal_prob(&self) -> f64 {
        self.p
    }

    pub fn addition_control(&self) -> f64 {
        self.q
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Both constraints, evaluated in log space so `2^n` never overflows.
    pub fn check_feasible(&self, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        // 1/p <= e^eps  <=>  -ln p <= eps
        if -self.p.ln() > epsilon {
            return Err(Error::Infeasible(format!(
                "1/p = {} exceeds e^eps at eps = {epsilon}",
                1.0 / self.p
            )));
        }
        // ln(p + (1-p) 2^n / (1-q)) <= eps, via log-sum-exp
        let ln_term = (1.0 - self.p).ln() + self.n as f64 * std::f64::consts::LN_2
            - (1.0 - self.q).ln();
        let ln_lhs = log_sum_exp(self.p.ln(), ln_term);
        if ln_lhs > epsilon {
            return Err(Error::Infeasible(format!(
                "p + (1-p) 2^n/(1-q) has ln = {ln_lhs:.4}, exceeding eps = {epsilon} \
                 (n = {}); the vertex-perturbation constraints leave no feasible noise level",
                self.n
            )));
        }
        Ok(())
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Lower bound on the vertex-removal probability implied by the
/// feasibility constraints: `p >= 1 - (e^eps - 1)/(2^n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinRemovalProbability {
    /// The subtrahend `(e^eps - 1)/(2^n - 1)`, kept separately because for
    /// interesting (eps, n) it is far below f64 resolution around 1.
    pub complement: f64,
    /// False when `e^eps >= 2^n`, i.e. the constraint imposes nothing.
    pub binding: bool,
}

impl MinRemovalProbability {
    /// The bound itself; rounds to exactly 1.0 once the complement drops
    /// below machine epsilon, which is the collapse regime.
    pub fn value(&self) -> f64 {
        if self.binding {
            1.0 - self.complement
        } else {
            0.0
        }
    }
}

/// Evaluate the removal-probability bound in log space to avoid both
/// `2^n` overflow and catastrophic cancellation in the complement.
pub fn pi_v_min_p(epsilon: f64, n: usize) -> Result<MinRemovalProbability> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon must be positive and finite"));
    }
    if n < 1 {
        return Err(Error::invalid("n must be >= 1"));
    }
    // ln(e^eps - 1)
    let ln_num = if epsilon > 30.0 {
        epsilon + (-(-epsilon).exp()).ln_1p()
    } else {
        epsilon.exp_m1().ln()
    };
    // ln(2^n - 1)
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let ln_den = ln2n + (-(-ln2n).exp()).ln_1p();
    let ln_ratio = ln_num - ln_den;
    let complement = ln_ratio.exp();
    Ok(MinRemovalProbability {
        complement,
        binding: ln_ratio < 0.0,
    })
}

/// Independently mark each vertex as removed with probability `p`; returns
/// the sorted survivor ids.
pub fn sample_survivors<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<u32> {
    (0..n as u32).filter(|_| rng.random::<f64>() >= p).collect()
}

/// Node-DP by vertex perturbation: remove each vertex (and its incident
/// edges) with probability `p`, then add `ceil(q*n)` replacement vertices
/// whose pairs (replacement-survivor and replacement-replacement) are wired
/// uniformly at random. Output ids are freshly assigned via a random
/// permutation; no input-output node mapping is retained, and features or
/// labels do not carry over.
pub fn pi_v_node_dp<R: Rng + ?Sized>(
    g: &Graph,
    params: &PrivacyParams,
    pi: &PiVParams,
    rng: &mut R,
) -> Result<Graph> {
    require(params, PrivacyTarget::Node, None, "pi-v")?;
    if pi.n != g.node_count() {
        return Err(Error::Incompatible(format!(
            "pi-v params constructed for n = {}, graph has n = {}",
            pi.n,
            g.node_count()
        )));
    }
    pi.check_feasible(params.epsilon())?;

    let survivors = sample_survivors(g.node_count(), pi.p, rng);
    let (core, _) = g.induced_subgraph(&survivors)?;
    let s = core.node_count();
    let added = (pi.q * g.node_count() as f64).ceil() as usize;
    let total = s + added;

    let mut edges: Vec<(u32, u32)> = core.edges().collect();
    for new in s..total {
        for other in 0..new {
            if rng.random::<f64>() < 0.5 {
                edges.push((other as u32, new as u32));
            }
        }
    }

    // fresh ids: relabel through a random permutation
    let mut perm: Vec<u32> = (0..total as u32).collect();
    perm.shuffle(rng);
    let relabeled = edges.into_iter().map(|(u, v)| (perm[u as usize], perm[v as usize]));
    Graph::new(total, relabeled)
}

/// Per-bit flip probability used by [`attr_rr`]: the budget is split
/// evenly over the `d` bits of one attribute vector, so each bit runs
/// randomized response at eps/d.
pub fn attr_rr_flip_prob(epsilon: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("feature dimension must be positive"));
    }
    rr_flip_prob(epsilon / d as f64)
}

/// Node-attribute privacy: structure is untouched, every feature bit is
/// flipped independently with probability `1/(1 + e^{eps/d})`. Sequential
/// composition over the d bits yields eps per attribute vector.
pub fn attr_rr<R: Rng + ?Sized>(g: &Graph, params: &PrivacyParams, rng: &mut R) -> Result<Graph> {
    let d = g
        .features()
        .ok_or_else(|| Error::invalid("attr_rr requires node features"))?
        .dim();
    let even = vec![1.0 / d as f64; d];
    attr_rr_with_split(g, params, &even, rng)
}

/// [`attr_rr`] with an explicit budget split: `fractions[j]` of eps goes
/// to bit j. Fractions must be positive and sum to 1.
pub fn attr_rr_with_split<R: Rng + ?Sized>(
    g: &Graph,
    params: &PrivacyParams,
    fractions: &[f64],
    rng: &mut R,
) -> Result<Graph> {
    require(params, PrivacyTarget::NodeAttribute, None, "attr-rr")?;
    let features = g
        .features()
        .ok_or_else(|| Error::invalid("attr_rr requires node features"))?;
    let d = features.dim();
    if fractions.len() != d {
        return Err(Error::invalid("budget split length must equal feature dimension"));
    }
    if fractions.iter().any(|&f| !(f > 0.0)) {
        return Err(Error::invalid("budget fractions must be positive"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("budget fractions must sum to 1"));
    }
    let flips: Vec<f64> = fractions
        .iter()
        .map(|&f| rr_flip_prob(params.epsilon() * f))
        .collect::<Result<_>>()?;

    let n = g.node_count();
    let mut rows = Vec::with_capacity(n * d);
    for v in 0..n {
        for j in 0..d {
            let bit = features.bit(v, j);
            let flipped = rng.random::<f64>() < flips[j];
            rows.push(if flipped { 1 - bit } else { bit });
        }
    }
    let edges: Vec<(u32, u32)> = g.edges().collect();
    let mut out = Graph::new(n, edges)?.with_features(Features::new(n, d, rows)?)?;
    if let Some(labels) = g.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    Ok(out)
}

fn require(
    params: &PrivacyParams,
    target: PrivacyTarget,
    trust: Option<TrustModel>,
    id: &str,
) -> Result<()> {
    if params.target != target {
        return Err(Error::Incompatible(format!(
            "{id} protects {target:?}, got params for {:?}",
            params.target
        )));
    }
    if let Some(t) = trust {
        if params.trust != t {
            return Err(Error::Incompatible(format!(
                "{id} assumes the {t:?} trust model, got {:?}",
                params.trust
            )));
        }
    }
    Ok(())
}

fn carry_attributes(original: &Graph, mut out: Graph) -> Result<Graph> {
    if let Some(f) = original.features() {
        out = out.with_features(f.clone())?;
    }
    if let Some(l) = original.labels() {
        out = out.with_labels(l.to_vec())?;
    }
    Ok(out)
}
