//! Dense two-layer graph convolutional network with hand-derived
//! gradients, used for the link-prediction and node-classification
//! utility probes.
//!
//! Forward pass: `Z = A_hat * relu(A_hat * X * W1) * W2` with symmetric
//! normalization `A_hat = D^-1/2 (A + I) D^-1/2`, inverted dropout on the
//! hidden layer during training, and an adaptive-moment optimizer. Node
//! features are the supplied binary attributes concatenated with a
//! degree-bucket one-hot encoding; link prediction scores a pair by the
//! sigmoid of its embedding dot product.

use crate::error::{Error, Result};
use crate::graph::Graph;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GcnTask {
    LinkPrediction,
    NodeClassification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GcnConfig {
    pub hidden_dim: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub layers: usize,
    /// train/validation/test fractions, summing to 1
    pub split: (f64, f64, f64),
    pub epochs: usize,
    /// early-stop patience on the validation metric
    pub patience: usize,
}

impl Default for GcnConfig {
    fn default() -> Self {
        GcnConfig {
            hidden_dim: 256,
            dropout: 0.25,
            learning_rate: 0.01,
            layers: 2,
            split: (0.8, 0.1, 0.1),
            epochs: 200,
            patience: 20,
        }
    }
}

impl GcnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers != 2 {
            return Err(Error::Config("only the two-layer architecture is supported".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config("dropout must lie in [0,1)".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        let (a, b, c) = self.split;
        if !(a > 0.0 && b > 0.0 && c > 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must be positive and sum to 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Evaluation items fixed on the original graph and reused verbatim on
/// private graphs, so score differences isolate the privatization effect.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedTestSet {
    /// (u, v, is_edge) pairs for link prediction.
    Edges(Vec<(u32, u32, bool)>),
    /// Node ids for classification.
    Nodes(Vec<u32>),
}

#[derive(Clone, Debug)]
pub struct TaskScore {
    pub value: f64,
    pub metric: &'static str,
    /// dropout-free training loss per epoch, for convergence checks
    pub train_losses: Vec<f64>,
}

/// `D^-1/2 (A + I) D^-1/2` as a dense matrix.
pub fn normalized_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt()).collect();
    let mut a = Array2::zeros((n, n));
    for v in 0..n {
        a[[v, v]] = inv_sqrt[v] * inv_sqrt[v];
        for &w in g.neighbors(v) {
            a[[v, w as usize]] = inv_sqrt[v] * inv_sqrt[w as usize];
        }
    }
    a
}

const DEGREE_BUCKETS: usize = 16;

/// Supplied binary attributes (when present) concatenated with a one-hot
/// degree bucket, `bucket = min(15, floor(log2(deg + 1)))`.
pub fn build_features(g: &Graph) -> Array2<f64> {
    let n = g.node_count();
    let d_sup = g.features().map_or(0, |f| f.dim());
    let mut x = Array2::zeros((n, d_sup + DEGREE_BUCKETS));
    for v in 0..n {
        if let Some(f) = g.features() {
            for (j, &bit) in f.row(v).iter().enumerate() {
                x[[v, j]] = bit as f64;
            }
        }
        let bucket = (((g.degree(v) + 1) as f64).log2().floor() as usize).min(DEGREE_BUCKETS - 1);
        x[[v, d_sup + bucket]] = 1.0;
    }
    x
}

/// Supervision targets for one task instance.
#[derive(Clone, Debug)]
pub enum Supervision {
    Classes {
        labels: Vec<usize>,
        train_nodes: Vec<u32>,
        num_classes: usize,
    },
    Edges {
        train_pairs: Vec<(u32, u32, bool)>,
    },
}

/// Precomputed inputs for loss/gradient evaluation.
#[derive(Clone, Debug)]
pub struct GcnData {
    pub a_hat: Array2<f64>,
    pub x: Array2<f64>,
    pub supervision: Supervision,
}

/// The two weight matrices of the network.
#[derive(Clone, Debug)]
pub struct GcnModel {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
}

struct Forward {
    p1: Array2<f64>,
    pre1: Array2<f64>,
    p2: Array2<f64>,
    z: Array2<f64>,
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

impl GcnModel {
    /// Glorot-uniform initialization.
    pub fn init<R: Rng + ?Sized>(in_dim: usize, hidden: usize, out: usize, rng: &mut R) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-a..a))
        };
        GcnModel {
            w1: glorot(in_dim, hidden),
            w2: glorot(hidden, out),
        }
    }

    fn forward(&self, data: &GcnData, mask: Option<&Array2<f64>>) -> Forward {
        let p1 = data.a_hat.dot(&data.x);
        let pre1 = p1.dot(&self.w1);
        let h1 = pre1.mapv(|v| v.max(0.0));
        let h1d = match mask {
            Some(m) => &h1 * m,
            None => h1,
        };
        let p2 = data.a_hat.dot(&h1d);
        let z = p2.dot(&self.w2);
        Forward { p1, pre1, p2, z }
    }

    /// Node embeddings / logits with dropout off.
    pub fn outputs(&self, data: &GcnData) -> Array2<f64> {
        self.forward(data, None).z
    }

    /// Task loss at the current parameters.
    pub fn loss(&self, data: &GcnData, mask: Option<&Array2<f64>>) -> f64 {
        let fwd = self.forward(data, mask);
        self.loss_and_output_grad(&fwd.z, &data.supervision).0
    }

    /// Loss plus dL/dZ for the supervised items.
    fn loss_and_output_grad(&self, z: &Array2<f64>, sup: &Supervision) -> (f64, Array2<f64>) {
        let mut grad = Array2::zeros(z.raw_dim());
        match sup {
            Supervision::Classes {
                labels,
                train_nodes,
                num_classes,
            } => {
                let count = train_nodes.len() as f64;
                let mut loss = 0.0;
                for &v in train_nodes {
                    let v = v as usize;
                    let row = z.row(v);
                    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let log_norm =
                        max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
                    let y = labels[v];
                    loss -= row[y] - log_norm;
                    for c in 0..*num_classes {
                        let p = (row[c] - log_norm).exp();
                        grad[[v, c]] += (p - f64::from(c == y)) / count;
                    }
                }
                (loss / count, grad)
            }
            Supervision::Edges { train_pairs } => {
                let count = train_pairs.len() as f64;
                let mut loss = 0.0;
                for &(u, v, is_edge) in train_pairs {
                    let (u, v) = (u as usize, v as usize);
                    let s: f64 = z.row(u).dot(&z.row(v));
                    let y = f64::from(is_edge);
                    // numerically stable binary cross entropy
                    loss += s.max(0.0) - s * y + (-s.abs()).exp().ln_1p();
                    let ds = (sigmoid(s) - y) / count;
                    for j in 0..z.ncols() {
                        grad[[u, j]] += ds * z[[v, j]];
                        grad[[v, j]] += ds * z[[u, j]];
                    }
                }
                (loss / count, grad)
            }
        }
    }

    /// Loss and hand-derived gradients for both weight matrices.
    pub fn grads(
        &self,
        data: &GcnData,
        mask: Option<&Array2<f64>>,
    ) -> (f64, Array2<f64>, Array2<f64>) {
        let fwd = self.forward(data, mask);
        let (loss, g_z) = self.loss_and_output_grad(&fwd.z, &data.supervision);
        let d_w2 = fwd.p2.t().dot(&g_z);
        // Z = P2 W2, P2 = A_hat H1d, A_hat symmetric
        let d_p2 = g_z.dot(&self.w2.t());
        let d_h1d = data.a_hat.dot(&d_p2);
        let d_h1 = match mask {
            Some(m) => &d_h1d * m,
            None => d_h1d,
        };
        let relu_gate = fwd.pre1.mapv(|v| f64::from(v > 0.0));
        let d_pre1 = &d_h1 * &relu_gate;
        let d_w1 = fwd.p1.t().dot(&d_pre1);
        (loss, d_w1, d_w2)
    }
}

struct Adam {
    m: Array2<f64>,
    v: Array2<f64>,
}

impl Adam {
    fn new(shape: (usize, usize)) -> Self {
        Adam {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
        }
    }

    fn step(&mut self, w: &mut Array2<f64>, g: &Array2<f64>, lr: f64, t: usize) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        let t = t as i32;
        self.m = &self.m * B1 + g * (1.0 - B1);
        self.v = &self.v * B2 + &g.mapv(|x| x * x) * (1.0 - B2);
        let m_hat = &self.m / (1.0 - B1.powi(t));
        let v_hat = &self.v / (1.0 - B2.powi(t));
        *w = &*w - &(m_hat / (v_hat.mapv(f64::sqrt) + EPS) * lr);
    }
}

/// Area under the ROC curve of positive vs negative scores, via midranks.
pub fn auroc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("auroc requires positive and negative items"));
    }
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // ranks are 1-based
        for item in &all[i..j] {
            if item.1 {
                rank_sum += midrank;
            }
        }
        i = j;
    }
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Macro F1 over the classes present in the ground truth.
pub fn macro_f1(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<f64> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(Error::invalid("macro_f1 requires aligned non-empty label vectors"));
    }
    let mut tp = vec![0u64; num_classes];
    let mut fp = vec![0u64; num_classes];
    let mut fnn = vec![0u64; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fnn[t] += 1;
        }
    }
    let mut total = 0.0;
    let mut classes = 0usize;
    for c in 0..num_classes {
        if tp[c] + fnn[c] == 0 {
            continue; // class absent from ground truth
        }
        classes += 1;
        let denom = 2 * tp[c] + fp[c] + fnn[c];
        if denom > 0 {
            total += 2.0 * tp[c] as f64 / denom as f64;
        }
    }
    Ok(total / classes as f64)
}

fn split_counts(total: usize, fractions: (f64, f64, f64)) -> (usize, usize) {
    let test = ((fractions.2 * total as f64).round() as usize).clamp(1, total.saturating_sub(2).max(1));
    let val = ((fractions.1 * total as f64).round() as usize).clamp(1, (total - test).saturating_sub(1).max(1));
    (val, test)
}

/// Sample `count` distinct non-edges of `g` avoiding `forbidden`.
fn sample_non_edges<R: Rng + ?Sized>(
    g: &Graph,
    count: usize,
    forbidden: &BTreeSet<(u32, u32)>,
    rng: &mut R,
) -> Result<Vec<(u32, u32)>> {
    let n = g.node_count() as u32;
    let mut out = BTreeSet::new();
    let mut attempts = 0usize;
    let cap = 200 * count + 10_000;
    while out.len() < count {
        attempts += 1;
        if attempts > cap {
            return Err(Error::invalid(
                "could not sample enough distinct non-edges; graph too dense",
            ));
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if g.has_edge(pair.0 as usize, pair.1 as usize) || forbidden.contains(&pair) {
            continue;
        }
        out.insert(pair);
    }
    Ok(out.into_iter().collect())
}

/// Build the held-out link-prediction test set on the original graph:
/// `split.2` of its edges as positives plus an equal count of uniformly
/// sampled non-edges, fixed by the generator.
pub fn make_link_test_set<R: Rng + ?Sized>(
    g: &Graph,
    split: (f64, f64, f64),
    rng: &mut R,
) -> Result<FixedTestSet> {
    let mut edges: Vec<(u32, u32)> = g.edges().collect();
    if edges.is_empty() {
        return Err(Error::invalid("link prediction requires at least one edge"));
    }
    let (_, test) = split_counts(edges.len(), split);
    edges.shuffle(rng);
    let positives: Vec<(u32, u32)> = edges[..test].to_vec();
    let forbidden: BTreeSet<(u32, u32)> = positives.iter().copied().collect();
    let negatives = sample_non_edges(g, test, &forbidden, rng)?;
    let mut items: Vec<(u32, u32, bool)> = positives
        .into_iter()
        .map(|(u, v)| (u, v, true))
        .chain(negatives.into_iter().map(|(u, v)| (u, v, false)))
        .collect();
    items.sort_unstable();
    Ok(FixedTestSet::Edges(items))
}

/// Held-out node set for classification, `split.2` of the nodes.
pub fn make_node_test_set<R: Rng + ?Sized>(
    g: &Graph,
    split: (f64, f64, f64),
    rng: &mut R,
) -> Result<FixedTestSet> {
    let mut nodes: Vec<u32> = (0..g.node_count() as u32).collect();
    if nodes.len() < 3 {
        return Err(Error::invalid("node classification requires n >= 3"));
    }
    let (_, test) = split_counts(nodes.len(), split);
    nodes.shuffle(rng);
    let mut test_nodes = nodes[..test].to_vec();
    test_nodes.sort_unstable();
    Ok(FixedTestSet::Nodes(test_nodes))
}

/// Train a two-layer GCN on `g` and score it on the test items. When
/// `fixed_test_set` is supplied (built on the original graph), exactly
/// those items are evaluated and they are excluded from training; this is
/// what lets private-graph scores be compared against the original's.
pub fn gcn_train_eval<R: Rng + ?Sized>(
    g: &Graph,
    task: GcnTask,
    cfg: &GcnConfig,
    fixed_test_set: Option<&FixedTestSet>,
    rng: &mut R,
) -> Result<TaskScore> {
    cfg.validate()?;
    match task {
        GcnTask::LinkPrediction => train_eval_link(g, cfg, fixed_test_set, rng),
        GcnTask::NodeClassification => train_eval_classify(g, cfg, fixed_test_set, rng),
    }
}

fn train_eval_link<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &GcnConfig,
    fixed: Option<&FixedTestSet>,
    rng: &mut R,
) -> Result<TaskScore> {
    let test_items: Vec<(u32, u32, bool)> = match fixed {
        Some(FixedTestSet::Edges(items)) => items.clone(),
        Some(FixedTestSet::Nodes(_)) => {
            return Err(Error::Incompatible("fixed test set holds nodes, task is link prediction".into()))
        }
        None => match make_link_test_set(g, cfg.split, rng)? {
            FixedTestSet::Edges(items) => items,
            FixedTestSet::Nodes(_) => unreachable!(),
        },
    };
    if let Some(&(u, v, _)) = test_items
        .iter()
        .find(|&&(u, v, _)| u as usize >= g.node_count() || v as usize >= g.node_count() || u == v)
    {
        return Err(Error::Incompatible(format!(
            "test pair ({u},{v}) invalid for a graph with n = {}",
            g.node_count()
        )));
    }
    if !test_items.iter().any(|&(_, _, y)| y) || !test_items.iter().any(|&(_, _, y)| !y) {
        return Err(Error::invalid("degenerate test set: needs positive and negative items"));
    }

    let test_pairs: BTreeSet<(u32, u32)> =
        test_items.iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();

    // remaining edges split into train and validation positives
    let mut rest: Vec<(u32, u32)> = g
        .edges()
        .filter(|&(u, v)| !test_pairs.contains(&(u, v)))
        .collect();
    if rest.len() < 2 {
        return Err(Error::invalid("too few edges left for training after the test split"));
    }
    rest.shuffle(rng);
    let val_count = (((cfg.split.1) * g.edge_count() as f64).round() as usize)
        .clamp(1, rest.len() - 1);
    let val_pos: Vec<(u32, u32)> = rest[..val_count].to_vec();
    let train_pos: Vec<(u32, u32)> = rest[val_count..].to_vec();

    let mut forbidden = test_pairs.clone();
    let val_neg = sample_non_edges(g, val_pos.len(), &forbidden, rng)?;
    forbidden.extend(val_neg.iter().copied());
    let train_neg = sample_non_edges(g, train_pos.len(), &forbidden, rng)?;

    // message passing sees training edges only
    let prop_edges: Vec<(u32, u32)> = train_pos.clone();
    let prop_graph = Graph::new(g.node_count(), prop_edges)?;
    let data = GcnData {
        a_hat: normalized_adjacency(&prop_graph),
        x: build_features(g),
        supervision: Supervision::Edges {
            train_pairs: train_pos
                .iter()
                .map(|&(u, v)| (u, v, true))
                .chain(train_neg.iter().map(|&(u, v)| (u, v, false)))
                .collect(),
        },
    };

    let score_items = |model: &GcnModel, items: &[(u32, u32, bool)]| -> Result<f64> {
        let z = model.outputs(&data);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &(u, v, y) in items {
            let s: f64 = z.row(u as usize).dot(&z.row(v as usize));
            if y {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        auroc(&pos, &neg)
    };
    let val_items: Vec<(u32, u32, bool)> = val_pos
        .iter()
        .map(|&(u, v)| (u, v, true))
        .chain(val_neg.iter().map(|&(u, v)| (u, v, false)))
        .collect();

    let trained = fit(&data, cfg, rng, |model| score_items(model, &val_items))?;
    let value = score_items(&trained.model, &test_items)?;
    Ok(TaskScore {
        value,
        metric: "auroc",
        train_losses: trained.losses,
    })
}

fn train_eval_classify<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &GcnConfig,
    fixed: Option<&FixedTestSet>,
    rng: &mut R,
) -> Result<TaskScore> {
    let labels_raw = g
        .labels()
        .ok_or_else(|| Error::invalid("node classification requires labels"))?;
    if g.features().is_none() {
        return Err(Error::invalid("node classification requires features"));
    }
    let labels: Vec<usize> = labels_raw.iter().map(|&l| l as usize).collect();
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    if num_classes < 2 {
        return Err(Error::invalid("node classification needs at least two classes"));
    }

    let test_nodes: Vec<u32> = match fixed {
        Some(FixedTestSet::Nodes(nodes)) => nodes.clone(),
        Some(FixedTestSet::Edges(_)) => {
            return Err(Error::Incompatible("fixed test set holds edges, task is classification".into()))
        }
        None => match make_node_test_set(g, cfg.split, rng)? {
            FixedTestSet::Nodes(nodes) => nodes,
            FixedTestSet::Edges(_) => unreachable!(),
        },
    };
    if test_nodes.is_empty() {
        return Err(Error::invalid("degenerate test set: no nodes"));
    }
    if let Some(&bad) = test_nodes.iter().find(|&&v| v as usize >= g.node_count()) {
        return Err(Error::Incompatible(format!("test node {bad} out of range")));
    }

    let in_test = |v: u32| test_nodes.binary_search(&v).is_ok();
    let mut rest: Vec<u32> = (0..g.node_count() as u32).filter(|&v| !in_test(v)).collect();
    if rest.len() < 2 {
        return Err(Error::invalid("too few nodes left for training"));
    }
    rest.shuffle(rng);
    let val_count = (((cfg.split.1) * g.node_count() as f64).round() as usize)
        .clamp(1, rest.len() - 1);
    let val_nodes: Vec<u32> = rest[..val_count].to_vec();
    let train_nodes: Vec<u32> = rest[val_count..].to_vec();

    let data = GcnData {
        a_hat: normalized_adjacency(g),
        x: build_features(g),
        supervision: Supervision::Classes {
            labels: labels.clone(),
            train_nodes,
            num_classes,
        },
    };

    let score_nodes = |model: &GcnModel, nodes: &[u32]| -> Result<f64> {
        let z = model.outputs(&data);
        let truth: Vec<usize> = nodes.iter().map(|&v| labels[v as usize]).collect();
        let predicted: Vec<usize> = nodes
            .iter()
            .map(|&v| {
                let row = z.row(v as usize);
                (0..num_classes)
                    .max_by(|&a, &b| row[a].total_cmp(&row[b]))
                    .unwrap_or(0)
            })
            .collect();
        macro_f1(&truth, &predicted, num_classes)
    };

    let trained = fit(&data, cfg, rng, |model| score_nodes(model, &val_nodes))?;
    let value = score_nodes(&trained.model, &test_nodes)?;
    Ok(TaskScore {
        value,
        metric: "macro-f1",
        train_losses: trained.losses,
    })
}

struct Trained {
    model: GcnModel,
    losses: Vec<f64>,
}

fn fit<R, F>(data: &GcnData, cfg: &GcnConfig, rng: &mut R, mut val_score: F) -> Result<Trained>
where
    R: Rng + ?Sized,
    F: FnMut(&GcnModel) -> Result<f64>,
{
    let out_dim = match &data.supervision {
        Supervision::Classes { num_classes, .. } => *num_classes,
        Supervision::Edges { .. } => cfg.hidden_dim,
    };
    let mut model = GcnModel::init(data.x.ncols(), cfg.hidden_dim, out_dim, rng);
    let mut adam1 = Adam::new((data.x.ncols(), cfg.hidden_dim));
    let mut adam2 = Adam::new((cfg.hidden_dim, out_dim));

    let n = data.a_hat.nrows();
    let keep = 1.0 - cfg.dropout;
    let mut best = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut since_best = 0usize;
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        losses.push(model.loss(data, None));
        let mask = if cfg.dropout > 0.0 {
            Some(Array2::from_shape_fn((n, cfg.hidden_dim), |_| {
                if rng.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            }))
        } else {
            None
        };
        let (_, g1, g2) = model.grads(data, mask.as_ref());
        adam1.step(&mut model.w1, &g1, cfg.learning_rate, epoch);
        adam2.step(&mut model.w2, &g2, cfg.learning_rate, epoch);

        let val = val_score(&model)?;
        if val > best_val {
            best_val = val;
            best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(Trained {
        model: best,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Features;
    use crate::rng::SeedTree;

    /// Two K5 cliques joined by one edge, one-hot cluster features, labels
    /// by cluster. Linearly separable.
    fn two_cluster_fixture() -> Graph {
        let mut edges = Vec::new();
        for base in [0u32, 5] {
            for i in 0..5 {
                for j in (i + 1)..5 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((0, 5));
        let rows: Vec<u8> = (0..10).flat_map(|v| if v < 5 { [1, 0] } else { [0, 1] }).collect();
        Graph::new(10, edges)
            .unwrap()
            .with_features(Features::new(10, 2, rows).unwrap())
            .unwrap()
            .with_labels((0..10).map(|v| u32::from(v >= 5)).collect())
            .unwrap()
    }

    fn small_cfg() -> GcnConfig {
        GcnConfig {
            hidden_dim: 16,
            ..Default::default()
        }
    }

    #[test]
    fn separable_clusters_reach_perfect_f1() {
        let g = two_cluster_fixture();
        let mut rng = SeedTree::from_seed(101).rng();
        let score =
            gcn_train_eval(&g, GcnTask::NodeClassification, &small_cfg(), None, &mut rng).unwrap();
        assert_eq!(score.metric, "macro-f1");
        assert_eq!(score.value, 1.0);
        assert!(score.train_losses.len() <= 200);
    }

    #[test]
    fn training_loss_decreases_early() {
        let g = two_cluster_fixture();
        let mut rng = SeedTree::from_seed(102).rng();
        let score =
            gcn_train_eval(&g, GcnTask::NodeClassification, &small_cfg(), None, &mut rng).unwrap();
        assert!(score.train_losses.len() >= 10);
        assert!(
            score.train_losses[9] < score.train_losses[0],
            "loss did not decrease: {:?}",
            &score.train_losses[..10]
        );
    }

    #[test]
    fn link_prediction_on_two_block_graph() {
        // complete blocks: every non-edge crosses blocks, every test edge
        // is internal, so embeddings that separate blocks solve the task
        let mut edges = Vec::new();
        for base in [0u32, 8] {
            for i in 0..8 {
                for j in (i + 1)..8 {
                    edges.push((base + i, base + j));
                }
            }
        }
        let rows: Vec<u8> = (0..16).flat_map(|v| if v < 8 { [1, 0] } else { [0, 1] }).collect();
        let g = Graph::new(16, edges)
            .unwrap()
            .with_features(Features::new(16, 2, rows).unwrap())
            .unwrap();
        let mut rng = SeedTree::from_seed(103).rng();
        let score =
            gcn_train_eval(&g, GcnTask::LinkPrediction, &small_cfg(), None, &mut rng).unwrap();
        assert_eq!(score.metric, "auroc");
        assert!(score.value >= 0.95, "auroc {}", score.value);
    }

    #[test]
    fn fixed_test_set_is_honored() {
        let g = two_cluster_fixture();
        let mut rng = SeedTree::from_seed(104).rng();
        let fixed = make_node_test_set(&g, (0.8, 0.1, 0.1), &mut rng).unwrap();
        let FixedTestSet::Nodes(nodes) = &fixed else {
            panic!("expected node test set")
        };
        assert!(!nodes.is_empty());
        let score = gcn_train_eval(
            &g,
            GcnTask::NodeClassification,
            &small_cfg(),
            Some(&fixed),
            &mut rng,
        )
        .unwrap();
        assert!((0.0..=1.0).contains(&score.value));

        // wrong flavor is rejected
        assert!(gcn_train_eval(&g, GcnTask::LinkPrediction, &small_cfg(), Some(&fixed), &mut rng)
            .is_err());
    }

    #[test]
    fn gradient_check_on_six_node_fixture() {
        // both tasks, every parameter: analytic vs central differences
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)])
            .unwrap()
            .with_features(Features::new(6, 3, vec![
                1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 1,
            ]).unwrap())
            .unwrap()
            .with_labels(vec![0, 0, 1, 1, 0, 1])
            .unwrap();
        let x = build_features(&g);
        let a_hat = normalized_adjacency(&g);

        let supervisions = [
            Supervision::Classes {
                labels: vec![0, 0, 1, 1, 0, 1],
                train_nodes: vec![0, 2, 3, 5],
                num_classes: 2,
            },
            Supervision::Edges {
                train_pairs: vec![(0, 1, true), (2, 3, true), (0, 3, false), (1, 5, false)],
            },
        ];
        for supervision in supervisions {
            let data = GcnData {
                a_hat: a_hat.clone(),
                x: x.clone(),
                supervision,
            };
            let mut rng = SeedTree::from_seed(105).rng();
            let out_dim = match &data.supervision {
                Supervision::Classes { num_classes, .. } => *num_classes,
                Supervision::Edges { .. } => 4,
            };
            let mut model = GcnModel::init(data.x.ncols(), 4, out_dim, &mut rng);
            let (_, g1, g2) = model.grads(&data, None);

            let h = 1e-5;
            let mut worst = 0.0f64;
            for target in 0..2 {
                let (rows, cols) = if target == 0 {
                    (model.w1.nrows(), model.w1.ncols())
                } else {
                    (model.w2.nrows(), model.w2.ncols())
                };
                for r in 0..rows {
                    for c in 0..cols {
                        let get = |m: &GcnModel| if target == 0 { m.w1[[r, c]] } else { m.w2[[r, c]] };
                        let orig = get(&model);
                        if target == 0 {
                            model.w1[[r, c]] = orig + h;
                        } else {
                            model.w2[[r, c]] = orig + h;
                        }
                        let plus = model.loss(&data, None);
                        if target == 0 {
                            model.w1[[r, c]] = orig - h;
                        } else {
                            model.w2[[r, c]] = orig - h;
                        }
                        let minus = model.loss(&data, None);
                        if target == 0 {
                            model.w1[[r, c]] = orig;
                        } else {
                            model.w2[[r, c]] = orig;
                        }
                        let numeric = (plus - minus) / (2.0 * h);
                        let analytic = if target == 0 { g1[[r, c]] } else { g2[[r, c]] };
                        let rel = (analytic - numeric).abs()
                            / analytic.abs().max(numeric.abs()).max(1e-8);
                        worst = worst.max(rel);
                    }
                }
            }
            assert!(worst < 1e-4, "gradient check failed: worst rel error {worst}");
        }
    }

    #[test]
    fn auroc_and_f1_basics() {
        assert_eq!(auroc(&[2.0, 3.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(auroc(&[1.0], &[1.0]).unwrap(), 0.5);
        assert!(auroc(&[], &[1.0]).is_err());

        assert_eq!(macro_f1(&[0, 1, 0, 1], &[0, 1, 0, 1], 2).unwrap(), 1.0);
        assert_eq!(macro_f1(&[0, 0], &[1, 1], 2).unwrap(), 0.0);
        let one_sided = macro_f1(&[0, 0, 1], &[0, 0, 0], 2).unwrap();
        assert!((one_sided - 0.4).abs() < 1e-12); // f1(0)=0.8, f1(1)=0
    }

    #[test]
    fn config_validation() {
        let mut cfg = GcnConfig::default();
        cfg.layers = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = GcnConfig::default();
        cfg.split = (0.5, 0.2, 0.2);
        assert!(cfg.validate().is_err());
        let mut cfg = GcnConfig::default();
        cfg.dropout = 1.0;
        assert!(cfg.validate().is_err());
        assert!(GcnConfig::default().validate().is_ok());
    }
}
