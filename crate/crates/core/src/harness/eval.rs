//! Per-trial metric and attack evaluation against a cached original side.

use super::*;
use crate::attacks::{
    build_membership_splits, edge_correctness, identity_reconstruction, membership_inference,
    reconstruction_rae, s3_score, seedfree_deanonymize,
};
use crate::graph::Partition;
use crate::metrics::MetricReport;

pub(super) struct Knobs {
    pub cascade: CascadeConfig,
    pub gcn: GcnConfig,
}

/// Value computed on the original graph, or the reason it is unavailable
/// (which then skips the metric on every trial).
type Available<T> = std::result::Result<T, String>;

fn reason(e: &Error) -> String {
    e.to_string()
}

pub(super) struct OriginalSide {
    pub graph: Graph,
    density: Available<f64>,
    harmonic_diameter: Available<f64>,
    assortativity: Available<f64>,
    louvain: Available<(Partition, f64)>,
    degrees: Vec<f64>,
    clustering: Vec<f64>,
    betweenness: Available<Vec<f64>>,
    closeness: Available<Vec<f64>>,
    spread: Available<f64>,
    lp: Available<(FixedTestSet, f64)>,
    nc: Available<(FixedTestSet, f64)>,
}

fn needs(ids: &[String], id: &str) -> bool {
    ids.iter().any(|x| x == id)
}

const UNCOMPUTED: &str = "not requested";

pub(super) fn prepare_original(
    graph: Graph,
    metric_ids: &[String],
    attack_ids: &[String],
    root: &SeedTree,
    knobs: &Knobs,
) -> Result<OriginalSide> {
    let tree = root.child("original");

    let density = if needs(metric_ids, "density") {
        density(&graph).map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let harmonic = if needs(metric_ids, "harmonic-diameter") {
        harmonic_diameter(&graph).map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let assort = if needs(metric_ids, "assortativity") {
        match assortativity(&graph) {
            Ok(Some(v)) => Ok(v),
            Ok(None) => Err("assortativity undefined on original (regular graph)".into()),
            Err(e) => Err(reason(&e)),
        }
    } else {
        Err(UNCOMPUTED.into())
    };
    let louvain_side = if needs(metric_ids, "modularity") || needs(metric_ids, "ari") {
        louvain(&graph, &mut tree.child("louvain").rng())
            .and_then(|p| modularity(&graph, &p).map(|q| (p, q)))
            .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let betweenness_side = if needs(metric_ids, "betweenness-dist") {
        betweenness(
            &graph,
            CentralityMode::Sampled {
                target_rel_error: DEFAULT_TARGET_REL_ERROR,
            },
            &mut tree.child("betweenness").rng(),
        )
        .map(|e| e.values)
        .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let closeness_side = if needs(metric_ids, "closeness-dist") {
        closeness(
            &graph,
            CentralityMode::Sampled {
                target_rel_error: DEFAULT_TARGET_REL_ERROR,
            },
            &mut tree.child("closeness").rng(),
        )
        .map(|e| e.values)
        .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let spread = if needs(metric_ids, "ic-spread") {
        let mut rng = tree.child("spread").rng();
        select_seeds(
            &graph,
            knobs.cascade.seed_fraction,
            knobs.cascade.edge_prob,
            &mut rng,
        )
        .and_then(|seeds| independent_cascade(&graph, &seeds, &knobs.cascade, &mut rng))
        .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let lp = if needs(metric_ids, "lp-auroc") {
        let mut rng = tree.child("lp").rng();
        make_link_test_set(&graph, knobs.gcn.split, &mut rng)
            .and_then(|test| {
                gcn_train_eval(&graph, GcnTask::LinkPrediction, &knobs.gcn, Some(&test), &mut rng)
                    .map(|score| (test, score.value))
            })
            .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };
    let nc = if needs(metric_ids, "nc-f1") {
        let mut rng = tree.child("nc").rng();
        make_node_test_set(&graph, knobs.gcn.split, &mut rng)
            .and_then(|test| {
                gcn_train_eval(
                    &graph,
                    GcnTask::NodeClassification,
                    &knobs.gcn,
                    Some(&test),
                    &mut rng,
                )
                .map(|score| (test, score.value))
            })
            .map_err(|e| reason(&e))
    } else {
        Err(UNCOMPUTED.into())
    };

    let _ = attack_ids; // attacks need no original-side precomputation
    let degrees = graph.degree_sequence().to_f64();
    let clustering = clustering_coefficients(&graph);

    Ok(OriginalSide {
        graph,
        density,
        harmonic_diameter: harmonic,
        assortativity: assort,
        louvain: louvain_side,
        degrees,
        clustering,
        betweenness: betweenness_side,
        closeness: closeness_side,
        spread,
        lp,
        nc,
    })
}

pub(super) enum Outcome {
    Rows(Vec<(String, f64, &'static str)>),
    Skip(String),
}

fn one(name: &str, value: f64, kind: &'static str) -> Outcome {
    Outcome::Rows(vec![(name.to_string(), value, kind)])
}

fn skip(e: impl ToString) -> Outcome {
    Outcome::Skip(e.to_string())
}

macro_rules! avail {
    ($expr:expr) => {
        match &$expr {
            Ok(v) => v,
            Err(r) => return Outcome::Skip(format!("original side unavailable: {r}")),
        }
    };
}

macro_rules! try_metric {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => return skip(e),
        }
    };
}

pub(super) fn eval_metric(
    id: &str,
    orig: &OriginalSide,
    g_priv: &Graph,
    rng: &mut ChaCha8Rng,
    knobs: &Knobs,
) -> Outcome {
    let g = &orig.graph;
    match id {
        "num-nodes" => {
            let (n, np) = (g.node_count() as f64, g_priv.node_count() as f64);
            one("num-nodes", (n - np).abs() / n, "relative")
        }
        "num-edges" => {
            let m = g.edge_count() as f64;
            if m == 0.0 {
                return skip("original graph has no edges");
            }
            one("num-edges", (m - g_priv.edge_count() as f64).abs() / m, "relative")
        }
        "density" => {
            let orig_d = avail!(orig.density);
            let priv_d = try_metric!(density(g_priv));
            one("density", (orig_d - priv_d).abs(), "absolute")
        }
        "harmonic-diameter" => {
            let orig_h = avail!(orig.harmonic_diameter);
            let priv_h = try_metric!(harmonic_diameter(g_priv));
            one("harmonic-diameter", (orig_h - priv_h).abs() / orig_h, "relative")
        }
        "assortativity" => {
            let orig_a = avail!(orig.assortativity);
            let priv_a = match try_metric!(assortativity(g_priv)) {
                Some(v) => v,
                None => return skip("assortativity undefined on private graph (regular)"),
            };
            one("assortativity", (orig_a - priv_a).abs(), "absolute")
        }
        "modularity" => {
            let (_, orig_q) = avail!(orig.louvain);
            let part = try_metric!(louvain(g_priv, rng));
            let priv_q = try_metric!(modularity(g_priv, &part));
            one("modularity", (orig_q - priv_q).abs(), "absolute")
        }
        "ari" => {
            let (orig_part, _) = avail!(orig.louvain);
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            let part = try_metric!(louvain(g_priv, rng));
            one("ari", try_metric!(ari(orig_part, &part)), "raw")
        }
        "degree-dist" => {
            let priv_deg = g_priv.degree_sequence().to_f64();
            one(
                "degree-dist",
                try_metric!(wasserstein1(&orig.degrees, &priv_deg)),
                "wasserstein",
            )
        }
        "clustering-dist" => {
            let priv_c = clustering_coefficients(g_priv);
            one(
                "clustering-dist",
                try_metric!(wasserstein1(&orig.clustering, &priv_c)),
                "wasserstein",
            )
        }
        "betweenness-dist" => {
            let orig_b = avail!(orig.betweenness);
            let priv_b = try_metric!(betweenness(
                g_priv,
                CentralityMode::Sampled {
                    target_rel_error: DEFAULT_TARGET_REL_ERROR
                },
                rng
            ));
            one(
                "betweenness-dist",
                try_metric!(wasserstein1(orig_b, &priv_b.values)),
                "wasserstein",
            )
        }
        "closeness-dist" => {
            let orig_c = avail!(orig.closeness);
            let priv_c = try_metric!(closeness(
                g_priv,
                CentralityMode::Sampled {
                    target_rel_error: DEFAULT_TARGET_REL_ERROR
                },
                rng
            ));
            one(
                "closeness-dist",
                try_metric!(wasserstein1(orig_c, &priv_c.values)),
                "wasserstein",
            )
        }
        "ndcg" => {
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            one("ndcg", try_metric!(pagerank_ndcg(g, g_priv)), "raw")
        }
        "ic-spread" => {
            let orig_s = avail!(orig.spread);
            let seeds = try_metric!(select_seeds(
                g_priv,
                knobs.cascade.seed_fraction,
                knobs.cascade.edge_prob,
                rng
            ));
            let priv_s = try_metric!(independent_cascade(g_priv, &seeds, &knobs.cascade, rng));
            one("ic-spread", (orig_s - priv_s).abs(), "absolute")
        }
        "lp-auroc" => {
            let (test, orig_score) = avail!(orig.lp);
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            let score = try_metric!(gcn_train_eval(
                g_priv,
                GcnTask::LinkPrediction,
                &knobs.gcn,
                Some(test),
                rng
            ));
            one("lp-auroc", (orig_score - score.value).abs(), "absolute")
        }
        "nc-f1" => {
            let (test, orig_score) = avail!(orig.nc);
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            let score = try_metric!(gcn_train_eval(
                g_priv,
                GcnTask::NodeClassification,
                &knobs.gcn,
                Some(test),
                rng
            ));
            one("nc-f1", (orig_score - score.value).abs(), "absolute")
        }
        other => Outcome::Skip(format!("unknown metric '{other}'")),
    }
}

const MEMBERSHIP_PAIRS_PER_CLASS: usize = 200;

pub(super) fn eval_attack(
    id: &str,
    orig: &OriginalSide,
    g_priv: &Graph,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let g = &orig.graph;
    match id {
        "membership" => {
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            let per_class = MEMBERSHIP_PAIRS_PER_CLASS.min(g.edge_count() / 2);
            if per_class == 0 {
                return skip("too few edges for balanced membership splits");
            }
            let (eval, calib) = try_metric!(build_membership_splits(g, per_class, rng));
            let report = try_metric!(membership_inference(g_priv, &eval, &calib));
            Outcome::Rows(vec![
                (
                    "attack.membership.baseline-acc".into(),
                    report.baseline_accuracy,
                    "raw",
                ),
                (
                    "attack.membership.cn-acc".into(),
                    report.common_neighbor_accuracy,
                    "raw",
                ),
            ])
        }
        "reconstruction" => {
            if g.node_count() != g_priv.node_count() {
                return skip("node-count-mismatch");
            }
            let estimate = identity_reconstruction(g_priv);
            one(
                "attack.reconstruction.rae",
                try_metric!(reconstruction_rae(g, &estimate)),
                "raw",
            )
        }
        "deanon" => {
            let mapping = try_metric!(seedfree_deanonymize(g, g_priv));
            let ec = try_metric!(edge_correctness(g, g_priv, &mapping));
            let s3 = try_metric!(s3_score(g, g_priv, &mapping));
            Outcome::Rows(vec![
                ("attack.deanon.edge-correctness".into(), ec, "raw"),
                ("attack.deanon.s3".into(), s3, "raw"),
            ])
        }
        other => Outcome::Skip(format!("unknown attack '{other}'")),
    }
}

/// One-shot comparison of two graphs over a metric selection, for the CLI.
/// Returns the report plus (metric, reason) pairs for anything skipped.
pub fn one_shot_metrics(
    original: &Graph,
    private: &Graph,
    selection: &[String],
    seed: u64,
) -> Result<(MetricReport, Vec<(String, String)>)> {
    let ids = expand_metric_ids(selection)?;
    let root = SeedTree::from_seed(seed);
    let knobs = Knobs {
        cascade: CascadeConfig::default(),
        gcn: GcnConfig::default(),
    };
    let orig = prepare_original(original.clone(), &ids, &[], &root, &knobs)?;
    let mut report = MetricReport::new();
    let mut skips = Vec::new();
    for id in &ids {
        let mut rng = root.child("metric").child(id).rng();
        match eval_metric(id, &orig, private, &mut rng, &knobs) {
            Outcome::Rows(rows) => {
                for (name, value, kind) in rows {
                    let kind = match kind {
                        "absolute" => ErrorKind::Absolute,
                        "relative" => ErrorKind::Relative,
                        "wasserstein" => ErrorKind::Wasserstein,
                        _ => ErrorKind::Raw,
                    };
                    report.insert(name, value, kind)?;
                }
            }
            Outcome::Skip(reason) => skips.push((id.clone(), reason)),
        }
    }
    Ok((report, skips))
}
