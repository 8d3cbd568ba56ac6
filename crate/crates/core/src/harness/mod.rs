//! Experiment harness: config, the privatize-measure-report loop, and
//! result serialization.
//!
//! A run sweeps an epsilon schedule with several trials per budget. Every
//! trial privatizes the dataset, evaluates the selected metrics against
//! the original graph, and appends one row per measurement to a raw CSV;
//! attacks run on a configured epsilon subset. Aggregates (mean and sample
//! standard deviation per metric per epsilon) go to a JSON file. Runs are
//! deterministic: every random decision draws from a seed tree keyed by
//! (epsilon index, trial, consumer), so trials parallelize without
//! perturbing each other and re-runs are byte-identical.

pub mod compare;
pub mod synth;

pub use compare::{compare_files, compare_report, load_aggregate};
pub use synth::{synth_dataset, SynthSpec};

use crate::dp::{PrivacyParams, PrivacyTarget, TrustModel};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, load_features_csv, load_labels_csv, EdgeListFormat, Graph};
use crate::mech::{
    attr_rr, degree_laplace_chunglu, edge_rr_with, pi_v_node_dp, EdgeRrOptions,
    MechanismDescriptor, PiVParams, Transformation,
};
use crate::metrics::{
    ari, assortativity, betweenness, clustering_coefficients, closeness, density,
    harmonic_diameter, louvain, modularity, wasserstein1, CentralityMode, ErrorKind,
    DEFAULT_TARGET_REL_ERROR,
};
use crate::rng::SeedTree;
use crate::simpred::{
    gcn_train_eval, independent_cascade, make_link_test_set, make_node_test_set, pagerank_ndcg,
    select_seeds, CascadeConfig, FixedTestSet, GcnConfig, GcnTask,
};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const DEFAULT_EPSILONS: [f64; 12] =
    [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.5, 6.5, 9.0, 12.0, 16.0, 20.0];
pub const DEFAULT_ATTACK_EPSILONS: [f64; 3] = [1.0, 3.0, 9.0];
pub const DEFAULT_TRIALS: usize = 10;

/// Where the input graph comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    Path {
        path: PathBuf,
        #[serde(default)]
        features: Option<PathBuf>,
        #[serde(default)]
        labels: Option<PathBuf>,
        #[serde(default)]
        name: Option<String>,
    },
    Synth {
        synth: SynthSpec,
        #[serde(default)]
        name: Option<String>,
    },
}

impl DatasetSpec {
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Path { name: Some(n), .. } | DatasetSpec::Synth { name: Some(n), .. } => {
                n.clone()
            }
            DatasetSpec::Path { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
            DatasetSpec::Synth { synth, .. } => match synth {
                SynthSpec::Er { .. } => "er".into(),
                SynthSpec::PlantedPartition { .. } => "planted-partition".into(),
                SynthSpec::PowerLawChungLu { .. } => "power-law-cl".into(),
            },
        }
    }

    pub fn load(&self, rng: &mut ChaCha8Rng) -> Result<Graph> {
        match self {
            DatasetSpec::Path {
                path,
                features,
                labels,
                ..
            } => {
                let loaded = load_edge_list(path, EdgeListFormat::Auto)?;
                let mut g = loaded.graph;
                if let Some(fp) = features {
                    let f = load_features_csv(fp, g.node_count())?;
                    g = g.with_features(f)?;
                }
                if let Some(lp) = labels {
                    let l = load_labels_csv(lp, g.node_count())?;
                    g = g.with_labels(l)?;
                }
                Ok(g)
            }
            DatasetSpec::Synth { synth, .. } => synth_dataset(synth, rng),
        }
    }
}

/// Mechanism selection plus its mechanism-specific knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub id: String,
    /// vertex removal probability (pi-v only)
    #[serde(default)]
    pub p: Option<f64>,
    /// vertex addition control (pi-v only)
    #[serde(default)]
    pub q: Option<f64>,
    /// subsample edge-rr output back to the input edge count
    #[serde(default)]
    pub project_to_input_edge_count: bool,
}

/// A resolved mechanism, ready to apply per (epsilon, trial).
#[derive(Clone, Debug)]
pub enum Mechanism {
    EdgeRr { project: bool },
    DegLapCl,
    PiV { p: f64, q: f64 },
    AttrRr,
}

pub fn mechanism_ids() -> [&'static str; 4] {
    ["edge-rr", "deg-lap-cl", "pi-v", "attr-rr"]
}

impl Mechanism {
    pub fn from_config(cfg: &MechanismConfig) -> Result<Self> {
        match cfg.id.as_str() {
            "edge-rr" => Ok(Mechanism::EdgeRr {
                project: cfg.project_to_input_edge_count,
            }),
            "deg-lap-cl" => Ok(Mechanism::DegLapCl),
            "pi-v" => {
                let p = cfg.p.ok_or_else(|| Error::Config("pi-v requires p".into()))?;
                let q = cfg.q.ok_or_else(|| Error::Config("pi-v requires q".into()))?;
                Ok(Mechanism::PiV { p, q })
            }
            "attr-rr" => Ok(Mechanism::AttrRr),
            other => Err(Error::Config(format!(
                "unknown mechanism '{other}'; available: {:?}",
                mechanism_ids()
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Mechanism::EdgeRr { .. } => "edge-rr",
            Mechanism::DegLapCl => "deg-lap-cl",
            Mechanism::PiV { .. } => "pi-v",
            Mechanism::AttrRr => "attr-rr",
        }
    }

    pub fn privacy_params(&self, epsilon: f64, delta: f64) -> Result<PrivacyParams> {
        let (target, trust) = match self {
            Mechanism::EdgeRr { .. } => (PrivacyTarget::Edge, TrustModel::Local),
            Mechanism::DegLapCl => (PrivacyTarget::Edge, TrustModel::Central),
            Mechanism::PiV { .. } => (PrivacyTarget::Node, TrustModel::Central),
            Mechanism::AttrRr => (PrivacyTarget::NodeAttribute, TrustModel::Local),
        };
        PrivacyParams::new(epsilon, delta, target, trust)
    }

    pub fn descriptor(&self, epsilon: f64, delta: f64) -> Result<MechanismDescriptor> {
        let (transformation, notes) = match self {
            Mechanism::EdgeRr { .. } => (
                Transformation::Perturbation,
                "randomized response over adjacency bits",
            ),
            Mechanism::DegLapCl => (
                Transformation::PerturbThenGenerate,
                "Laplace-noised degrees fed to a Chung-Lu generator",
            ),
            Mechanism::PiV { .. } => (
                Transformation::Perturbation,
                "vertex removal with randomly wired replacements",
            ),
            Mechanism::AttrRr => (
                Transformation::Perturbation,
                "per-bit randomized response on feature vectors",
            ),
        };
        Ok(MechanismDescriptor {
            id: self.id().into(),
            params: self.privacy_params(epsilon, delta)?,
            transformation,
            notes: notes.into(),
        })
    }

    pub fn apply(
        &self,
        g: &Graph,
        epsilon: f64,
        delta: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Graph> {
        let params = self.privacy_params(epsilon, delta)?;
        match self {
            Mechanism::EdgeRr { project } => edge_rr_with(
                g,
                &params,
                EdgeRrOptions {
                    project_to_input_edge_count: *project,
                },
                rng,
            ),
            Mechanism::DegLapCl => degree_laplace_chunglu(g, &params, rng),
            Mechanism::PiV { p, q } => {
                let pi = PiVParams::new(*p, *q, g.node_count(), epsilon)?;
                pi_v_node_dp(g, &params, &pi, rng)
            }
            Mechanism::AttrRr => attr_rr(g, &params, rng),
        }
    }
}

/// Full experiment description; the JSON config file mirrors these fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub mechanism: MechanismConfig,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    #[serde(default)]
    pub attacks: Vec<String>,
    #[serde(default = "default_attack_epsilons")]
    pub attack_epsilons: Vec<f64>,
    #[serde(default)]
    pub delta: f64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cascade: CascadeConfig,
    #[serde(default)]
    pub gcn: GcnSettings,
}

fn default_epsilons() -> Vec<f64> {
    DEFAULT_EPSILONS.to_vec()
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_metrics() -> Vec<String> {
    vec!["descriptive".into()]
}

fn default_attack_epsilons() -> Vec<f64> {
    DEFAULT_ATTACK_EPSILONS.to_vec()
}

/// The GCN knobs exposed through the config file.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GcnSettings {
    pub hidden_dim: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for GcnSettings {
    fn default() -> Self {
        let cfg = GcnConfig::default();
        GcnSettings {
            hidden_dim: cfg.hidden_dim,
            dropout: cfg.dropout,
            learning_rate: cfg.learning_rate,
            epochs: cfg.epochs,
        }
    }
}

impl GcnSettings {
    fn to_config(self) -> GcnConfig {
        GcnConfig {
            hidden_dim: self.hidden_dim,
            dropout: self.dropout,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            ..Default::default()
        }
    }
}

/// Metric presets named by the scenarios they serve.
pub fn expand_metric_ids(selection: &[String]) -> Result<Vec<String>> {
    const DESCRIPTIVE: [&str; 9] = [
        "density",
        "harmonic-diameter",
        "assortativity",
        "modularity",
        "ari",
        "degree-dist",
        "clustering-dist",
        "betweenness-dist",
        "closeness-dist",
    ];
    let mut out: Vec<String> = Vec::new();
    let push = |id: &str, out: &mut Vec<String>| {
        if !out.iter().any(|x| x == id) {
            out.push(id.to_string());
        }
    };
    for entry in selection {
        match entry.as_str() {
            "descriptive" => DESCRIPTIVE.iter().for_each(|m| push(m, &mut out)),
            "scenario1" => {
                DESCRIPTIVE.iter().for_each(|m| push(m, &mut out));
                for m in ["ndcg", "ic-spread", "lp-auroc", "nc-f1"] {
                    push(m, &mut out);
                }
            }
            "scenario2" => {
                for m in ["num-nodes", "num-edges"] {
                    push(m, &mut out);
                }
                DESCRIPTIVE
                    .iter()
                    .filter(|m| !matches!(**m, "ari" | "modularity"))
                    .for_each(|m| push(m, &mut out));
            }
            id if metric_ids().contains(&id) => push(id, &mut out),
            other => {
                return Err(Error::Config(format!(
                    "unknown metric or preset '{other}'; available: {:?} plus presets \
                     descriptive/scenario1/scenario2",
                    metric_ids()
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no metrics selected".into()));
    }
    Ok(out)
}

pub fn metric_ids() -> [&'static str; 15] {
    [
        "num-nodes",
        "num-edges",
        "density",
        "harmonic-diameter",
        "assortativity",
        "modularity",
        "ari",
        "degree-dist",
        "clustering-dist",
        "betweenness-dist",
        "closeness-dist",
        "ndcg",
        "ic-spread",
        "lp-auroc",
        "nc-f1",
    ]
}

pub fn attack_ids() -> [&'static str; 3] {
    ["membership", "reconstruction", "deanon"]
}

pub fn expand_attack_ids(selection: &[String]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for entry in selection {
        let ids: Vec<&str> = match entry.as_str() {
            "scenario1" => vec!["membership", "reconstruction"],
            "scenario2" => vec!["deanon"],
            "all" => attack_ids().to_vec(),
            id if attack_ids().contains(&id) => vec![id],
            other => {
                return Err(Error::Config(format!(
                    "unknown attack '{other}'; available: {:?} plus presets \
                     scenario1/scenario2/all",
                    attack_ids()
                )))
            }
        };
        for id in ids {
            if !out.iter().any(|x| x == id) {
                out.push(id.to_string());
            }
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilon schedule is empty".into()));
        }
        if self.epsilons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("epsilons must be strictly increasing".into()));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("epsilons must be positive".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !self.attacks.is_empty() {
            for ae in &self.attack_epsilons {
                if !self.epsilons.contains(ae) {
                    return Err(Error::Config(format!(
                        "attack epsilon {ae} is not part of the schedule"
                    )));
                }
            }
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Config("delta must lie in [0,1)".into()));
        }
        expand_metric_ids(&self.metrics)?;
        expand_attack_ids(&self.attacks)?;
        Mechanism::from_config(&self.mechanism)?;
        self.cascade.validate()?;
        self.gcn.to_config().validate()?;
        Ok(())
    }
}

/// One measurement row of the raw CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub mechanism: String,
    pub epsilon: f64,
    pub trial: usize,
    pub metric: String,
    pub value: f64,
    pub error_kind: String,
}

/// A metric that could not be computed for one trial, with a reason code.
#[derive(Clone, Debug, Serialize)]
pub struct SkipRecord {
    pub epsilon: f64,
    pub trial: usize,
    pub metric: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub private_graphs: usize,
    pub rows: usize,
    pub skips: Vec<SkipRecord>,
    pub csv_path: PathBuf,
    pub aggregate_path: PathBuf,
}

mod eval;
mod runner;

pub use eval::one_shot_metrics;
pub use runner::{aggregate_rows, run_experiment, Aggregate, EpsilonStats, MetricAggregate};
