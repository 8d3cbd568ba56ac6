//! The experiment loop: privatize, measure, serialize.

use super::eval::{eval_attack, eval_metric, prepare_original, Knobs, Outcome};
use super::*;
use std::fs;
use std::io::Write;

struct CellOutput {
    rows: Vec<ResultRow>,
    skips: Vec<SkipRecord>,
    evaluations: usize,
}

/// Write-then-rename so partially written outputs never shadow results.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(tmp.display().to_string(), e))?;
    f.sync_all().map_err(|e| Error::io(tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn rows_to_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::invalid(format!("csv serialization: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv flush: {e}")))
}

/// Aggregate as written to JSON: per metric, per epsilon, mean and sample
/// standard deviation over trials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub mechanism: String,
    pub trials: usize,
    pub epsilons: Vec<f64>,
    pub metrics: BTreeMap<String, MetricAggregate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub error_kind: String,
    pub per_epsilon: Vec<EpsilonStats>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonStats {
    pub epsilon: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 when only one trial contributed.
    pub stdev: f64,
    pub count: usize,
}

pub fn aggregate_rows(
    dataset: &str,
    mechanism: &str,
    trials: usize,
    epsilons: &[f64],
    rows: &[ResultRow],
) -> Aggregate {
    let mut grouped: BTreeMap<(String, String), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        grouped
            .entry((row.metric.clone(), row.error_kind.clone()))
            .or_default()
            .entry(row.epsilon.to_bits())
            .or_default()
            .push(row.value);
    }
    let mut metrics = BTreeMap::new();
    for ((metric, error_kind), by_eps) in grouped {
        let mut per_epsilon = Vec::new();
        for &eps in epsilons {
            let Some(values) = by_eps.get(&eps.to_bits()) else {
                continue;
            };
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let stdev = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            per_epsilon.push(EpsilonStats {
                epsilon: eps,
                mean,
                stdev,
                count: values.len(),
            });
        }
        metrics.insert(
            metric,
            MetricAggregate {
                error_kind,
                per_epsilon,
            },
        );
    }
    Aggregate {
        dataset: dataset.into(),
        mechanism: mechanism.into(),
        trials,
        epsilons: epsilons.to_vec(),
        metrics,
    }
}

/// Execute the configured sweep. For each (epsilon, trial) cell the dataset
/// is privatized once; selected metrics are evaluated against the original
/// and attacks run on the configured epsilon subset. Outputs land in
/// `output_dir` as `raw.csv`, `aggregate.json`, and `skips.csv` (when any
/// metric was skipped).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let root = SeedTree::from_seed(cfg.base_seed);
    let graph = cfg.dataset.load(&mut root.child("dataset").rng())?;
    let dataset_name = cfg.dataset.name();
    let mechanism = Mechanism::from_config(&cfg.mechanism)?;
    let metric_ids = expand_metric_ids(&cfg.metrics)?;
    let attack_ids = expand_attack_ids(&cfg.attacks)?;
    let knobs = Knobs {
        cascade: cfg.cascade,
        gcn: cfg.gcn.to_config(),
    };
    let original = prepare_original(graph, &metric_ids, &attack_ids, &root, &knobs)?;

    let cells: Vec<(usize, f64, usize)> = cfg
        .epsilons
        .iter()
        .enumerate()
        .flat_map(|(ei, &eps)| (0..cfg.trials).map(move |t| (ei, eps, t)))
        .collect();

    let outputs: Vec<CellOutput> = cells
        .par_iter()
        .map(|&(ei, eps, trial)| -> Result<CellOutput> {
            let mut mech_rng = root
                .child("mech")
                .child_index(ei as u64)
                .child_index(trial as u64)
                .rng();
            let g_priv = mechanism.apply(&original.graph, eps, cfg.delta, &mut mech_rng)?;

            let mut rows = Vec::new();
            let mut skips = Vec::new();
            let mut evaluations = 0usize;
            let handle = |id: &str, outcome: Outcome, rows: &mut Vec<ResultRow>, skips: &mut Vec<SkipRecord>| {
                match outcome {
                    Outcome::Rows(emitted) => {
                        for (metric, value, kind) in emitted {
                            rows.push(ResultRow {
                                dataset: dataset_name.clone(),
                                mechanism: mechanism.id().into(),
                                epsilon: eps,
                                trial,
                                metric,
                                value,
                                error_kind: kind.into(),
                            });
                        }
                    }
                    Outcome::Skip(reason) => skips.push(SkipRecord {
                        epsilon: eps,
                        trial,
                        metric: id.into(),
                        reason,
                    }),
                }
            };

            for id in &metric_ids {
                let mut rng = root
                    .child("metric")
                    .child(id)
                    .child_index(ei as u64)
                    .child_index(trial as u64)
                    .rng();
                evaluations += 1;
                let outcome = eval_metric(id, &original, &g_priv, &mut rng, &knobs);
                handle(id, outcome, &mut rows, &mut skips);
            }
            if cfg.attack_epsilons.contains(&eps) {
                for id in &attack_ids {
                    let mut rng = root
                        .child("attack")
                        .child(id)
                        .child_index(ei as u64)
                        .child_index(trial as u64)
                        .rng();
                    evaluations += 1;
                    let outcome = eval_attack(id, &original, &g_priv, &mut rng);
                    handle(id, outcome, &mut rows, &mut skips);
                }
            }
            Ok(CellOutput {
                rows,
                skips,
                evaluations,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // accounting: every (cell, metric/attack) evaluation produced rows or a
    // logged skip
    let attack_cells = cells
        .iter()
        .filter(|&&(_, eps, _)| cfg.attack_epsilons.contains(&eps))
        .count();
    let expected_evaluations =
        cells.len() * metric_ids.len() + attack_cells * attack_ids.len();
    let actual_evaluations: usize = outputs.iter().map(|o| o.evaluations).sum();
    if actual_evaluations != expected_evaluations {
        return Err(Error::invalid(format!(
            "evaluation accounting mismatch: {actual_evaluations} vs expected {expected_evaluations}"
        )));
    }

    let mut rows = Vec::new();
    let mut skips = Vec::new();
    for out in outputs {
        rows.extend(out.rows);
        skips.extend(out.skips);
    }

    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::io(cfg.output_dir.display().to_string(), e))?;
    let csv_path = cfg.output_dir.join("raw.csv");
    write_atomic(&csv_path, &rows_to_csv(&rows)?)?;

    let aggregate = aggregate_rows(
        &dataset_name,
        mechanism.id(),
        cfg.trials,
        &cfg.epsilons,
        &rows,
    );
    let aggregate_path = cfg.output_dir.join("aggregate.json");
    let json = serde_json::to_vec_pretty(&aggregate)
        .map_err(|e| Error::invalid(format!("aggregate serialization: {e}")))?;
    write_atomic(&aggregate_path, &json)?;

    if !skips.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &skips {
            w.serialize(s)
                .map_err(|e| Error::invalid(format!("skip log serialization: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("skip log flush: {e}")))?;
        write_atomic(&cfg.output_dir.join("skips.csv"), &bytes)?;
    }

    Ok(RunSummary {
        private_graphs: cells.len(),
        rows: rows.len(),
        skips,
        csv_path,
        aggregate_path,
    })
}
