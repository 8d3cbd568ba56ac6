//! Cross-mechanism comparison tables built from aggregate files.

use super::runner::Aggregate;
use super::*;
use std::fs;

/// Lower values win for error-kinded metrics and for attack success
/// measures; higher values win for raw utility scores (ARI, NDCG).
fn lower_is_better(metric: &str, error_kind: &str) -> bool {
    if error_kind != "raw" {
        return true;
    }
    metric.starts_with("attack.")
}

pub fn load_aggregate(path: impl AsRef<Path>) -> Result<Aggregate> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Build a per-metric, per-epsilon comparison of two or more aggregates:
/// mean and sample stdev per mechanism plus a best-mechanism marker (ties
/// broken lexicographically by mechanism id). Errors when the epsilon
/// grids share no point.
pub fn compare_report(aggregates: &[Aggregate]) -> Result<String> {
    if aggregates.len() < 2 {
        return Err(Error::invalid("compare_report needs at least two result sets"));
    }
    // column order independent of argument order
    let mut aggregates: Vec<&Aggregate> = aggregates.iter().collect();
    aggregates.sort_by(|a, b| a.mechanism.cmp(&b.mechanism));
    let ids: Vec<String> = aggregates.iter().map(|a| a.mechanism.clone()).collect();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate mechanism ids in comparison inputs"));
    }
    // shared epsilon grid (exact match; schedules come from the same config
    // vocabulary)
    let mut shared: Vec<f64> = aggregates[0].epsilons.clone();
    for a in &aggregates[1..] {
        shared.retain(|e| a.epsilons.contains(e));
    }
    let aggregates = &aggregates;
    if shared.is_empty() {
        return Err(Error::Incompatible("epsilon grids are disjoint".into()));
    }

    let mut metrics: Vec<(String, String)> = Vec::new();
    for a in aggregates {
        for (name, ma) in &a.metrics {
            let key = (name.clone(), ma.error_kind.clone());
            if !metrics.contains(&key) {
                metrics.push(key);
            }
        }
    }
    metrics.sort();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["metric".to_string(), "epsilon".to_string()];
    for id in &ids {
        header.push(format!("{id}_mean"));
        header.push(format!("{id}_stdev"));
    }
    header.push("best".into());
    w.write_record(&header)
        .map_err(|e| Error::invalid(format!("csv: {e}")))?;

    for (metric, error_kind) in &metrics {
        for &eps in &shared {
            let mut record: Vec<String> = vec![metric.clone(), eps.to_string()];
            let mut best: Option<(f64, &str)> = None;
            let lower = lower_is_better(metric, error_kind);
            for (a, id) in aggregates.iter().zip(&ids) {
                let stats = a
                    .metrics
                    .get(metric)
                    .and_then(|ma| ma.per_epsilon.iter().find(|s| s.epsilon == eps));
                match stats {
                    Some(s) => {
                        record.push(s.mean.to_string());
                        record.push(s.stdev.to_string());
                        let better = match best {
                            None => true,
                            Some((current, best_id)) => {
                                if s.mean == current {
                                    id.as_str() < best_id
                                } else if lower {
                                    s.mean < current
                                } else {
                                    s.mean > current
                                }
                            }
                        };
                        if better {
                            best = Some((s.mean, id));
                        }
                    }
                    None => {
                        record.push(String::new());
                        record.push(String::new());
                    }
                }
            }
            record.push(best.map(|(_, id)| id.to_string()).unwrap_or_default());
            w.write_record(&record)
                .map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(format!("utf8: {e}")))
}

/// Convenience wrapper: load aggregate files and write the table.
pub fn compare_files(paths: &[PathBuf]) -> Result<String> {
    let aggregates = paths
        .iter()
        .map(load_aggregate)
        .collect::<Result<Vec<_>>>()?;
    compare_report(&aggregates)
}

#[cfg(test)]
mod tests {
    use super::super::runner::{EpsilonStats, MetricAggregate};
    use super::*;

    fn agg(mechanism: &str, epsilons: &[f64], metric: &str, kind: &str, means: &[f64]) -> Aggregate {
        let per_epsilon = epsilons
            .iter()
            .zip(means)
            .map(|(&epsilon, &mean)| EpsilonStats {
                epsilon,
                mean,
                stdev: 0.1,
                count: 10,
            })
            .collect();
        let mut metrics = BTreeMap::new();
        metrics.insert(
            metric.to_string(),
            MetricAggregate {
                error_kind: kind.into(),
                per_epsilon,
            },
        );
        Aggregate {
            dataset: "d".into(),
            mechanism: mechanism.into(),
            trials: 10,
            epsilons: epsilons.to_vec(),
            metrics,
        }
    }

    #[test]
    fn hand_built_two_by_two_grid() {
        let a = agg("alpha", &[1.0, 2.0], "density", "absolute", &[0.3, 0.1]);
        let b = agg("beta", &[1.0, 2.0], "density", "absolute", &[0.2, 0.4]);
        let table = compare_report(&[a, b]).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "metric,epsilon,alpha_mean,alpha_stdev,beta_mean,beta_stdev,best");
        assert_eq!(lines[1], "density,1,0.3,0.1,0.2,0.1,beta");
        assert_eq!(lines[2], "density,2,0.1,0.1,0.4,0.1,alpha");
    }

    #[test]
    fn ties_break_lexicographically_and_raw_utility_prefers_higher() {
        let a = agg("zeta", &[1.0], "ari", "raw", &[0.5]);
        let b = agg("eta", &[1.0], "ari", "raw", &[0.5]);
        let table = compare_report(&[a, b]).unwrap();
        assert!(table.lines().nth(1).unwrap().ends_with(",eta"));

        let a = agg("alpha", &[1.0], "attack.deanon.s3", "raw", &[40.0]);
        let b = agg("beta", &[1.0], "attack.deanon.s3", "raw", &[10.0]);
        let table = compare_report(&[a, b]).unwrap();
        assert!(table.lines().nth(1).unwrap().ends_with(",beta"));
    }

    #[test]
    fn disjoint_grids_error() {
        let a = agg("alpha", &[1.0], "density", "absolute", &[0.1]);
        let b = agg("beta", &[2.0], "density", "absolute", &[0.1]);
        assert!(compare_report(&[a, b]).is_err());
        let single = agg("alpha", &[1.0], "density", "absolute", &[0.1]);
        assert!(compare_report(&[single]).is_err());
    }

    #[test]
    fn single_mechanism_table_equals_its_aggregate() {
        // two copies of the same mechanism id are rejected, so compare a
        // mechanism against a renamed clone: every cell ties
        let a = agg("alpha", &[1.0, 2.0], "density", "absolute", &[0.3, 0.1]);
        let b = agg("beta", &[1.0, 2.0], "density", "absolute", &[0.3, 0.1]);
        let table = compare_report(&[a, b]).unwrap();
        for line in table.lines().skip(1) {
            assert!(line.ends_with(",alpha"), "tie should break to 'alpha': {line}");
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[2], cols[4]);
        }
    }
}
