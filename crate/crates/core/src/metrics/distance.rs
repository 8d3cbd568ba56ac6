//! Distances between empirical distributions and simple error measures.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How a reported value relates to a reference value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    /// A direct measurement, not an error against anything.
    Raw,
    Absolute,
    Relative,
    Wasserstein,
}

/// First Wasserstein distance between the empirical distributions of two
/// real multisets, via quantile-function integration. Sizes may differ.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("wasserstein1 requires non-empty inputs"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);

    // merged support; between consecutive values both CDFs are constant
    let mut support: Vec<f64> = sa.iter().chain(sb.iter()).copied().collect();
    support.sort_by(f64::total_cmp);
    support.dedup();

    let cdf = |sorted: &[f64], x: f64| sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64;
    let mut dist = 0.0;
    for w in support.windows(2) {
        let dx = w[1] - w[0];
        dist += (cdf(&sa, w[0]) - cdf(&sb, w[0])).abs() * dx;
    }
    Ok(dist)
}

/// `|y - yhat|` or `|y - yhat| / |y|`.
pub fn error(kind: ErrorKind, y: f64, yhat: f64) -> Result<f64> {
    match kind {
        ErrorKind::Absolute => Ok((y - yhat).abs()),
        ErrorKind::Relative => {
            if y == 0.0 {
                Err(Error::Undefined("relative error with zero reference".into()))
            } else {
                Ok((y - yhat).abs() / y.abs())
            }
        }
        _ => Err(Error::invalid("error() supports absolute and relative kinds")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use rand::Rng;

    #[test]
    fn identical_inputs_give_zero() {
        let a = [1.0, 2.0, 5.5];
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn unit_shift() {
        assert!((wasserstein1(&[0.0, 0.0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_sizes_match_sorted_difference_oracle() {
        let mut rng = SeedTree::from_seed(31).rng();
        for _ in 0..100 {
            let n = rng.random_range(1..40);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut sa = a.clone();
            let mut sb = b.clone();
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            let oracle: f64 =
                sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
            let w = wasserstein1(&a, &b).unwrap();
            assert!((w - oracle).abs() < 1e-12, "{w} vs oracle {oracle}");
        }
    }

    #[test]
    fn unequal_sizes_supported() {
        // [0] vs [0,1]: quantile functions differ on the upper half by 1
        let w = wasserstein1(&[0.0], &[0.0, 1.0]).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        // same empirical distribution at different multiplicities
        let w = wasserstein1(&[0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn symmetric_and_triangle_inequality() {
        let mut rng = SeedTree::from_seed(32).rng();
        for _ in 0..100 {
            let mut draw = |len: usize| -> Vec<f64> {
                (0..len).map(|_| rng.random_range(-3.0..3.0)).collect()
            };
            let (a, b, c) = (draw(7), draw(11), draw(5));
            let ab = wasserstein1(&a, &b).unwrap();
            let ba = wasserstein1(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            let ac = wasserstein1(&a, &c).unwrap();
            let cb = wasserstein1(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-12, "triangle violated: {ab} > {ac} + {cb}");
        }
    }

    #[test]
    fn empty_input_is_error() {
        assert!(wasserstein1(&[], &[1.0]).is_err());
        assert!(wasserstein1(&[1.0], &[]).is_err());
    }

    #[test]
    fn error_examples() {
        assert_eq!(error(ErrorKind::Absolute, 3.0, 5.0).unwrap(), 2.0);
        assert_eq!(error(ErrorKind::Relative, 4.0, 5.0).unwrap(), 0.25);
        assert_eq!(error(ErrorKind::Absolute, 7.3, 7.3).unwrap(), 0.0);
        assert!(error(ErrorKind::Relative, 0.0, 1.0).is_err());
    }
}
