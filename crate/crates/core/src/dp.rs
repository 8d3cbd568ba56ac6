//! Privacy parameters, noise primitives, budget composition, and an
//! empirical ratio verifier for mechanisms over small output alphabets.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// What a mechanism protects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrivacyTarget {
    Edge,
    Node,
    NodeAttribute,
}

/// Who is trusted with raw data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrustModel {
    Central,
    Local,
}

/// The privacy contract a mechanism declares: budget, failure probability,
/// target, and trust model. `delta = 0` means pure DP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    #[serde(default)]
    delta: f64,
    pub target: PrivacyTarget,
    pub trust: TrustModel,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, target: PrivacyTarget, trust: TrustModel) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!("delta must be in [0,1), got {delta}")));
        }
        Ok(PrivacyParams {
            epsilon,
            delta,
            target,
            trust,
        })
    }

    pub fn pure(epsilon: f64, target: PrivacyTarget, trust: TrustModel) -> Result<Self> {
        Self::new(epsilon, 0.0, target, trust)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// Sensitivity of a query: the largest p-norm distance between outputs on
/// neighboring inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivitySpec {
    pub p_norm: u8,
    pub value: f64,
}

impl SensitivitySpec {
    pub fn l1(value: f64) -> Result<Self> {
        Self::new(1, value)
    }

    pub fn new(p_norm: u8, value: f64) -> Result<Self> {
        if p_norm != 1 && p_norm != 2 {
            return Err(Error::invalid("p_norm must be 1 or 2"));
        }
        if !(value >= 0.0) {
            return Err(Error::invalid("sensitivity must be non-negative"));
        }
        Ok(SensitivitySpec { p_norm, value })
    }
}

/// One draw from Laplace(0, scale): density (1/2b) exp(-|x|/b).
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }
    // magnitude ~ Exp(1/b), sign uniform
    let u: f64 = rng.random();
    let magnitude = -scale * (1.0 - u).ln();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    Ok(sign * magnitude)
}

/// Flip probability of the binary randomized-response channel at budget
/// `epsilon`: f = 1 / (1 + e^eps). The channel satisfies eps-DP per bit
/// since (1-f)/f = e^eps.
pub fn rr_flip_prob(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(1.0 / (1.0 + epsilon.exp()))
}

/// Basic sequential composition: budgets add componentwise. All entries
/// must share the same target and trust model.
pub fn compose_sequential(budgets: &[PrivacyParams]) -> Result<PrivacyParams> {
    let first = budgets
        .first()
        .ok_or_else(|| Error::invalid("compose_sequential needs at least one budget"))?;
    if budgets
        .iter()
        .any(|b| b.target != first.target || b.trust != first.trust)
    {
        return Err(Error::Incompatible(
            "cannot compose budgets with mixed targets or trust models".into(),
        ));
    }
    let epsilon = budgets.iter().map(|b| b.epsilon).sum();
    let delta = budgets.iter().map(|b| b.delta).sum();
    PrivacyParams::new(epsilon, delta, first.target, first.trust)
}

/// Group privacy: an eps-DP mechanism satisfies (k*eps)-DP for groups of k
/// correlated records.
pub fn effective_group_epsilon(epsilon: f64, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("group size k must be >= 1"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    Ok(f64::from(k) * epsilon)
}

/// Knobs for [`dp_ratio_test`]. The frequency floor keeps rare outcomes
/// (whose empirical ratios are dominated by sampling noise) out of the
/// check; the slack absorbs the remaining noise on frequent outcomes.
#[derive(Clone, Copy, Debug)]
pub struct RatioTestOptions {
    /// Outcomes enter the check once either input produced at least this
    /// many observations.
    pub min_outcome_count: u64,
    /// Pass iff max ratio <= e^eps * (1 + slack).
    pub slack: f64,
    /// Error out if the mechanism emits more distinct outcomes than this.
    pub max_alphabet: usize,
}

impl Default for RatioTestOptions {
    fn default() -> Self {
        RatioTestOptions {
            min_outcome_count: 100,
            slack: 0.1,
            max_alphabet: 4096,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RatioTestReport {
    pub max_ratio: f64,
    pub bound: f64,
    pub passed: bool,
    pub outcomes_checked: usize,
    pub samples: usize,
}

/// Empirically check the DP inequality on a pair of neighboring inputs by
/// tabulating output frequencies and comparing their worst-case ratio (in
/// both directions) to e^eps plus slack.
///
/// Only sound for mechanisms with a small finite output alphabet; this is a
/// verification aid, not a proof.
pub fn dp_ratio_test<I, T, M, R>(
    mut mechanism: M,
    x: &I,
    x_neighbor: &I,
    epsilon: f64,
    samples: usize,
    opts: &RatioTestOptions,
    rng: &mut R,
) -> Result<RatioTestReport>
where
    I: ?Sized,
    T: Ord,
    M: FnMut(&I, &mut R) -> T,
    R: Rng + ?Sized,
{
    if samples < 10_000 {
        return Err(Error::invalid("dp_ratio_test needs at least 10^4 samples"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mut counts: BTreeMap<T, [u64; 2]> = BTreeMap::new();
    for side in 0..2 {
        let input = if side == 0 { x } else { x_neighbor };
        for _ in 0..samples {
            let out = mechanism(input, rng);
            counts.entry(out).or_insert([0, 0])[side] += 1;
            if counts.len() > opts.max_alphabet {
                return Err(Error::invalid(format!(
                    "output alphabet exceeds {} distinct values; too large to tabulate",
                    opts.max_alphabet
                )));
            }
        }
    }
    let mut max_ratio: f64 = 0.0;
    let mut outcomes_checked = 0;
    for [a, b] in counts.values() {
        if a.max(b) < &opts.min_outcome_count {
            continue;
        }
        outcomes_checked += 1;
        let ratio = if *a == 0 || *b == 0 {
            f64::INFINITY
        } else {
            let (fa, fb) = (*a as f64, *b as f64);
            (fa / fb).max(fb / fa)
        };
        max_ratio = max_ratio.max(ratio);
    }
    let bound = epsilon.exp() * (1.0 + opts.slack);
    Ok(RatioTestReport {
        max_ratio,
        bound,
        passed: max_ratio <= bound,
        outcomes_checked,
        samples,
    })
}
