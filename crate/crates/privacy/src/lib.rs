//! Differentially private release of label proportions.
//!
//! Each bag's positive and negative counts have sensitivity 1, so adding
//! Laplace noise of scale `k / η` to both counts of each of `k` disjoint bags
//! gives `η`-differential privacy overall (`η / k` per bag, summed).
//!
//! The Laplace law is parameterized by its scale `b` (density
//! `exp(-|x|/b) / 2b`), i.e. the inverse of the rate `λ` in the density
//! `λ/2 exp(-λ|x|)`.

use llp_core::rng::{derive_seed, seeded, Rng};
use llp_core::{BagDataset, Label};
use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("Laplace scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("invalid privacy budget: {0}")]
    InvalidBudget(String),
    #[error("disjointness required for stated budget")]
    OverlappingBags,
    #[error("bag {0} has unlabeled members")]
    UnlabeledBag(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] llp_core::CoreError),
}

pub type Result<T, E = PrivacyError> = std::result::Result<T, E>;

/// Inverse CDF of Laplace(0, scale) at `u ∈ (0, 1)`.
pub fn laplace_inverse_cdf(u: f64, scale: f64) -> f64 {
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else if u > 0.5 {
        -scale * (2.0 * (1.0 - u)).ln()
    } else {
        0.0
    }
}

/// One Laplace(0, scale) draw from `rng`.
pub fn laplace_draw(rng: &mut Rng, scale: f64) -> f64 {
    // u in (0, 1): avoid the infinite tails at exactly 0
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    laplace_inverse_cdf(u, scale)
}

/// One Laplace(0, scale) draw from a fresh generator seeded with `seed`.
pub fn laplace_sample(scale: f64, seed: u64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(PrivacyError::InvalidScale(scale));
    }
    Ok(laplace_draw(&mut seeded(seed), scale))
}

/// Total budget `η` split evenly over `k` disjoint queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    eta_total: f64,
    k: usize,
}

impl PrivacyBudget {
    pub fn new(eta_total: f64, k: usize) -> Result<Self> {
        if !(eta_total > 0.0) || eta_total.is_nan() {
            return Err(PrivacyError::InvalidBudget(format!("eta must be positive, got {eta_total}")));
        }
        if k == 0 {
            return Err(PrivacyError::InvalidBudget("k must be at least 1".into()));
        }
        Ok(Self { eta_total, k })
    }

    pub fn eta_total(&self) -> f64 {
        self.eta_total
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn per_query_epsilon(&self) -> f64 {
        self.eta_total / self.k as f64
    }

    /// Laplace scale for a count query: sensitivity 1 over the per-query
    /// budget, `k / η`.
    pub fn scale(&self) -> f64 {
        self.k as f64 / self.eta_total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedCounts {
    pub n_plus_true: u64,
    pub n_minus_true: u64,
    pub n_plus_released: f64,
    pub n_minus_released: f64,
    /// `n₊ᵖ / (n₊ᵖ + n₋ᵖ)` before clamping; NaN when degenerate.
    pub unclamped_proportion: f64,
    /// Clamped to `[0, 1]`, or 0.5 when degenerate (released total not
    /// positive, or an empty set).
    pub released_proportion: f64,
    pub degenerate: bool,
    pub seed: u64,
}

/// Adds independent Laplace noise of scale `k / η` to both counts.
pub fn perturb_counts(n_plus: u64, n_minus: u64, budget: &PrivacyBudget, seed: u64) -> PerturbedCounts {
    let mut rng = seeded(seed);
    perturb_with(n_plus, n_minus, budget.scale(), &mut rng, seed)
}

fn perturb_with(n_plus: u64, n_minus: u64, scale: f64, rng: &mut Rng, seed: u64) -> PerturbedCounts {
    let (g1, g2) = if scale.is_finite() && scale > 0.0 {
        (laplace_draw(rng, scale), laplace_draw(rng, scale))
    } else {
        (0.0, 0.0)
    };
    let plus = n_plus as f64 + g1;
    let minus = n_minus as f64 + g2;
    let total = plus + minus;
    // an empty set has no proportion to release, whatever the noise
    let degenerate = !(total > 0.0) || n_plus + n_minus == 0;
    let unclamped = if degenerate { f64::NAN } else { plus / total };
    PerturbedCounts {
        n_plus_true: n_plus,
        n_minus_true: n_minus,
        n_plus_released: plus,
        n_minus_released: minus,
        unclamped_proportion: unclamped,
        released_proportion: if degenerate { 0.5 } else { unclamped.clamp(0.0, 1.0) },
        degenerate,
        seed,
    }
}

/// Metadata keys written by [`release_private_proportions`].
pub mod keys {
    pub const ETA: &str = "privacy_eta";
    pub const K: &str = "privacy_k";
    pub const SCALE: &str = "privacy_scale";
    pub const SEED: &str = "privacy_seed";
    pub const DEGENERATE: &str = "privacy_degenerate_bags";
}

/// Replaces every bag proportion by its Laplace-perturbed release. The copy
/// carries no ground-truth labels. Bag `b` uses seed `derive_seed(seed, b)`,
/// and the released values depend on the labels only through the counts.
pub fn release_private_proportions(
    data: &BagDataset,
    budget: &PrivacyBudget,
    seed: u64,
) -> Result<(BagDataset, Vec<PerturbedCounts>)> {
    if !data.bags_disjoint() {
        return Err(PrivacyError::OverlappingBags);
    }
    if budget.k() != data.n_bags() {
        return Err(PrivacyError::InvalidBudget(format!(
            "budget is split over {} queries but there are {} bags",
            budget.k(),
            data.n_bags()
        )));
    }
    let counts = (0..data.n_bags())
        .map(|b| {
            let labels = data.bag_labels(b).ok_or(PrivacyError::UnlabeledBag(b))?;
            let plus = labels.iter().filter(|y| **y == Label::Positive).count() as u64;
            let s = derive_seed(seed, b as u64);
            Ok(perturb_counts(plus, labels.len() as u64 - plus, budget, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let proportions: Vec<f64> = counts.iter().map(|c| c.released_proportion).collect();
    let degenerate = counts.iter().filter(|c| c.degenerate).count();
    let released = data
        .with_proportions(&proportions)?
        .without_labels()
        .with_metadata(keys::ETA, budget.eta_total())
        .with_metadata(keys::K, budget.k())
        .with_metadata(keys::SCALE, budget.scale())
        .with_metadata(keys::SEED, seed)
        .with_metadata(keys::DEGENERATE, degenerate);
    Ok((released, counts))
}

/// Trials split into fixed blocks with derived seeds.
const BLOCK: usize = 1024;

/// Exceedance of the released-proportion deviation over `trials`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    pub trials: usize,
    /// Trials with `|unclamped release - n₊/n| > θ` (degenerate releases count
    /// as exceeding).
    pub exceed: usize,
}

impl DeviationReport {
    pub fn rate(&self) -> f64 {
        self.exceed as f64 / self.trials as f64
    }
}

/// Simulates `X = |(n₊ + g₁)/(n + g₁ + g₂) - n₊/n|` for a set of `n`
/// instances with `round(proportion n)` positives and returns how often
/// `X > θ`.
pub fn deviation_check(
    n: u64,
    proportion: f64,
    budget: &PrivacyBudget,
    theta: f64,
    trials: usize,
    seed: u64,
) -> Result<DeviationReport> {
    if n == 0 || !(0.0..=1.0).contains(&proportion) || trials == 0 {
        return Err(PrivacyError::InvalidArgument(
            "deviation_check needs n >= 1, proportion in [0, 1] and trials >= 1".into(),
        ));
    }
    let n_plus = (proportion * n as f64).round() as u64;
    let truth = n_plus as f64 / n as f64;
    let scale = budget.scale();
    let exceed = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded(derive_seed(seed, b as u64));
            (0..BLOCK.min(trials - b * BLOCK))
                .filter(|_| {
                    let c = perturb_with(n_plus, n - n_plus, scale, &mut rng, seed);
                    c.degenerate || (c.unclamped_proportion - truth).abs() > theta
                })
                .count()
        })
        .sum();
    Ok(DeviationReport { trials, exceed })
}

/// Fraction of `k` independent sets whose deviation exceeds `θ`, against the
/// aggregate claim: if each set exceeds with probability at most `δ`, then
/// with probability at least `1 - exp(-2 k slack²)` no more than a
/// `δ + slack` fraction of the sets exceed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateDeviation {
    pub exceed_fraction: f64,
    pub allowed_fraction: f64,
    pub confidence: f64,
}

pub fn aggregate_deviation(
    counts: &[PerturbedCounts],
    theta: f64,
    delta: f64,
    slack: f64,
) -> AggregateDeviation {
    let k = counts.len();
    let exceed = counts
        .iter()
        .filter(|c| {
            let n = c.n_plus_true + c.n_minus_true;
            let truth = if n == 0 { 0.5 } else { c.n_plus_true as f64 / n as f64 };
            c.degenerate || (c.unclamped_proportion - truth).abs() > theta
        })
        .count();
    AggregateDeviation {
        exceed_fraction: if k == 0 { 0.0 } else { exceed as f64 / k as f64 },
        allowed_fraction: delta + slack,
        confidence: -(-2.0 * k as f64 * slack * slack).exp_m1(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        assert_eq!(laplace_inverse_cdf(0.5, 3.0), 0.0);
        assert_eq!(laplace_inverse_cdf(0.25, 2.0), 2.0 * 0.5f64.ln());
        assert_eq!(laplace_inverse_cdf(0.75, 2.0), -2.0 * 0.5f64.ln());
        assert!(laplace_sample(0.0, 1).is_err());
        assert!(laplace_sample(-1.0, 1).is_err());
    }

    #[test]
    fn budget_split() {
        let b = PrivacyBudget::new(1.0, 10).unwrap();
        assert_eq!(b.scale(), 10.0);
        assert_eq!(b.per_query_epsilon() * 10.0, 1.0);
        let one = PrivacyBudget::new(0.7, 1).unwrap();
        assert_eq!(one.per_query_epsilon(), 0.7);
        assert!(PrivacyBudget::new(0.0, 3).is_err());
        assert!(PrivacyBudget::new(1.0, 0).is_err());
    }

    #[test]
    fn empty_set_is_degenerate() {
        let b = PrivacyBudget::new(1e300, 1).unwrap();
        let c = perturb_counts(0, 0, &b, 4);
        assert!(c.degenerate);
        assert_eq!(c.released_proportion, 0.5);
    }

    #[test]
    fn no_noise_limit() {
        let b = PrivacyBudget::new(1e300, 1).unwrap();
        let c = perturb_counts(7, 3, &b, 11);
        assert!((c.n_plus_released - 7.0).abs() < 1e-250);
        assert_eq!(c.released_proportion, 0.7);
    }
}
