//! Simulation checks of the bounds. Trials are split into fixed blocks, each
//! with its own seed derived from the caller's seed, so totals do not depend
//! on how many threads run them.

use llp_baggen::{
    gen_adversarial_pure_bags, gen_kappa_bags, gen_mixture_bags, keys, KappaConfig,
    MixtureComponent, MixtureConfig,
};
use llp_core::rng::{derive_seed, seeded};
use llp_core::{predict_proportion, Instance, Label, LinearHypothesis};
use rand::Rng as _;
use rayon::prelude::*;

use crate::bounds::{
    expected_bag_size_bound, kappa_misclassification_bound, mixture_purity_bound, purity_multi_bag,
    PurityQuery,
};
use crate::{Result, TheoryError};

const BLOCK: usize = 256;

/// Success count of a simulated guarantee against its claimed probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub trials: usize,
    pub successes: usize,
    /// Probability the bound claims for a success.
    pub claimed: f64,
}

impl MonteCarloReport {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the rate at the claimed probability.
    pub fn std_error(&self) -> f64 {
        (self.claimed * (1.0 - self.claimed) / self.trials as f64).sqrt()
    }

    /// `rate >= claimed - k * std_error`.
    pub fn holds_within(&self, k: f64) -> bool {
        self.rate() >= self.claimed - k * self.std_error()
    }
}

/// Runs `trials` independent trials in seeded blocks and counts successes.
fn count_blocks(trials: usize, seed: u64, trial: impl Fn(&mut llp_core::rng::Rng) -> Result<bool> + Sync) -> Result<usize> {
    let blocks = trials.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded(derive_seed(seed, b as u64));
            let n = BLOCK.min(trials - b * BLOCK);
            let mut hits = 0;
            for _ in 0..n {
                hits += trial(&mut rng)? as usize;
            }
            Ok(hits)
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(counts.iter().sum())
}

/// Correct and total members of one boundary bag: `(1 - η)`-pure, proportion
/// gap `⌊εr⌋ / r`, and exactly `r - 2ηr - ⌊εr⌋` members classified correctly.
fn boundary_bag(r: usize, eta: f64, epsilon: f64) -> Result<usize> {
    let (data, mut table) = gen_adversarial_pure_bags(r, eta, 1)?;
    let truth = data.bag_labels(0).expect("generated bags are labeled");
    let extra = (epsilon * r as f64 * (1.0 + 1e-12)).floor() as usize;
    // flip correct positive predictions; they sit at the end of the bag
    let mut flipped = 0;
    for j in (0..r).rev() {
        if flipped == extra {
            break;
        }
        if truth[j].is_positive() && table[0][j].is_positive() {
            table[0][j] = Label::Negative;
            flipped += 1;
        }
    }
    let correct = truth.iter().zip(&table[0]).filter(|(a, b)| a == b).count();
    let pos_true = truth.iter().filter(|y| y.is_positive()).count();
    let pos_pred = table[0].iter().filter(|y| y.is_positive()).count();
    let pure = pos_true.max(r - pos_true) as f64 >= (1.0 - eta) * r as f64 - 1e-9;
    let gap = (pos_true as f64 - pos_pred as f64).abs() / r as f64;
    if flipped != extra || !pure || gap > epsilon + 1e-12 {
        return Err(TheoryError::OutOfRange {
            name: "epsilon",
            value: epsilon,
            expected: "small enough that eta * r + eps * r correct positives remain",
        });
    }
    Ok(correct)
}

/// Each draw makes `n` bags. A bag meets the single-bag hypotheses with
/// probability `1 - δ - ρ` and is then a boundary bag with the fewest correct
/// members allowed; otherwise every member is misclassified. A draw succeeds
/// when the overall correct fraction reaches the multi-bag fraction.
pub fn verify_purity_multi_bag(q: &PurityQuery, draws: usize, seed: u64) -> Result<MonteCarloReport> {
    let g = purity_multi_bag(q)?;
    let r = q.r.round() as usize;
    let correct_good = boundary_bag(r, q.eta, q.epsilon)?;
    let p_good = 1.0 - q.delta - q.rho;
    let total = q.n_bags as f64 * r as f64;
    let successes = count_blocks(draws, seed, |rng| {
        let good = (0..q.n_bags).filter(|_| rng.random::<f64>() < p_good).count();
        Ok((good * correct_good) as f64 / total >= g.fraction)
    })?;
    Ok(MonteCarloReport {
        trials: draws,
        successes,
        claimed: g.confidence,
    })
}

/// Two-or-more component mixture with pools of `pool_size` instances whose
/// positive rates are `alphas` (rounded to the pool), equal priors. Counts
/// the bags that are `(1 - η)`-pure for the bound's `η`.
pub fn verify_mixture_purity(
    alphas: &[f64],
    pool_size: usize,
    r: usize,
    m: usize,
    c: f64,
    seed: u64,
) -> Result<MonteCarloReport> {
    let (eta, claimed) = mixture_purity_bound(r as u64, c, alphas)?;
    let components = alphas
        .iter()
        .map(|&a| {
            let pos = (a * pool_size as f64).round() as usize;
            let pool = (0..pool_size)
                .map(|i| {
                    let y = if i < pos { Label::Positive } else { Label::Negative };
                    Instance::dense(&[1.0], Some(y))
                })
                .collect();
            MixtureComponent {
                prior: 1.0 / alphas.len() as f64,
                pool,
            }
        })
        .collect();
    let data = gen_mixture_bags(&MixtureConfig {
        components,
        bag_size: r,
        bag_count: m,
        seed,
    })?;
    let successes = data
        .bags()
        .iter()
        .filter(|b| {
            let p = b.proportion();
            p.max(1.0 - p) >= 1.0 - eta - 1e-12
        })
        .count();
    Ok(MonteCarloReport {
        trials: m,
        successes,
        claimed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaTrendReport {
    pub trials: usize,
    /// Bags with `|Σκ_i (y_i - h_i)| > ε Σκ_i`.
    pub violations: usize,
    /// Pool instances `h` misclassifies.
    pub misclassified: usize,
    /// The `q n` scale of the misclassification bound.
    pub qn: f64,
    pub rejections: u64,
}

impl KappaTrendReport {
    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }
}

/// Draws `trials` κ-model bags (in seeded blocks of the pool) and measures how
/// often `h`'s predicted proportion misses the true one by more than `ε`.
pub fn kappa_trend_verifier(
    pool: &[Instance],
    config: &KappaConfig,
    h: &LinearHypothesis,
    epsilon: f64,
    trials: usize,
) -> Result<KappaTrendReport> {
    let bound = kappa_misclassification_bound(epsilon, &config.pick_probabilities)?;
    let misclassified = pool
        .iter()
        .filter(|x| x.label.is_some_and(|y| h.predict(&x.features) != y))
        .count();
    let blocks = trials.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let cfg = KappaConfig {
                bag_count: BLOCK.min(trials - b * BLOCK),
                seed: derive_seed(config.seed, b as u64),
                ..config.clone()
            };
            let data = gen_kappa_bags(pool, &cfg)?;
            let mut violations = 0;
            for k in 0..data.n_bags() {
                let pred = predict_proportion(h, &data, k)?;
                if (pred - data.bags()[k].proportion()).abs() > epsilon {
                    violations += 1;
                }
            }
            let rejections: u64 = data.metadata()[keys::KAPPA_REJECTIONS].parse().unwrap_or(0);
            Ok((violations, rejections))
        })
        .collect::<Result<Vec<(usize, u64)>>>()?;
    Ok(KappaTrendReport {
        trials,
        violations: parts.iter().map(|p| p.0).sum(),
        misclassified,
        qn: bound.q * pool.len() as f64,
        rejections: parts.iter().map(|p| p.1).sum(),
    })
}

/// Each draw builds `m` κ-model bags; a success is `r̂ > r̄ - t`, where `r̂`
/// is the expected size of a non-empty bag, `Σp_i / (1 - Π(1 - p_i))`.
pub fn verify_expected_bag_size(
    pick_probabilities: &[f64],
    m: usize,
    t: f64,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    let (_, claimed) = expected_bag_size_bound(0.0, m as u64, t)?;
    kappa_misclassification_bound(0.0, pick_probabilities)?;
    let sum: f64 = pick_probabilities.iter().sum();
    let empty: f64 = pick_probabilities.iter().map(|p| (1.0 - p).ln()).sum::<f64>().exp();
    let r_hat = sum / (1.0 - empty);
    let successes = count_blocks(draws, seed, |rng| {
        let mut total = 0usize;
        for _ in 0..m {
            let size = loop {
                let s = pick_probabilities.iter().filter(|&&p| rng.random::<f64>() < p).count();
                if s > 0 {
                    break s;
                }
            };
            total += size;
        }
        Ok(r_hat > total as f64 / m as f64 - t)
    })?;
    Ok(MonteCarloReport {
        trials: draws,
        successes,
        claimed,
    })
}
