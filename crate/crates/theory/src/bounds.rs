//! Closed-form sample-size and purity bounds.

use crate::error::{check, open_unit};
use crate::Result;

/// Bags needed for the bag-error generalization gap to be at most `epsilon`
/// with probability `1 - delta`, before rounding up:
/// `(64/ε²)(2 vc ln(12 r/ε) + ln(4/δ))`.
pub fn bag_sample_complexity_real(vc: u32, r: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check("vc", vc as f64, vc >= 1, ">= 1")?;
    check("r", r, r >= 1.0 && r.is_finite(), ">= 1")?;
    open_unit("epsilon", epsilon)?;
    open_unit("delta", delta)?;
    let vc = vc as f64;
    Ok(64.0 / (epsilon * epsilon) * (2.0 * vc * (12.0 * r / epsilon).ln() + (4.0 / delta).ln()))
}

/// Smallest integer bag count satisfying [`bag_sample_complexity_real`].
/// `r` may be an average bag size.
pub fn bag_sample_complexity(vc: u32, r: f64, epsilon: f64, delta: f64) -> Result<u64> {
    Ok(bag_sample_complexity_real(vc, r, epsilon, delta)?.ceil() as u64)
}

/// A guarantee `(fraction, confidence)`; `vacuous` is set when either part
/// is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guarantee {
    pub fraction: f64,
    pub confidence: f64,
    pub vacuous: bool,
}

impl Guarantee {
    fn new(fraction: f64, confidence: f64) -> Self {
        Self {
            fraction,
            confidence,
            vacuous: fraction <= 0.0 || confidence <= 0.0,
        }
    }
}

fn unit(name: &'static str, value: f64) -> Result<()> {
    check(name, value, (0.0..=1.0).contains(&value), "in [0, 1]")
}

/// Single bag: with probability `1 - δ - ρ` at least a `1 - 2η - ε`
/// fraction of its members is classified correctly.
pub fn purity_per_bag(epsilon: f64, delta: f64, eta: f64, rho: f64) -> Result<Guarantee> {
    for (name, v) in [("epsilon", epsilon), ("delta", delta), ("eta", eta), ("rho", rho)] {
        unit(name, v)?;
    }
    Ok(Guarantee::new(1.0 - 2.0 * eta - epsilon, 1.0 - delta - rho))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityQuery {
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub rho: f64,
    pub tau: f64,
    pub n_bags: u64,
    /// Fixed or expected bag size.
    pub r: f64,
}

/// `n` bags together: with probability
/// `1 - exp(-(τ²/2) n r (1-δ-ρ)(1-2η-ε))` at least a
/// `(1-τ)(1-δ-ρ)(1-2η-ε)` fraction of all `n r` instances is correct.
pub fn purity_multi_bag(q: &PurityQuery) -> Result<Guarantee> {
    let single = purity_per_bag(q.epsilon, q.delta, q.eta, q.rho)?;
    unit("tau", q.tau)?;
    check("r", q.r, q.r > 0.0 && q.r.is_finite(), "> 0")?;
    let base = single.fraction * single.confidence;
    if single.vacuous {
        return Ok(Guarantee {
            fraction: (1.0 - q.tau) * base,
            confidence: 0.0,
            vacuous: true,
        });
    }
    let exponent = q.tau * q.tau / 2.0 * q.n_bags as f64 * q.r * base;
    Ok(Guarantee::new((1.0 - q.tau) * base, -(-exponent).exp_m1()))
}

/// Purity of bags from a mixture whose components have positive rates
/// `alphas`: bags are `(1 - η)`-pure with `η = max_i min(α_i, 1 - α_i) + c`
/// with probability at least `1 - exp(-2 r c²)`.
pub fn mixture_purity_bound(r: u64, c: f64, alphas: &[f64]) -> Result<(f64, f64)> {
    check("c", c, c >= 0.0 && c.is_finite(), ">= 0")?;
    for &a in alphas {
        unit("alpha", a)?;
    }
    let eta = alphas.iter().map(|&a| a.min(1.0 - a)).fold(0.0, f64::max) + c;
    Ok((eta, -(-2.0 * r as f64 * c * c).exp_m1()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaBound {
    /// `q = ε² (Σ p_i)² / (n min_i p_i (1 - p_i))`; misclassifications are
    /// `O(q n)`.
    pub q: f64,
    /// Expected bag size `Σ p_i`.
    pub r_hat: f64,
    /// `ε² r̂ n` when all `p_i` are equal (the `O(·)` argument of the uniform
    /// case), `None` otherwise.
    pub uniform_scale: Option<f64>,
}

pub fn kappa_misclassification_bound(epsilon: f64, pick_probabilities: &[f64]) -> Result<KappaBound> {
    check("epsilon", epsilon, epsilon >= 0.0 && epsilon.is_finite(), ">= 0")?;
    check(
        "n",
        pick_probabilities.len() as f64,
        !pick_probabilities.is_empty(),
        ">= 1",
    )?;
    let mut min_var = f64::INFINITY;
    for &p in pick_probabilities {
        open_unit("p_i", p)?;
        min_var = min_var.min(p * (1.0 - p));
    }
    let n = pick_probabilities.len() as f64;
    let r_hat: f64 = pick_probabilities.iter().sum();
    let uniform = pick_probabilities.iter().all(|&p| p == pick_probabilities[0]);
    Ok(KappaBound {
        q: epsilon * epsilon * r_hat * r_hat / (n * min_var),
        r_hat,
        uniform_scale: uniform.then(|| epsilon * epsilon * r_hat * n),
    })
}

/// Bag size `r` for which a sample proportion is within `ε` of the population
/// proportion with probability `1 - δ`: `ceil(ln(2/δ) / (2ε²))`.
pub fn population_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    open_unit("epsilon", epsilon)?;
    open_unit("delta", delta)?;
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// `(r̄ - t, 1 - exp(-2 m t²))`: the expected bag size exceeds the training
/// average minus `t` with the given confidence.
pub fn expected_bag_size_bound(avg_size: f64, m: u64, t: f64) -> Result<(f64, f64)> {
    check("t", t, t > 0.0 && t.is_finite(), "> 0")?;
    check("m", m as f64, m >= 1, ">= 1")?;
    Ok((avg_size - t, -(-2.0 * m as f64 * t * t).exp_m1()))
}

/// `ε'' = er_D / δ`, so that the bag proportion gap is at most `ε''` with
/// probability `1 - δ` (Markov).
pub fn markov_epsilon_conversion(er_d: f64, delta: f64) -> Result<f64> {
    check("er_D", er_d, er_d >= 0.0 && er_d.is_finite(), ">= 0")?;
    open_unit("delta", delta)?;
    Ok(er_d / delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_complexity_reference_value() {
        let m = bag_sample_complexity(10, 50.0, 0.1, 0.05).unwrap();
        // 6400 * (20 ln 6000 + ln 80)
        let expect = 6400.0 * (20.0 * 6000f64.ln() + 80f64.ln());
        assert_eq!(m, expect.ceil() as u64);
        assert!((m as f64 - 1_141_600.0).abs() < 1000.0);
        assert!(bag_sample_complexity(0, 1.0, 0.1, 0.1).is_err());
        assert!(bag_sample_complexity(1, 0.5, 0.1, 0.1).is_err());
        assert!(bag_sample_complexity(1, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn purity_examples() {
        let g = purity_per_bag(0.1, 0.05, 0.1, 0.05).unwrap();
        assert!((g.fraction - 0.7).abs() < 1e-12 && (g.confidence - 0.9).abs() < 1e-12);
        assert!(!g.vacuous);
        assert_eq!(purity_per_bag(0.0, 0.0, 0.0, 0.0).unwrap(), Guarantee::new(1.0, 1.0));
        assert!(purity_per_bag(0.0, 0.0, 0.5, 0.0).unwrap().vacuous);
    }

    #[test]
    fn multi_bag_examples() {
        let q = PurityQuery {
            epsilon: 0.1,
            delta: 0.05,
            eta: 0.1,
            rho: 0.05,
            tau: 0.1,
            n_bags: 1000,
            r: 10.0,
        };
        let g = purity_multi_bag(&q).unwrap();
        assert!((g.fraction - 0.9 * 0.9 * 0.7).abs() < 1e-12);
        assert!((g.confidence - (1.0 - (-31.5f64).exp())).abs() < 1e-15);
        let g = purity_multi_bag(&PurityQuery { tau: 0.0, ..q }).unwrap();
        assert!((g.fraction - 0.63).abs() < 1e-12);
        assert_eq!(g.confidence, 0.0);
        assert!(g.vacuous);
        assert!(purity_multi_bag(&PurityQuery { eta: 0.5, ..q }).unwrap().vacuous);
    }

    #[test]
    fn mixture_examples() {
        let (eta, p) = mixture_purity_bound(100, 0.1, &[0.1, 0.9]).unwrap();
        assert!((eta - 0.2).abs() < 1e-12);
        assert!((p - (1.0 - (-2f64).exp())).abs() < 1e-12);
        assert!((p - 0.8647).abs() < 1e-4);
        assert_eq!(mixture_purity_bound(100, 0.0, &[0.0, 1.0]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn kappa_examples() {
        let b = kappa_misclassification_bound(0.1, &[0.01; 1000]).unwrap();
        assert!((b.q - 0.01 * 100.0 / (1000.0 * 0.0099)).abs() < 1e-12);
        assert!((b.q - 0.10101).abs() < 1e-5);
        assert_eq!(kappa_misclassification_bound(0.0, &[0.3, 0.4]).unwrap().q, 0.0);
        assert_eq!(kappa_misclassification_bound(0.0, &[0.3, 0.4]).unwrap().uniform_scale, None);
        assert!(kappa_misclassification_bound(0.1, &[0.0]).is_err());
    }

    #[test]
    fn kappa_uniform_constant() {
        // p = r̂/n gives q n = ε² r̂ n / (1 - r̂/n)
        for (n, r_hat, eps) in [(1000usize, 20.0, 0.1), (50, 5.0, 0.3), (400, 1.0, 0.05)] {
            let p = vec![r_hat / n as f64; n];
            let b = kappa_misclassification_bound(eps, &p).unwrap();
            let scale = b.uniform_scale.unwrap();
            let ratio = b.q * n as f64 / scale;
            assert!((ratio - 1.0 / (1.0 - r_hat / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn population_examples() {
        assert_eq!(population_sample_size(0.05, 0.05).unwrap(), 738);
        assert!(population_sample_size(0.05, 2.0).is_err());
        // halving ε quadruples the unrounded size
        let raw = |e: f64| (2.0 / 0.1f64).ln() / (2.0 * e * e);
        assert_eq!(raw(0.05) * 4.0, raw(0.025));
    }

    #[test]
    fn expected_size_and_markov() {
        let (lb, conf) = expected_bag_size_bound(12.0, 1000, 0.5).unwrap();
        assert_eq!(lb, 11.5);
        assert_eq!(conf, 1.0);
        assert!(expected_bag_size_bound(12.0, 1000, 1e-9).unwrap().1 < 1e-5);
        assert!((markov_epsilon_conversion(0.01, 0.1).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(markov_epsilon_conversion(0.0, 0.3).unwrap(), 0.0);
        assert!((markov_epsilon_conversion(0.02, 1.0 - 1e-12).unwrap() - 0.02).abs() < 1e-12);
    }
}
