//! Probability that a hypothesis with instance error `β` predicts a bag
//! proportion within `ε` of the truth, for iid members and a hypothesis whose
//! positive rate equals the class prior.
//!
//! Under the matched prior each member is independently a false positive or
//! a false negative with probability `β/2` each. With `K = ⌊εr⌋`,
//!
//! ```text
//! P(r, β, ε) = θ₁^r Σ_{i=0}^{r} C(r,i) θ₂^i [F(i+K; r-i, θ₂) - F(i-K-1; r-i, θ₂)]
//! θ₁ = (2-β)/2,  θ₂ = β/(2-β)
//! ```
//!
//! where `F(k; n, θ)` is the binomial CDF.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::check;
use crate::{Result, TheoryError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchProbQuery {
    pub r: u32,
    pub beta: f64,
    pub epsilon: f64,
}

impl MatchProbQuery {
    pub fn new(r: u32, beta: f64, epsilon: f64) -> Result<Self> {
        check("r", r as f64, r >= 1, ">= 1")?;
        check("beta", beta, (0.0..=1.0).contains(&beta), "in [0, 1]")?;
        check("epsilon", epsilon, (0.0..=1.0).contains(&epsilon), "in [0, 1]")?;
        Ok(Self { r, beta, epsilon })
    }

    pub fn theta1(&self) -> f64 {
        (2.0 - self.beta) / 2.0
    }

    pub fn theta2(&self) -> f64 {
        self.beta / (2.0 - self.beta)
    }

    /// Largest tolerated gap in counts, `⌊εr⌋`. The product is nudged by a
    /// relative 1e-12 so that e.g. `0.1 * 50` floors to 5.
    pub fn slack(&self) -> u32 {
        ((self.epsilon * self.r as f64) * (1.0 + 1e-12)).floor() as u32
    }
}

/// Binomial CDF `P(X <= k)` for `X ~ Bin(n, p)` through the regularized
/// incomplete beta function. `F(k; 0, ·) = 1` for `k >= 0`; `F = 0` for
/// `k < 0`.
pub fn binomial_cdf(k: i64, n: u32, p: f64) -> f64 {
    if k < 0 {
        0.0
    } else if k >= n as i64 || p <= 0.0 {
        1.0
    } else if p >= 1.0 {
        0.0
    } else {
        let k = k as f64;
        beta_reg(n as f64 - k, k + 1.0, 1.0 - p)
    }
}

fn ln_choose(n: u32, k: u32) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn binom_match_prob(q: &MatchProbQuery) -> f64 {
    let (r, beta) = (q.r, q.beta);
    if beta == 0.0 {
        return 1.0;
    }
    let k = q.slack() as i64;
    if k >= r as i64 {
        return 1.0;
    }
    if r == 1 {
        // the lone member must be right; the sum below only rounds to this
        return 1.0 - beta;
    }
    let (t1, t2) = (q.theta1(), q.theta2());
    let (ln_t1, ln_t2) = (t1.ln(), t2.ln());
    let mut total = 0.0;
    for i in 0..=r {
        let rest = r - i;
        let ii = i as i64;
        let bracket = binomial_cdf(ii + k, rest, t2) - binomial_cdf(ii - k - 1, rest, t2);
        if bracket <= 0.0 {
            continue;
        }
        let ln_w = ln_choose(r, i) + r as f64 * ln_t1 + i as f64 * ln_t2;
        total += ln_w.exp() * bracket;
    }
    total.clamp(0.0, 1.0)
}

/// Number of grid points used by [`u_threshold`].
pub const U_GRID: usize = 10_000;

/// Where `P(β)` stops decreasing, as `(β*, P(β*))`.
///
/// `P` is scanned on `β_j = j / U_GRID`; the first `j` where `P(β_{j+1})`
/// rises above `P(β_j)` by more than rounding noise brackets the point where
/// the slope changes sign, which is then located by bisection on a central
/// finite difference. If `P` decreases over the whole grid the breakpoint is
/// `β = 1`.
pub fn monotone_breakpoint(r: u32, epsilon: f64) -> Result<(f64, f64)> {
    let p = |beta: f64| binom_match_prob(&MatchProbQuery { r, beta, epsilon });
    MatchProbQuery::new(r, 0.0, epsilon)?;
    check("epsilon", epsilon, epsilon < 1.0, "in [0, 1)")?;
    let step = 1.0 / U_GRID as f64;
    let mut prev = p(0.0);
    for j in 1..=U_GRID {
        let beta = j as f64 * step;
        let cur = p(beta);
        // near β = 0 the curve is flat to machine precision
        if cur > prev + 4.0 * f64::EPSILON {
            // the minimum lies in [β_{j-2}, β_j]
            let (mut lo, mut hi) = (((j as f64) - 2.0).max(0.0) * step, beta);
            let h = 1e-7;
            let slope = |b: f64| p((b + h).min(1.0)) - p((b - h).max(0.0));
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let beta_star = 0.5 * (lo + hi);
            return Ok((beta_star, p(beta_star)));
        }
        prev = cur;
    }
    Ok((1.0, prev))
}

/// `u(r, ε)`: above this match probability, `P(β)` can be inverted for `β`.
pub fn u_threshold(r: u32, epsilon: f64) -> Result<f64> {
    Ok(monotone_breakpoint(r, epsilon)?.1)
}

/// The `β` on the decreasing branch with `P(r, β, ε) = target`, to 1e-10.
pub fn invert_match_prob(r: u32, epsilon: f64, target: f64) -> Result<f64> {
    let (beta_star, u) = monotone_breakpoint(r, epsilon)?;
    if !(target > u && target <= 1.0) {
        return Err(TheoryError::OutsideInvertibleRegion { target, u });
    }
    let p = |beta: f64| binom_match_prob(&MatchProbQuery { r, beta, epsilon });
    let (mut lo, mut hi) = (0.0, beta_star);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if target == 1.0 { 0.0 } else { 0.5 * (lo + hi) })
}
