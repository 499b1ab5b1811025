//! Bounds relating bag-proportion error to sample size and instance error,
//! with Monte-Carlo checks that simulate the assumptions behind them.

mod bounds;
mod error;
mod matching;
mod montecarlo;

pub use bounds::{
    bag_sample_complexity, bag_sample_complexity_real, expected_bag_size_bound,
    kappa_misclassification_bound, markov_epsilon_conversion, mixture_purity_bound,
    population_sample_size, purity_multi_bag, purity_per_bag, Guarantee, KappaBound, PurityQuery,
};
pub use error::{Result, TheoryError};
pub use matching::{
    binom_match_prob, binomial_cdf, invert_match_prob, monotone_breakpoint, u_threshold,
    MatchProbQuery, U_GRID,
};
pub use montecarlo::{
    kappa_trend_verifier, verify_expected_bag_size, verify_mixture_purity, verify_purity_multi_bag,
    KappaTrendReport, MonteCarloReport,
};
