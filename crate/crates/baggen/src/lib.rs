//! Bag generators for learning from label proportions.
//!
//! Every generator is a pure function of its inputs and seed. Bags reference
//! instances by index, so sampling with replacement produces repeated
//! members rather than copies.

mod error;
mod generators;
mod sampling;

pub use error::{BaggenError, Result};
pub use generators::{
    adversarial_hypothesis, gen_adversarial_pure_bags, gen_group_bags, gen_iid_bags,
    gen_iid_bags_with, gen_kappa_bags, gen_mixture_bags, gen_population_bags, keys,
    metadata_list, KappaConfig, MixtureComponent, MixtureConfig,
};
pub use sampling::Sampling;
