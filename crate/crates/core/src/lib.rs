//! Shared vocabulary for learning from label proportions (LLP).
//!
//! A learner in this setting never sees instance labels. It sees *bags* of
//! instances together with the fraction of positive labels inside each bag,
//! and has to pick an instance-level hypothesis whose predicted bag
//! proportions match the observed ones. This crate holds the types every other
//! crate in the workspace speaks ([`Instance`], [`Bag`], [`BagDataset`],
//! [`LinearHypothesis`]) and the handful of pure functions built on them:
//! the proportion of a label vector, the proportion predicted by a
//! hypothesis on a bag, the proportion losses, and the two error functionals
//! (bag-level and instance-level).

mod error;
mod hypothesis;
mod ops;
pub mod rng;
mod sparse;
mod types;

pub use error::CoreError;
pub use hypothesis::LinearHypothesis;
pub use ops::{
    empirical_bag_error, instance_error, predict_proportion, proportion, proportion_loss,
    PROPORTION_TOLERANCE,
};
pub use sparse::SparseVector;
pub use types::{Bag, BagDataset, Instance, Label, LossKind};

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
