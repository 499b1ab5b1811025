//! Solvers that turn a [`BagDataset`](llp_core::BagDataset) into a
//! [`LinearHypothesis`](llp_core::LinearHypothesis) using bag proportions
//! only.
//!
//! * [`train_alter_psvm`]: alternating proportion-SVM with latent labels.
//! * [`train_mean_map`]: class means from bag means (also an initializer).
//! * [`train_inv_cal`]: regression of bag means on soft labels (also an
//!   initializer).
//! * [`train_baseline`]: per-group majority rule used as a reference.
//! * [`cross_validate`]: bag-level k-fold selection of `(C, C_p)`.

mod alter;
mod baseline;
mod config;
mod cv;
mod error;
mod inv_cal;
mod mean_map;
mod result;
pub mod svm;
mod util;

pub use alter::{relabel_bag, train_alter_psvm, train_alter_psvm_from};
pub use baseline::{train_baseline, BaselinePredictor, Fallback};
pub use config::{InitKind, InnerSolver, SolverKind, TrainConfig, C_GRID, C_P_GRID};
pub use cv::{cross_validate, fold_assignment, grid, CvOutcome, CvScore};
pub use error::SolverError;
pub use inv_cal::{inv_cal_hypothesis, train_inv_cal, train_inv_cal_weighted};
pub use mean_map::{estimate_class_means, mean_map_hypothesis, train_mean_map};
pub use result::TrainResult;
pub use svm::train_linear_svm;

use llp_core::BagDataset;

/// Dispatches on `config.solver`. The baseline has its own entry point
/// ([`train_baseline`]) because it predicts per group, not per instance.
pub fn train(data: &BagDataset, config: &TrainConfig) -> Result<TrainResult, SolverError> {
    match config.solver {
        SolverKind::AlterPsvm => train_alter_psvm(data, config),
        SolverKind::MeanMap => train_mean_map(data, config),
        SolverKind::InvCal => train_inv_cal(data, config),
        SolverKind::Baseline => Err(SolverError::InvalidConfig(
            "the baseline is trained with train_baseline".into(),
        )),
    }
}
