//! Data ingestion, experiment orchestration and result files for the `llp`
//! command-line tool.

pub mod adult;
pub mod config;
pub mod data;
mod error;
pub mod experiments;
pub mod groups;
pub mod output;
pub mod split;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiments::{
    run_bound_sweep, run_experiment, run_group_table, run_learning_curve, run_privacy_sweep, Census,
};
pub use output::{PrivacyRow, ResultRow, Stat};
