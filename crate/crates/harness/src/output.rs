//! Result rows, CSV files and the run manifest.
//!
//! Column order of every CSV is the field order of its row type. Rows are
//! written in a fixed order, so reruns give identical bytes except in the
//! `wall_time` column.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    Run,
    Mean,
    /// Sample standard deviation over the runs (zero for a single run).
    Std,
}

/// One trained model of the learning-curve or group-table experiments, or a
/// summary over the runs of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub generator: String,
    /// Training instances drawn into bags.
    pub budget: usize,
    pub bag_count: usize,
    /// Mean number of members per bag.
    pub bag_size: f64,
    pub stat: Stat,
    pub run: Option<usize>,
    pub c: f64,
    pub c_p: f64,
    pub train_bag_error: f64,
    pub test_error: f64,
    pub baseline_error: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyRow {
    pub attribute: String,
    pub eta: f64,
    pub bag_count: usize,
    pub stat: Stat,
    pub run: Option<usize>,
    pub test_error: f64,
    pub non_private_error: f64,
    /// Private minus non-private test error.
    pub utility_loss: f64,
    /// Share of bags whose released proportion misses the truth by more
    /// than `theta`.
    pub exceed_fraction: f64,
    pub theta: f64,
    pub degenerate_bags: f64,
    pub wall_time: f64,
}

/// A point of a match-probability curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub panel: String,
    pub r: u32,
    pub epsilon: f64,
    pub beta: f64,
    pub match_prob: f64,
    /// `beta` lies on the decreasing branch and is 0 or has `match_prob`
    /// below 1, so it can be recovered from `match_prob`.
    pub invertible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub r: u32,
    pub epsilon: f64,
    pub beta_star: f64,
    pub u: f64,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Appends mean and std rows computed from `runs`, which share every field
/// but the per-run measurements.
pub(crate) fn summarize(runs: &[ResultRow]) -> [ResultRow; 2] {
    let col = |f: fn(&ResultRow) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
    let cols = [
        col(|r| r.train_bag_error),
        col(|r| r.test_error),
        col(|r| r.baseline_error),
        col(|r| r.wall_time),
    ];
    let make = |stat: Stat, pick: fn((f64, f64)) -> f64| ResultRow {
        stat,
        run: None,
        train_bag_error: pick(cols[0]),
        test_error: pick(cols[1]),
        baseline_error: pick(cols[2]),
        wall_time: pick(cols[3]),
        ..runs[0].clone()
    };
    [make(Stat::Mean, |p| p.0), make(Stat::Std, |p| p.1)]
}

pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    /// SHA-256 of the canonical configuration text.
    pub config_hash: String,
    pub config: String,
    pub harness_version: String,
    pub rng: String,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, outputs: Vec<PathBuf>) -> Self {
        Self {
            experiment: config.experiment.name().into(),
            seed: config.seed,
            config_hash: config.hash(),
            config: config.canonical(),
            harness_version: env!("CARGO_PKG_VERSION").into(),
            rng: llp_core::rng::RNG_ALGORITHM.into(),
            outputs,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }
}
