//! Experiment configuration: TOML (`key = value` lines grouped into
//! `[sections]`). Every key has a default, so an empty file is valid.
//!
//! ```toml
//! experiment = "group-table"
//! dataset_path = "data/adult.svm"
//! seed = 1
//!
//! [solver]
//! restarts = 2
//!
//! [learning_curve]
//! bag_sizes = [10, 100, 500]
//! ```

use std::path::{Path, PathBuf};

use llp_solvers::{TrainConfig, C_GRID, C_P_GRID};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LearningCurve,
    GroupTable,
    BoundSweep,
    PrivacySweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LearningCurve => "learning-curve",
            Self::GroupTable => "group-table",
            Self::BoundSweep => "bound-sweep",
            Self::PrivacySweep => "privacy-sweep",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::LearningCurve, Self::GroupTable, Self::BoundSweep, Self::PrivacySweep]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

/// Bag generator of a learning-curve series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveGenerator {
    /// Members drawn with replacement from the whole training split.
    Iid,
    /// A group of `mixture_attribute` is picked uniformly per bag, then
    /// members are drawn with replacement from that group.
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningCurveConfig {
    pub generators: Vec<CurveGenerator>,
    pub mixture_attribute: String,
    /// Total training instances per point; the bag count is `budget / r`.
    pub budgets: Vec<usize>,
    pub bag_sizes: Vec<usize>,
    /// Budget whose bags tune `(C, C_p)` for a whole (generator, bag size)
    /// series.
    pub tuning_budget: usize,
}

impl Default for LearningCurveConfig {
    fn default() -> Self {
        Self {
            generators: vec![CurveGenerator::Iid, CurveGenerator::Mixture],
            mixture_attribute: "occupation".into(),
            budgets: log_spaced(500.0, 50_000.0, 7),
            bag_sizes: vec![10, 100, 500],
            tuning_budget: 5000,
        }
    }
}

/// `n` points equally spaced in log scale, rounded to integers.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![lo.round() as usize];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp().round() as usize)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupTableConfig {
    pub attributes: Vec<String>,
}

/// The groupings of the census table, in display order.
pub const TABLE_ATTRIBUTES: [&str; 5] =
    ["native-country", "education", "occupation", "relationship", "race"];

impl Default for GroupTableConfig {
    fn default() -> Self {
        Self {
            attributes: TABLE_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSweepConfig {
    /// Bag sizes of the two fixed-epsilon panels.
    pub panel_r: Vec<u32>,
    /// Epsilons of the fixed-size panel.
    pub panel_epsilons: Vec<f64>,
    pub panel_fixed_r: u32,
    /// Number of beta steps on [0, 1].
    pub beta_steps: usize,
    pub threshold_r: Vec<u32>,
    pub threshold_epsilons: Vec<f64>,
}

impl Default for BoundSweepConfig {
    fn default() -> Self {
        Self {
            panel_r: vec![1, 5, 10, 50],
            panel_epsilons: vec![0.0, 0.05, 0.1, 0.2],
            panel_fixed_r: 50,
            beta_steps: 200,
            threshold_r: vec![1, 2, 5, 10, 20, 50],
            threshold_epsilons: vec![0.0, 0.05, 0.1, 0.15, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivacySweepConfig {
    pub etas: Vec<f64>,
    /// Per-bag deviation threshold on the released proportion.
    pub theta: f64,
}

impl Default for PrivacySweepConfig {
    fn default() -> Self {
        Self {
            etas: vec![0.1, 1.0, 10.0, 1e6],
            theta: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dataset_path: PathBuf,
    pub groups_path: PathBuf,
    /// Grouping of the privacy sweep; restricts the group table to one
    /// attribute when set.
    pub grouping_attribute: Option<String>,
    pub split_fraction: f64,
    pub runs: usize,
    /// Redraw the train/test split in every run instead of only varying the
    /// solver seed.
    pub vary_split: bool,
    pub seed: u64,
    pub folds: usize,
    pub c_grid: Vec<f64>,
    pub c_p_grid: Vec<f64>,
    pub output_dir: PathBuf,
    pub solver: TrainConfig,
    pub learning_curve: LearningCurveConfig,
    pub group_table: GroupTableConfig,
    pub bound_sweep: BoundSweepConfig,
    pub privacy: PrivacySweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::GroupTable,
            dataset_path: "data/adult.svm".into(),
            groups_path: "data/adult.groups".into(),
            grouping_attribute: None,
            split_fraction: 0.8,
            runs: 5,
            vary_split: false,
            seed: 1,
            folds: 5,
            c_grid: C_GRID.to_vec(),
            c_p_grid: C_P_GRID.to_vec(),
            output_dir: "results".into(),
            solver: TrainConfig {
                restarts: 2,
                ..TrainConfig::default()
            },
            learning_curve: LearningCurveConfig::default(),
            group_table: GroupTableConfig::default(),
            bound_sweep: BoundSweepConfig::default(),
            privacy: PrivacySweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key = value` overrides (dotted keys reach into sections), as
    /// given by repeated `--set` flags.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(self).map_err(|e| HarnessError::Config(e.to_string()))?;
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("override {item:?} is not key=value")))?;
            let value = parse_value(raw.trim());
            let path: Vec<&str> = key.trim().split('.').collect();
            let (last, sections) = path.split_last().expect("split yields one item");
            let mut node = &mut table;
            for s in sections {
                node = node
                    .entry(s.to_string())
                    .or_insert_with(|| toml::Value::Table(Default::default()))
                    .as_table_mut()
                    .ok_or_else(|| HarnessError::Config(format!("{s:?} is not a section")))?;
            }
            node.insert(last.to_string(), value);
        }
        let text = toml::to_string(&table).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction {} is not in (0, 1)", self.split_fraction));
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed {} exceeds {}", self.seed, i64::MAX));
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if self.c_grid.is_empty() || self.c_p_grid.is_empty() {
            return bad("parameter grids must be non-empty".into());
        }
        if self.learning_curve.bag_sizes.contains(&0) {
            return bad("bag sizes must be positive".into());
        }
        Ok(())
    }

    /// Canonical TOML rendering, recorded in the manifest.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// SHA-256 of the canonical text with `output_dir` cleared, so the same
    /// experiment written to two places has one hash.
    pub fn hash(&self) -> String {
        let located = Self { output_dir: PathBuf::new(), ..self.clone() };
        let digest = Sha256::digest(located.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_and_overrides() {
        let c = ExperimentConfig::parse(
            "experiment = \"learning-curve\"\nruns = 2\n[solver]\nc = 10.0\n[learning_curve]\nbag_sizes = [10]\n",
        )
        .unwrap();
        assert_eq!(c.experiment, ExperimentKind::LearningCurve);
        assert_eq!(c.solver.c, 10.0);
        assert_eq!(c.solver.max_outer_iters, 50);
        assert_eq!(c.learning_curve.bag_sizes, vec![10]);
        let o = c
            .with_overrides(&["runs=3".into(), "solver.c = 0.1".into(), "grouping_attribute=race".into()])
            .unwrap();
        assert_eq!((o.runs, o.solver.c), (3, 0.1));
        assert_eq!(o.grouping_attribute.as_deref(), Some("race"));
        assert_ne!(o.hash(), c.hash());
        assert_eq!(c.hash(), ExperimentConfig::parse(&c.canonical()).unwrap().hash());
        let moved = ExperimentConfig { output_dir: "elsewhere".into(), ..c.clone() };
        assert_eq!(moved.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("runs = 0").is_err());
        assert!(ExperimentConfig::parse("split_fraction = 1.0").is_err());
        assert!(ExperimentConfig::parse("colour = 1").is_err());
        assert!(ExperimentConfig::parse("[solver]\nbogus = 1").is_err());
    }

    #[test]
    fn seven_log_spaced_budgets() {
        assert_eq!(log_spaced(500.0, 50_000.0, 7), vec![500, 1077, 2321, 5000, 10772, 23208, 50000]);
    }
}
