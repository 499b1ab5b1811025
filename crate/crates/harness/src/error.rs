use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}: no instances")]
    NoInstances(PathBuf),
    #[error("unknown grouping attribute {name:?}; available: {}", available.join(", "))]
    UnknownAttribute { name: String, available: Vec<String> },
    #[error("instance {index} matches no group of {attribute:?}")]
    Ungrouped { attribute: String, index: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("split audit failed: {0}")]
    Audit(String),
    #[error("{0}")]
    Experiment(String),
    #[error(transparent)]
    Core(#[from] llp_core::CoreError),
    #[error(transparent)]
    Baggen(#[from] llp_baggen::BaggenError),
    #[error(transparent)]
    Solver(#[from] llp_solvers::SolverError),
    #[error(transparent)]
    Theory(#[from] llp_theory::TheoryError),
    #[error(transparent)]
    Privacy(#[from] llp_privacy::PrivacyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for data problems, 3 for numerical failures,
    /// 1 for everything caused by the invocation itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. }
            | Self::Parse { .. }
            | Self::NoInstances(_)
            | Self::Ungrouped { .. }
            | Self::Csv(_)
            | Self::Json(_)
            | Self::Core(_)
            | Self::Baggen(_)
            | Self::Privacy(_)
            | Self::Experiment(_) => 2,
            Self::Solver(_) | Self::Theory(_) | Self::Audit(_) => 3,
            Self::UnknownAttribute { .. } | Self::Config(_) => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
