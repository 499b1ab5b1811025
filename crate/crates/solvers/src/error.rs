use llp_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("degenerate proportions for mean-map: all bags share proportion {0}")]
    DegenerateProportions(f64),
    #[error("mean-map needs at least two bags, got {0}")]
    TooFewBags(usize),
    #[error("dataset has no bags")]
    NoBags,
    #[error("cross-validation needs at least {folds} bags, got {bags}")]
    TooFewBagsForFolds { bags: usize, folds: usize },
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
