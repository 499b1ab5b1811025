use llp_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaggenError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("pool instance {0} has no label")]
    Unlabeled(usize),
    #[error("empty instance pool")]
    EmptyPool,
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("pick probability {value} at {index} is outside (0, 1)")]
    InvalidPick { index: usize, value: f64 },
    #[error("infeasible purity: eta * r = {0} is not an integer in [0, r/2)")]
    InfeasiblePurity(f64),
    #[error("empty group map")]
    EmptyGroupMap,
    #[error("{what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = BaggenError> = std::result::Result<T, E>;
