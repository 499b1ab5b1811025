use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("{name} = {value} is out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("target {target} is outside invertible region (threshold u = {u})")]
    OutsideInvertibleRegion { target: f64, u: f64 },
    #[error(transparent)]
    Baggen(#[from] llp_baggen::BaggenError),
    #[error(transparent)]
    Core(#[from] llp_core::CoreError),
}

pub type Result<T, E = TheoryError> = std::result::Result<T, E>;

pub(crate) fn check(name: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(TheoryError::OutOfRange {
            name,
            value,
            expected,
        })
    }
}

pub(crate) fn open_unit(name: &'static str, value: f64) -> Result<()> {
    check(name, value, value > 0.0 && value < 1.0, "in (0, 1)")
}
