use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("empty bag")]
    EmptyBag,
    #[error("dangling bag member: bag {bag} references instance {index} but the dataset has {len}")]
    DanglingMember { bag: usize, index: usize, len: usize },
    #[error("proportion out of range: {0}")]
    ProportionOutOfRange(f64),
    #[error("dataset has no bags")]
    NoBags,
    #[error("unlabeled instance at position {0}")]
    UnlabeledInstance(usize),
    #[error("invalid label value {0}; expected -1 or +1")]
    InvalidLabel(i64),
    #[error("feature indices must be strictly positive, got {0}")]
    ZeroFeatureIndex(u32),
    #[error("duplicate feature index {0}")]
    DuplicateFeature(u32),
    #[error("feature value for index {0} is not finite")]
    NonFiniteFeature(u32),
}
