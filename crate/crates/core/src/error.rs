use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("variable index {index} out of range for a pmf with {count} variables")]
    VariableOutOfRange { index: usize, count: usize },

    #[error("variable subsets overlap")]
    OverlappingSubsets,

    #[error("empty variable subset")]
    EmptySubset,

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("target entropy {target} outside [{lo}, 1]")]
    TargetOutOfRange { target: f64, lo: f64 },

    #[error("invalid auxiliary variable: {0}")]
    InvalidAuxiliary(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid demands: {0}")]
    InvalidDemands(String),

    #[error("Markov condition violated at sink {sink}: worst entry differs by {worst:.3e}")]
    MarkovViolation { sink: usize, worst: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("objective references variable {0} that is not in the region")]
    DimensionMismatch(String),

    #[error("problem too large: {0}")]
    SizeCap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
