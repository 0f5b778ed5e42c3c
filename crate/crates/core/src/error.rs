use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (torus dimension must be 1..=3)")]
    UnsupportedDimension(usize),

    #[error("restricted linear map is singular (smallest singular value {0:e})")]
    SingularRestriction(f64),

    #[error("degenerate splitting: subspaces intersect (angle {0:e})")]
    DegenerateSplitting(f64),

    #[error("rank-deficient basis for a {0}-dimensional subspace")]
    RankDeficient(usize),

    #[error("inverse map unavailable for system {0}")]
    InverseUnavailable(String),

    #[error("system {0} has no reference splitting")]
    UnsupportedSystem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Newton iteration diverged at step {iterations} (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },

    #[error("no observed transition from cover element {from} into cover element {to}")]
    UnresolvedTransition { from: usize, to: usize },

    #[error("point is not covered by any cover element")]
    Uncovered,

    #[error("passing set is not of the form [0,a] U [b,1): {0}")]
    NonIntervalPassingSet(String),

    #[error("forward-transported splitting lost precision after {steps} steps")]
    PrecisionLoss { steps: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("formula error: {0}")]
    Formula(String),
}

pub type Result<T> = std::result::Result<T, Error>;
