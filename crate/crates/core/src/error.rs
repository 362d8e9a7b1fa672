use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("point lies outside the root bounds of the k-d tree")]
    OutOfBounds,
    #[error("the k-d tree is empty")]
    EmptyTree,
    #[error("no values have been recorded in this k-d region")]
    NoValue,
    #[error("normalization solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailed { iterations: usize, residual: f64 },
    #[error("training diverged: loss is not finite")]
    TrainingDiverged,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
