use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid budget exceeded: {points} points > {budget}")]
    BudgetExceeded { points: usize, budget: usize },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("tail clipping on axis `{axis}`: boundary amplitude ratio {ratio:.3e} exceeds {limit:.1e}")]
    TailClipping { axis: String, ratio: f64, limit: f64 },

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("kernel is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("ill-conditioned gram matrix (condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("linear solver did not converge at step {step} (residual {residual:.3e})")]
    SolverDivergence { step: usize, residual: f64 },

    #[error("domain error at step {step}: {reason}")]
    Domain { step: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("zero-norm state")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, Error>;
