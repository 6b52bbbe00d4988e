use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: most are
/// plain computation errors, [`Error::Refused`] marks a precondition the
/// caller must not silently bypass (exit 3), and [`Error::Config`] marks a
/// malformed experiment description (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported for this graph family: {0}")]
    UnsupportedFamily(String),

    #[error("search budget exceeded: visited {visited} vertices (budget {budget})")]
    BudgetExceeded { budget: usize, visited: usize },

    #[error("vertex not reached within the search budget")]
    NotReached,

    #[error("graph not materialized deep enough: shell {shell} exceeds depth {depth}")]
    DepthExceeded { shell: u32, depth: u32 },

    #[error("vertex ordinal overflow while enumerating shell {shell}")]
    OrdinalOverflow { shell: u32 },

    #[error("function value missing at {vertex} (boundary underflow)")]
    MissingValue { vertex: String },

    #[error("non-positive weight {value} at {vertex}")]
    NonPositiveWeight { vertex: String, value: f64 },

    #[error("not weakly spherically symmetric: shell {shell} mixes degrees ({detail})")]
    NotRadiallySymmetric { shell: u32, detail: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigendecomposition did not converge: off-diagonal norm {offdiag:.3e} after {sweeps} sweeps")]
    EigenNoConvergence { offdiag: f64, sweeps: usize },

    #[error("region size {n} exceeds the dense spectral cap {cap}")]
    SpectralCapExceeded { n: usize, cap: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("flux tail not summable: {0}")]
    DivergentTail(String),

    #[error("compact support violated at {vertex}")]
    SupportViolation { vertex: String },

    #[error("uncertified input: {0}")]
    Uncertified(String),

    #[error("solver invariant violated: {0}")]
    InvariantViolated(String),

    #[error("precondition refused: {0}")]
    Refused(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
