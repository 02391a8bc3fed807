use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is below the minimum of 2")]
    DimensionTooSmall(usize),

    #[error("matrix is not symmetric (max asymmetry {max_asym:e})")]
    NotSymmetric { max_asym: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("p0 and q span a degenerate (one-dimensional) subspace")]
    DegenerateSpan,

    #[error("index {index} out of range for catalog of {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("no eigengap: lambda1 - lambda2 = {gap:e}")]
    NoEigengap { gap: f64 },

    #[error("infeasible: best residual {residual:e}")]
    Infeasible { residual: f64 },

    #[error("no iterate satisfies the dominance condition")]
    NoDominantFeasible,

    #[error("k = {k} is outside 1..={d}")]
    BadK { k: usize, d: usize },

    #[error("no catalog item qualifies for the self-aligned subset")]
    EmptySelection,

    #[error("invalid step-size schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid probability weighting: {0}")]
    InvalidWeighting(String),

    #[error("empty catalog")]
    EmptyCatalog,

    /// Carries the best iterate found so callers can still inspect it.
    #[error("estimator did not converge after {iterations} iterations (residual {residual:e}, gradient {gradient:e})")]
    DidNotConverge {
        best: Vec<f64>,
        iterations: usize,
        residual: f64,
        gradient: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
