use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 2 config, 3 infeasible, 4 invariant breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Infeasible(_) => 3,
            HarnessError::InvariantBreach(_) => 4,
        }
    }
}

/// Core errors raised while running a scenario: design failures are
/// infeasibility, everything else stems from the configuration.
impl From<prefdyn_core::Error> for HarnessError {
    fn from(e: prefdyn_core::Error) -> Self {
        use prefdyn_core::Error as E;
        match e {
            E::Infeasible { .. } | E::NoDominantFeasible | E::EmptySelection | E::NoEigengap { .. } => {
                HarnessError::Infeasible(e.to_string())
            }
            other => HarnessError::Config(other.to_string()),
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
