use thiserror::Error;

/// Errors raised by model construction and the quantum/entropy operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("{constraint} violated (residual {residual:e})")]
    Constraint {
        constraint: &'static str,
        residual: f64,
    },

    #[error("selected outcome has probability {0:e}, below the selection threshold")]
    ZeroProbability(f64),

    #[error("initial state is not of the form P_i/d(i) after selection; worst residual {worst_residual:e} at outcome {outcome}")]
    AssumptionViolated { outcome: usize, worst_residual: f64 },

    #[error("inconsistent model: {0}")]
    Inconsistent(String),

    #[error("operators do not commute (commutator norm {0:e})")]
    NonCommuting(f64),

    #[error("joint eigenprojections not resolved after {0} attempts")]
    JointDiagonalization(usize),

    #[error("relative entropy is infinite")]
    DivergentRelativeEntropy,

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
