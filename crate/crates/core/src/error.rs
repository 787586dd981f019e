use thiserror::Error;

/// Errors raised by the constructions in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvalue {distance:.3e} from the branch cut at -1")]
    BranchCut { distance: f64 },

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("norm {observed} exceeds the allowed bound")]
    NormViolation { observed: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
