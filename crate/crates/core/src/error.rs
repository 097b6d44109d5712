use thiserror::Error;

/// Errors raised by the Krein-space routines.
///
/// Variants fall in two families: shape/input problems (`Dimension`,
/// `NotSquare`, `NonFinite`) and violated mathematical preconditions
/// (everything else). The CLI maps the latter to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KreinError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("{what} check failed: residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual {
        what: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("subspace is not {0}")]
    Subspace(&'static str),

    #[error("not a neutral dual pair: {0}")]
    NotDualPair(&'static str),

    #[error("{what}: distance {distance:.3e} is not below {limit:.3e}")]
    OutOfRange {
        what: &'static str,
        distance: f64,
        limit: f64,
    },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical routine failed: {0}")]
    Numerical(&'static str),
}

impl KreinError {
    pub(crate) fn dim(expected: impl ToString, found: impl ToString) -> Self {
        KreinError::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for shape and input-format errors, false for violated
    /// mathematical preconditions.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            KreinError::Dimension { .. }
                | KreinError::NotSquare { .. }
                | KreinError::NonFinite
                | KreinError::InvalidFrame(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, KreinError>;
