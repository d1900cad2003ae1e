use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MfdhError>;

#[derive(Debug, Error)]
pub enum MfdhError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A single-descriptor set asked for an unbiased covariance with no floor.
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    /// Input left the SPD cone (smallest eigenvalue <= 0).
    #[error("matrix is not symmetric positive-definite: {0}")]
    ManifoldDomain(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl MfdhError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MfdhError::InvalidArgument(msg.into())
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        MfdhError::Format {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures that stem from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            MfdhError::DegenerateCovariance(_)
                | MfdhError::ManifoldDomain(_)
                | MfdhError::SingularSystem(_)
        )
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(MfdhError::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
