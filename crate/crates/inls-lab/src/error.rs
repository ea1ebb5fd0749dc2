//! Crate-wide error type.  Every rejected precondition names the constraint
//! that was violated so batch logs stay diagnosable.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition on an argument failed.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two operands live on incompatible grids / time grids.
    #[error("incompatible operands: {0}")]
    Incompatible(String),

    /// An iterative solve failed to reach its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// A field file or config file is malformed.
    #[error("malformed input: {0}")]
    Format(String),

    /// Configuration error (CLI layer).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code used by the batch front end: config errors 1, failed
    /// convergence 2.  Assertion failures map to 3 at the call site.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 2,
            _ => 1,
        }
    }
}
