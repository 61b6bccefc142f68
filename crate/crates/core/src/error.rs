use thiserror::Error;

/// Errors raised by fptlab computations.
///
/// `InvalidInput` covers violated preconditions (domain errors, malformed
/// grids, bad parameters). `Numerical` covers failures that happen after the
/// inputs were accepted: unmet quadrature tolerances, too many non-finite
/// Monte-Carlo weights, degenerate fits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with `InvalidInput` unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
