use std::fmt;

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Missing or contradictory flags. Exit 1.
    Usage(String),
    /// Inputs rejected by validation. Exit 2.
    Invalid(String),
    /// Tolerance or exclusion thresholds not met. Exit 3.
    Numerical(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<fptlab::Error> for CliError {
    fn from(e: fptlab::Error) -> Self {
        match e {
            fptlab::Error::InvalidInput(m) => CliError::Invalid(m),
            fptlab::Error::Numerical(m) => CliError::Numerical(m),
        }
    }
}
