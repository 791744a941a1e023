use nodal_core::NodalError;
use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NONCONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Results were written but some cell or estimate did not meet its convergence test.
    NotConverged,
    /// `replay` produced different bytes.
    Mismatch,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => EXIT_OK,
            Outcome::NotConverged => EXIT_NONCONVERGED,
            Outcome::Mismatch => EXIT_FAILURE,
        }
    }

    pub fn worst(self, other: Outcome) -> Outcome {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Other(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

// bad inputs are usage errors; numerical breakdowns are failures
impl From<NodalError> for CliError {
    fn from(e: NodalError) -> Self {
        match e {
            NodalError::InvalidDimensions { .. }
            | NodalError::Domain(_)
            | NodalError::LengthMismatch { .. }
            | NodalError::Shape(_)
            | NodalError::Integrability(_) => CliError::Usage(e.to_string()),
            NodalError::NotPsd(_) | NodalError::SingularBlock(_) => CliError::Other(e.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_outcome() {
        assert_eq!(Outcome::Ok.worst(Outcome::NotConverged), Outcome::NotConverged);
        assert_eq!(Outcome::NotConverged.worst(Outcome::Ok), Outcome::NotConverged);
        assert_eq!(Outcome::Mismatch.worst(Outcome::NotConverged), Outcome::NotConverged);
        assert_eq!(Outcome::Ok.worst(Outcome::Ok), Outcome::Ok);
    }

    #[test]
    fn error_codes() {
        let e: CliError = NodalError::Integrability("d too small".into()).into();
        assert_eq!(e.code(), EXIT_USAGE);
        let e: CliError = NodalError::NotPsd(-1.0).into();
        assert_eq!(e.code(), EXIT_FAILURE);
    }
}
