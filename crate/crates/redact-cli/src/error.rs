//! Command-line error kinds and their exit codes.

use std::fmt;

/// Exit status 2 for input/validation problems, 3 for a failed audit
/// verdict, 1 for internal errors.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Map library errors onto exit classes: anomalies inside the numerics are
/// internal; everything about the inputs or preconditions is a validation
/// failure.
pub fn from_core(e: redact_core::Error) -> CliError {
    use redact_core::Error as E;
    match e {
        E::EigenNonConvergence
        | E::EigenvalueRange { .. }
        | E::NonMonotoneTable { .. }
        | E::TableOutOfRange { .. }
        | E::HazardOutOfRange { .. }
        | E::UnreachableConditioning { .. }
        | E::ImpossiblePath { .. }
        | E::CrossCheckFailed { .. } => CliError::Internal(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}
