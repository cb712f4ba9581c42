//! File formats, run reports, the acceptance suite and the command-line
//! front end built on `instanton-core`.

pub mod commands;
pub mod format;
pub mod report;
pub mod suite;

use instanton_core::Error;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    AssertionFailed = 1,
    InvalidInput = 2,
    NoConvergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl LabError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            LabError::Input(_) => ExitStatus::InvalidInput,
            LabError::Core(e) => match e {
                Error::Precondition(_) | Error::ShapeMismatch(_) | Error::InvalidCharge(_) => ExitStatus::InvalidInput,
                Error::NoConvergence { .. } | Error::NotFound(_) => ExitStatus::NoConvergence,
                Error::VerificationFailed(_) | Error::NonCommuting { .. } => ExitStatus::AssertionFailed,
            },
        }
    }
}
