//! Mapping of failures onto process exit codes.

use std::fmt;

use uc_core::model::BuildError;
use uc_core::{LoadError, ReportError, SolveError, ThinningError};

pub const SUCCESS: u8 = 0;
/// Invalid data: validation errors, non-monotone curves, infeasible models.
pub const DOMAIN: u8 = 1;
/// Bad command line, unreadable or unwritable files.
pub const USAGE: u8 = 2;
/// The solver failed or produced an unusable answer.
pub const SOLVER: u8 = 3;

/// Error raised by the CLI itself with an explicit exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: DOMAIN,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Failure {
            code: SOLVER,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn solve_code(err: &SolveError) -> u8 {
    match err {
        SolveError::InvalidConfig(_) | SolveError::MissingSolverCommand | SolveError::Io { .. } => {
            USAGE
        }
        _ => SOLVER,
    }
}

/// Exit code for an error chain. The first recognised error wins.
pub fn code_of(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if cause.is::<LoadError>() || cause.is::<std::io::Error>() {
            return USAGE;
        }
        if let Some(e) = cause.downcast_ref::<ThinningError>() {
            return match e {
                ThinningError::ToleranceOutOfRange(_) => USAGE,
                _ => DOMAIN,
            };
        }
        if cause.is::<BuildError>() {
            return DOMAIN;
        }
        if let Some(e) = cause.downcast_ref::<SolveError>() {
            return solve_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ReportError>() {
            return match e {
                ReportError::NotOptimal(_) => DOMAIN,
                _ => USAGE,
            };
        }
    }
    DOMAIN
}
