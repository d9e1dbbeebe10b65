//! Solving a [`MilpModel`]: MPS/LP emission, a bridge to external solvers
//! and a built-in exact solver for small models.

use std::fmt;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

mod check;
mod exact;
mod external;
mod format;
mod lp;

pub use check::{check_solution, ResidualReport};
pub use exact::{enumerate_patterns, solve_exact, solve_relaxation, PatternOutcome};
pub use external::{parse_solution_file, solve_external, ParsedSolution};
pub use format::{format_number, write_lp, write_mps};

use crate::model::MilpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Limit => "limit",
            SolveStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// One value per model column; empty unless the status is optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub backend: String,
    pub wall_time: Duration,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, column: usize) -> f64 {
        self.values.get(column).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Backend {
    #[default]
    BuiltinExact,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ModelFormat {
    #[default]
    Mps,
    Lp,
}

impl ModelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ModelFormat::Mps => "mps",
            ModelFormat::Lp => "lp",
        }
    }

    pub fn write(self, model: &MilpModel) -> String {
        match self {
            ModelFormat::Mps => write_mps(model),
            ModelFormat::Lp => write_lp(model),
        }
    }
}

pub const DEFAULT_BINARY_BUDGET: usize = 24;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Shell-style command line with `{model}` and `{solution}` placeholders.
    pub command_template: Option<String>,
    pub binary_budget: usize,
    pub tolerance: f64,
    /// Format handed to the external solver.
    pub model_format: ModelFormat,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::BuiltinExact,
            command_template: None,
            binary_budget: DEFAULT_BINARY_BUDGET,
            tolerance: DEFAULT_TOLERANCE,
            model_format: ModelFormat::Mps,
        }
    }
}

impl SolverConfig {
    pub fn external(command_template: impl Into<String>) -> Self {
        SolverConfig {
            backend: Backend::External,
            command_template: Some(command_template.into()),
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), SolveError> {
        if self.binary_budget < 1 {
            return Err(SolveError::InvalidConfig(
                "binary budget must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SolveError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("model has {binaries} binary columns, more than the budget of {budget} for exact enumeration")]
    TooManyBinaries { binaries: usize, budget: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no solver command given")]
    MissingSolverCommand,
    #[error("failed to launch solver `{command}`: {source}")]
    SolverLaunchFailed {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver exited with {}: {stderr}", code.map_or("a signal".to_string(), |c| format!("status {c}")))]
    SolverNonZeroExit { code: Option<i32>, stderr: String },
    #[error("unparsable solution: {0}")]
    UnparsableSolution(String),
    #[error("solution fails the residual check: {0}")]
    ResidualCheckFailed(Box<ResidualReport>),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Solves with the backend selected in `config`.
pub fn solve(model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolveError> {
    match config.backend {
        Backend::BuiltinExact => solve_exact(model, config),
        Backend::External => solve_external(model, config),
    }
}
