//! Unit-commitment modeling toolkit.
//!
//! The pipeline is: load and [`validate`](instance::validate) an
//! [`Instance`], thin its startup-cost curves ([`thinning`]), build a
//! [`MilpModel`] ([`model`]), solve it ([`solve`]) and post-process the
//! solution ([`report`]).
//!
//! ```
//! use uc_core::{build_model, fixtures, solve_exact, thin_all, SolverConfig};
//!
//! let instance = fixtures::single_unit();
//! let thinned = thin_all(&instance, instance.general.startup_tol).unwrap();
//! let model = build_model(&instance, &thinned).unwrap();
//! let solution = solve_exact(&model, &SolverConfig::default()).unwrap();
//! assert!((solution.objective - 2700.0).abs() < 1e-6);
//! ```

pub mod fixtures;
pub mod instance;
pub mod model;
pub mod report;
pub mod solve;
pub mod thinning;

pub use instance::{
    load_instance, load_instance_with_overrides, validate, Instance, InstancePaths, LoadError,
    UnitId, UnitSpec, ValidationReport, Violation, ViolationCode,
};
pub use model::{
    build_model, build_model_with, model_stats, thin_all, BuildError, MilpModel, ModelOptions,
    ModelStats,
};
pub use report::{write_reports, CostBreakdown, DispatchReport, ReportError};
pub use solve::{
    check_solution, solve, solve_exact, solve_external, write_lp, write_mps, Backend, ModelFormat,
    Solution, SolveError, SolveStatus, SolverConfig,
};
pub use thinning::{thin_curve, ThinnedCurve, ThinningError};
