use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::model::{Family, MilpModel};

/// Worst violations of a candidate solution.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ResidualReport {
    /// Largest row violation per family present in the model.
    pub families: BTreeMap<Family, f64>,
    /// Largest violation of a column bound (lower 0, upper 1 for binaries).
    pub bounds: f64,
    /// Largest distance of a binary column from {0, 1}.
    pub integrality: f64,
    /// Name and violation of the worst row, if any row is violated.
    pub worst_row: Option<(String, f64)>,
}

impl ResidualReport {
    pub fn max_row_violation(&self) -> f64 {
        self.families.values().copied().fold(0.0, f64::max)
    }

    pub fn family(&self, family: Family) -> f64 {
        self.families.get(&family).copied().unwrap_or(0.0)
    }

    pub fn max_violation(&self) -> f64 {
        self.max_row_violation()
            .max(self.bounds)
            .max(self.integrality)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_violation() <= tolerance
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max row violation {:e}, bound violation {:e}, integrality gap {:e}",
            self.max_row_violation(),
            self.bounds,
            self.integrality
        )?;
        if let Some((name, v)) = &self.worst_row {
            write!(f, " (worst row {name}: {v:e})")?;
        }
        Ok(())
    }
}

/// Residuals of `values` (indexed by column; missing entries count as 0).
pub fn check_solution(model: &MilpModel, values: &[f64]) -> ResidualReport {
    let value = |col: usize| values.get(col).copied().unwrap_or(0.0);
    let mut report = ResidualReport::default();
    for row in model.constraints() {
        let lhs: f64 = row
            .coefficients
            .iter()
            .map(|&(col, a)| a * value(col))
            .sum();
        let v = row.sense.violation(lhs, row.rhs);
        let entry = report.families.entry(row.family()).or_insert(0.0);
        *entry = entry.max(v);
        if v > 0.0 && report.worst_row.as_ref().is_none_or(|(_, w)| v > *w) {
            report.worst_row = Some((row.name.clone(), v));
        }
    }
    for var in model.variables() {
        let x = value(var.column);
        let bound = (var.lower() - x).max(x - var.upper()).max(0.0);
        report.bounds = report.bounds.max(bound);
        if var.is_binary() {
            report.integrality = report.integrality.max(x.abs().min((1.0 - x).abs()));
        }
    }
    report
}
