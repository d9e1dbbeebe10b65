//! Exact solver for small models: enumerate every assignment of the binary
//! columns and solve the remaining LP of each.
//!
//! Rows that involve only binaries (initial state, minimum up/down time) are
//! checked during a depth-first enumeration, so infeasible patterns are
//! discarded before any LP is built. The surviving patterns are solved in
//! parallel; a pattern whose presolved objective bound already exceeds the
//! best known objective is skipped.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::lp::{solve_lp, LpError, LpOutcome, LpProblem, LpRow};
use super::{Solution, SolveError, SolveStatus, SolverConfig};
use crate::model::MilpModel;

/// Patterns are packed into a `u64`, the first binary column in the most
/// significant used bit, so numeric order is lexicographic order.
const MAX_PATTERN_BITS: usize = 63;

/// Result of one commitment pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternOutcome {
    /// Value of each binary column, in column order.
    pub pattern: Vec<bool>,
    /// Optimal objective of the pattern's LP, `None` if it is infeasible.
    pub objective: Option<f64>,
}

struct Prepared {
    binaries: Vec<usize>,
    cost: Vec<f64>,
    rows: Vec<LpRow>,
    patterns: Vec<u64>,
}

impl Prepared {
    fn new(model: &MilpModel, config: &SolverConfig) -> Result<Self, SolveError> {
        config.check()?;
        let binaries: Vec<usize> = model.binary_columns().collect();
        let budget = config.binary_budget.min(MAX_PATTERN_BITS);
        if binaries.len() > budget {
            return Err(SolveError::TooManyBinaries {
                binaries: binaries.len(),
                budget: config.binary_budget,
            });
        }
        let mut cost = vec![0.0; model.num_columns()];
        for &(col, c) in model.objective() {
            cost[col] = c;
        }
        let rows = model
            .constraints()
            .iter()
            .map(|r| LpRow {
                terms: r.coefficients.clone(),
                sense: r.sense,
                rhs: r.rhs,
            })
            .collect();
        let patterns = feasible_patterns(model, &binaries, config.tolerance);
        Ok(Prepared {
            binaries,
            cost,
            rows,
            patterns,
        })
    }

    fn bits(&self, pattern: u64) -> impl Iterator<Item = bool> + '_ {
        let n = self.binaries.len();
        (0..n).map(move |i| pattern >> (n - 1 - i) & 1 == 1)
    }

    fn solve_pattern(
        &self,
        pattern: u64,
        tol: f64,
        cutoff: Option<f64>,
    ) -> Result<LpOutcome, SolveError> {
        let mut lower = vec![0.0; self.cost.len()];
        let mut upper = vec![f64::INFINITY; self.cost.len()];
        for (&col, bit) in self.binaries.iter().zip(self.bits(pattern)) {
            let value = if bit { 1.0 } else { 0.0 };
            lower[col] = value;
            upper[col] = value;
        }
        let problem = LpProblem {
            cost: &self.cost,
            rows: &self.rows,
            lower,
            upper,
        };
        solve_lp(&problem, tol, cutoff).map_err(numerical)
    }
}

fn numerical(err: LpError) -> SolveError {
    SolveError::NumericalFailure(err.to_string())
}

/// Depth-first enumeration of the assignments that satisfy every row made
/// of binaries only. Each such row is checked as soon as its last binary is
/// assigned.
fn feasible_patterns(model: &MilpModel, binaries: &[usize], tol: f64) -> Vec<u64> {
    let n = binaries.len();
    let mut position = vec![usize::MAX; model.num_columns()];
    for (i, &col) in binaries.iter().enumerate() {
        position[col] = i;
    }
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, row) in model.constraints().iter().enumerate() {
        if row.coefficients.is_empty()
            || row
                .coefficients
                .iter()
                .any(|&(c, _)| position[c] == usize::MAX)
        {
            continue;
        }
        let last = row
            .coefficients
            .iter()
            .map(|&(c, _)| position[c])
            .max()
            .expect("row is not empty");
        checks[last].push(r);
    }

    let rows = model.constraints();
    let mut values = vec![0.0; model.num_columns()];
    let mut patterns = Vec::new();
    let mut stack: Vec<(usize, bool)> = Vec::new();
    if n == 0 {
        return vec![0];
    }
    stack.push((0, true));
    stack.push((0, false));
    let mut pattern: u64 = 0;
    while let Some((depth, bit)) = stack.pop() {
        values[binaries[depth]] = if bit { 1.0 } else { 0.0 };
        let shift = n - 1 - depth;
        pattern = (pattern >> (shift + 1) << (shift + 1)) | (u64::from(bit) << shift);
        let ok = checks[depth]
            .iter()
            .all(|&r| rows[r].violation(&values) <= tol);
        if !ok {
            continue;
        }
        if depth + 1 == n {
            patterns.push(pattern);
        } else {
            stack.push((depth + 1, true));
            stack.push((depth + 1, false));
        }
    }
    patterns
}

fn margin(objective: f64) -> f64 {
    1e-9 * (1.0 + objective.abs())
}

/// Exact optimum by enumeration. Among patterns with equal objective the
/// lexicographically smallest wins.
pub fn solve_exact(model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let prepared = Prepared::new(model, config)?;
    let tol = config.tolerance;
    let best = AtomicU64::new(f64::INFINITY.to_bits());

    type Candidate = Option<(f64, u64, Vec<f64>)>;
    let pick = |a: Candidate, b: Candidate| -> Candidate {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if (b.0, b.1) < (a.0, a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    };
    let outcome: Result<(Candidate, bool), SolveError> = prepared
        .patterns
        .par_iter()
        .map(|&pattern| {
            let current = f64::from_bits(best.load(Ordering::Relaxed));
            let cutoff = current.is_finite().then(|| current + margin(current));
            match prepared.solve_pattern(pattern, tol, cutoff)? {
                LpOutcome::Optimal(x) => {
                    let objective = model.objective_value(&x);
                    let _ = best.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |old| {
                        (objective < f64::from_bits(old)).then_some(objective.to_bits())
                    });
                    Ok((Some((objective, pattern, x)), false))
                }
                LpOutcome::Unbounded => Ok((None, true)),
                LpOutcome::Infeasible | LpOutcome::CutOff => Ok((None, false)),
            }
        })
        .try_reduce(|| (None, false), |a, b| Ok((pick(a.0, b.0), a.1 || b.1)));
    let (candidate, unbounded) = outcome?;

    let backend = "builtin-exact".to_owned();
    let wall_time = started.elapsed();
    if unbounded {
        return Ok(Solution {
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            status: SolveStatus::Unbounded,
            backend,
            wall_time,
        });
    }
    Ok(match candidate {
        Some((objective, _, values)) => Solution {
            values,
            objective,
            status: SolveStatus::Optimal,
            backend,
            wall_time,
        },
        None => Solution {
            values: Vec::new(),
            objective: f64::INFINITY,
            status: SolveStatus::Infeasible,
            backend,
            wall_time,
        },
    })
}

/// Objective of every pattern that passes the binary-only rows, in
/// lexicographic pattern order. No pruning by objective is applied.
pub fn enumerate_patterns(
    model: &MilpModel,
    config: &SolverConfig,
) -> Result<Vec<PatternOutcome>, SolveError> {
    let prepared = Prepared::new(model, config)?;
    prepared
        .patterns
        .par_iter()
        .map(|&pattern| {
            let objective = match prepared.solve_pattern(pattern, config.tolerance, None)? {
                LpOutcome::Optimal(x) => Some(model.objective_value(&x)),
                LpOutcome::Unbounded => Some(f64::NEG_INFINITY),
                LpOutcome::Infeasible | LpOutcome::CutOff => None,
            };
            Ok(PatternOutcome {
                pattern: prepared.bits(pattern).collect(),
                objective,
            })
        })
        .collect()
}

/// LP relaxation: binaries range over `[0, 1]`.
pub fn solve_relaxation(model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolveError> {
    config.check()?;
    let started = Instant::now();
    let mut cost = vec![0.0; model.num_columns()];
    for &(col, c) in model.objective() {
        cost[col] = c;
    }
    let rows: Vec<LpRow> = model
        .constraints()
        .iter()
        .map(|r| LpRow {
            terms: r.coefficients.clone(),
            sense: r.sense,
            rhs: r.rhs,
        })
        .collect();
    let lower = model.variables().iter().map(|v| v.lower()).collect();
    let upper = model.variables().iter().map(|v| v.upper()).collect();
    let problem = LpProblem {
        cost: &cost,
        rows: &rows,
        lower,
        upper,
    };
    let (values, objective, status) =
        match solve_lp(&problem, config.tolerance, None).map_err(numerical)? {
            LpOutcome::Optimal(x) => {
                let objective = model.objective_value(&x);
                (x, objective, SolveStatus::Optimal)
            }
            LpOutcome::Unbounded => (Vec::new(), f64::NEG_INFINITY, SolveStatus::Unbounded),
            LpOutcome::Infeasible | LpOutcome::CutOff => {
                (Vec::new(), f64::INFINITY, SolveStatus::Infeasible)
            }
        };
    Ok(Solution {
        values,
        objective,
        status,
        backend: "builtin-relaxation".to_owned(),
        wall_time: started.elapsed(),
    })
}
