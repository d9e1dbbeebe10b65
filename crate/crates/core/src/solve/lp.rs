//! Small dense LP solver: presolve followed by a two-phase tableau simplex
//! with Bland's rule.
//!
//! Presolve turns singleton rows into bounds, removes fixed columns, fixes
//! columns that appear in no row at their cheapest bound, and eliminates
//! column singletons of equality rows (such as cost-defining rows). After it
//! the remaining problem is usually a fraction of the original size. The
//! presolved objective also yields a cheap lower bound, used to skip LPs
//! that cannot beat a known objective.

use crate::model::Sense;

const PIVOT_EPS: f64 = 1e-9;
const OPTIMALITY_EPS: f64 = 1e-9;
pub(crate) const ITERATION_LIMIT: usize = 100_000;

#[derive(Debug, Clone)]
pub(crate) struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min cost·x` subject to `rows` and `lower <= x <= upper`.
/// Lower bounds must be finite.
#[derive(Debug, Clone)]
pub(crate) struct LpProblem<'a> {
    pub cost: &'a [f64],
    pub rows: &'a [LpRow],
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
    /// The objective provably exceeds the cutoff.
    CutOff,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub(crate) enum LpError {
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
}

/// `x[col] = (rhs - Σ terms) / coef`, recorded when a column is eliminated.
struct Substitution {
    col: usize,
    coef: f64,
    terms: Vec<(usize, f64)>,
    rhs: f64,
}

struct Presolved {
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    fixed: Vec<Option<f64>>,
    eliminated: Vec<bool>,
    rows: Vec<LpRow>,
    substitutions: Vec<Substitution>,
    constant: f64,
}

enum PresolveResult {
    Reduced(Presolved),
    Infeasible,
    Unbounded,
}

fn tighten(lower: &mut f64, upper: &mut f64, coef: f64, sense: Sense, rhs: f64) {
    let value = rhs / coef;
    let (le, ge) = match (sense, coef > 0.0) {
        (Sense::Eq, _) => (true, true),
        (Sense::Le, true) | (Sense::Ge, false) => (true, false),
        (Sense::Le, false) | (Sense::Ge, true) => (false, true),
    };
    if le && value < *upper {
        *upper = value;
    }
    if ge && value > *lower {
        *lower = value;
    }
}

fn presolve(problem: &LpProblem<'_>, tol: f64) -> PresolveResult {
    let n = problem.cost.len();
    let mut p = Presolved {
        cost: problem.cost.to_vec(),
        lower: problem.lower.clone(),
        upper: problem.upper.clone(),
        fixed: vec![None; n],
        eliminated: vec![false; n],
        rows: Vec::new(),
        substitutions: Vec::new(),
        constant: 0.0,
    };
    let mut rows: Vec<Option<LpRow>> = problem.rows.iter().cloned().map(Some).collect();

    loop {
        let mut changed = false;

        for slot in rows.iter_mut() {
            let Some(row) = slot else { continue };
            let before = row.terms.len();
            let mut shift = 0.0;
            row.terms.retain(|&(col, a)| match p.fixed[col] {
                Some(value) => {
                    shift += a * value;
                    false
                }
                None => true,
            });
            row.rhs -= shift;
            changed |= row.terms.len() != before;
            match row.terms.as_slice() {
                [] => {
                    if row.sense.violation(0.0, row.rhs) > tol * (1.0 + row.rhs.abs()) {
                        return PresolveResult::Infeasible;
                    }
                    *slot = None;
                    changed = true;
                }
                &[(col, a)] => {
                    tighten(&mut p.lower[col], &mut p.upper[col], a, row.sense, row.rhs);
                    *slot = None;
                    changed = true;
                }
                _ => {}
            }
        }

        for col in 0..n {
            if p.fixed[col].is_some() || p.eliminated[col] {
                continue;
            }
            let (lo, up) = (p.lower[col], p.upper[col]);
            if lo > up + tol * (1.0 + lo.abs()) {
                return PresolveResult::Infeasible;
            }
            if up - lo <= 1e-12 * (1.0 + lo.abs()) {
                p.fixed[col] = Some(if up < lo { 0.5 * (lo + up) } else { lo });
                changed = true;
            }
        }

        let mut count = vec![0usize; n];
        let mut home = vec![usize::MAX; n];
        for (i, row) in rows.iter().enumerate() {
            if let Some(row) = row {
                for &(col, _) in &row.terms {
                    count[col] += 1;
                    home[col] = i;
                }
            }
        }
        for col in 0..n {
            if p.fixed[col].is_some() || p.eliminated[col] {
                continue;
            }
            if count[col] == 0 {
                let c = p.cost[col];
                let value = if c > 0.0 {
                    p.lower[col]
                } else if c < 0.0 {
                    if p.upper[col].is_infinite() {
                        return PresolveResult::Unbounded;
                    }
                    p.upper[col]
                } else {
                    p.lower[col].max(0.0).min(p.upper[col])
                };
                p.fixed[col] = Some(value);
                changed = true;
            } else if count[col] == 1 && p.upper[col].is_infinite() {
                let i = home[col];
                let row = rows[i].as_mut().expect("counted rows are active");
                if row.sense != Sense::Eq || row.terms.len() < 2 {
                    continue;
                }
                let pos = row
                    .terms
                    .iter()
                    .position(|&(c, _)| c == col)
                    .expect("column counted in this row");
                let (_, a) = row.terms.remove(pos);
                let c = p.cost[col];
                if c != 0.0 {
                    p.constant += c * row.rhs / a;
                    for &(other, b) in &row.terms {
                        p.cost[other] -= c * b / a;
                    }
                }
                p.substitutions.push(Substitution {
                    col,
                    coef: a,
                    terms: row.terms.clone(),
                    rhs: row.rhs,
                });
                // x = (rhs - rest)/a >= lower
                let lo = p.lower[col];
                row.rhs -= a * lo;
                row.sense = if a > 0.0 { Sense::Le } else { Sense::Ge };
                p.eliminated[col] = true;
                changed = true;
                // Counts of this row are stale now; restart the pass.
                break;
            }
        }

        if !changed {
            break;
        }
    }
    p.rows = rows.into_iter().flatten().collect();
    PresolveResult::Reduced(p)
}

impl Presolved {
    /// Lower bound on the objective of the presolved problem.
    fn objective_bound(&self) -> f64 {
        let mut bound = self.constant;
        for col in 0..self.cost.len() {
            if self.eliminated[col] {
                continue;
            }
            let c = self.cost[col];
            bound += match self.fixed[col] {
                Some(value) => c * value,
                None if c >= 0.0 => c * self.lower[col],
                None => c * self.upper[col],
            };
        }
        bound
    }
}

pub(crate) fn solve_lp(
    problem: &LpProblem<'_>,
    tol: f64,
    cutoff: Option<f64>,
) -> Result<LpOutcome, LpError> {
    let pre = match presolve(problem, tol) {
        PresolveResult::Reduced(p) => p,
        PresolveResult::Infeasible => return Ok(LpOutcome::Infeasible),
        PresolveResult::Unbounded => return Ok(LpOutcome::Unbounded),
    };
    if let Some(cutoff) = cutoff {
        if pre.objective_bound() > cutoff {
            return Ok(LpOutcome::CutOff);
        }
    }

    let n = pre.cost.len();
    let active: Vec<usize> = (0..n)
        .filter(|&c| pre.fixed[c].is_none() && !pre.eliminated[c])
        .collect();
    let mut position = vec![usize::MAX; n];
    for (i, &col) in active.iter().enumerate() {
        position[col] = i;
    }

    // Shift x = lower + y with y >= 0 and add rows for finite upper bounds.
    let mut rows: Vec<DenseRow> = Vec::with_capacity(pre.rows.len() + active.len());
    for row in &pre.rows {
        let mut rhs = row.rhs;
        let terms = row
            .terms
            .iter()
            .map(|&(col, a)| {
                rhs -= a * pre.lower[col];
                (position[col], a)
            })
            .collect();
        rows.push((terms, row.sense, rhs));
    }
    for (i, &col) in active.iter().enumerate() {
        if pre.upper[col].is_finite() {
            rows.push((vec![(i, 1.0)], Sense::Le, pre.upper[col] - pre.lower[col]));
        }
    }
    let cost: Vec<f64> = active.iter().map(|&c| pre.cost[c]).collect();

    let shifted = match Tableau::new(active.len(), &rows).solve(&cost, tol)? {
        TableauOutcome::Optimal(y) => y,
        TableauOutcome::Infeasible => return Ok(LpOutcome::Infeasible),
        TableauOutcome::Unbounded => return Ok(LpOutcome::Unbounded),
    };

    let mut x = vec![0.0; n];
    for (slot, fixed) in x.iter_mut().zip(&pre.fixed) {
        if let Some(value) = fixed {
            *slot = *value;
        }
    }
    for (i, &col) in active.iter().enumerate() {
        x[col] = pre.lower[col] + shifted[i];
    }
    for sub in pre.substitutions.iter().rev() {
        let rest: f64 = sub.terms.iter().map(|&(c, a)| a * x[c]).sum();
        x[sub.col] = (sub.rhs - rest) / sub.coef;
    }
    Ok(LpOutcome::Optimal(x))
}

/// Terms over shifted columns, sense and right-hand side.
type DenseRow = (Vec<(usize, f64)>, Sense, f64);

enum TableauOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Dense simplex tableau over `y >= 0`. Columns are the structural
/// variables, then one slack or surplus per inequality row, then one
/// artificial per `>=` or `=` row.
struct Tableau {
    structural: usize,
    artificial_start: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    objective: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn new(structural: usize, rows: &[DenseRow]) -> Self {
        let m = rows.len();
        let normalized: Vec<(f64, Sense)> = rows
            .iter()
            .map(|(_, sense, rhs)| {
                if *rhs < 0.0 {
                    let flipped = match sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (-1.0, flipped)
                } else {
                    (1.0, *sense)
                }
            })
            .collect();
        let slacks = normalized.iter().filter(|(_, s)| *s != Sense::Eq).count();
        let artificials = normalized.iter().filter(|(_, s)| *s != Sense::Le).count();
        let artificial_start = structural + slacks;
        let width = artificial_start + artificials + 1;

        let mut cells = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let (mut next_slack, mut next_artificial) = (structural, artificial_start);
        for (i, ((terms, _, rhs), &(sign, sense))) in rows.iter().zip(&normalized).enumerate() {
            let row = &mut cells[i * width..(i + 1) * width];
            for &(col, a) in terms {
                row[col] += sign * a;
            }
            row[width - 1] = sign * rhs;
            match sense {
                Sense::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Sense::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_artificial] = 1.0;
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
                Sense::Eq => {
                    row[next_artificial] = 1.0;
                    basis[i] = next_artificial;
                    next_artificial += 1;
                }
            }
        }
        Tableau {
            structural,
            artificial_start,
            width,
            cells,
            basis,
            objective: vec![0.0; width],
            iterations: 0,
        }
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, s);
        for v in &mut self.cells[r * w..(r + 1) * w] {
            *v *= inv;
        }
        let pivot_row = self.cells[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let factor = self.cells[i * w + s];
            if factor != 0.0 {
                let row = &mut self.cells[i * w..(i + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[s] = 0.0;
            }
        }
        let factor = self.objective[s];
        if factor != 0.0 {
            for (v, p) in self.objective.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.objective[s] = 0.0;
        }
        self.basis[r] = s;
    }

    /// Runs Bland's rule on the current objective row over columns
    /// `0..allowed`. Returns false if the problem is unbounded.
    fn iterate(&mut self, allowed: usize) -> Result<bool, LpError> {
        let rhs = self.width - 1;
        loop {
            let Some(s) = (0..allowed).find(|&j| self.objective[j] < -OPTIMALITY_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows() {
                let a = self.at(i, s);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.at(i, rhs).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.iterations += 1;
            if self.iterations > ITERATION_LIMIT {
                return Err(LpError::IterationLimit(ITERATION_LIMIT));
            }
            self.pivot(r, s);
        }
    }

    fn solve(mut self, cost: &[f64], tol: f64) -> Result<TableauOutcome, LpError> {
        let w = self.width;
        let rhs = w - 1;
        let artificial_end = rhs;

        // Phase 1: minimize the sum of artificials.
        if self.artificial_start < artificial_end {
            for j in self.artificial_start..artificial_end {
                self.objective[j] = 1.0;
            }
            for i in 0..self.rows() {
                if self.basis[i] >= self.artificial_start {
                    for j in 0..w {
                        self.objective[j] -= self.cells[i * w + j];
                    }
                }
            }
            self.iterate(artificial_end)?;
            let infeasibility = -self.objective[rhs];
            if infeasibility > tol {
                return Ok(TableauOutcome::Infeasible);
            }
            for i in 0..self.rows() {
                if self.basis[i] >= self.artificial_start {
                    if let Some(j) =
                        (0..self.artificial_start).find(|&j| self.at(i, j).abs() > PIVOT_EPS)
                    {
                        self.pivot(i, j);
                    }
                }
            }
        }

        // Phase 2 over structural and slack columns only.
        self.objective.iter_mut().for_each(|v| *v = 0.0);
        self.objective[..self.structural].copy_from_slice(cost);
        for i in 0..self.rows() {
            let b = self.basis[i];
            let c = if b < self.structural { cost[b] } else { 0.0 };
            if c != 0.0 {
                for j in 0..w {
                    self.objective[j] -= c * self.cells[i * w + j];
                }
            }
        }
        if !self.iterate(self.artificial_start)? {
            return Ok(TableauOutcome::Unbounded);
        }

        let mut y = vec![0.0; self.structural];
        for i in 0..self.rows() {
            if self.basis[i] < self.structural {
                y[self.basis[i]] = self.at(i, rhs).max(0.0);
            }
        }
        Ok(TableauOutcome::Optimal(y))
    }
}
