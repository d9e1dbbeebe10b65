//! Startup-cost thinning.
//!
//! A startup-cost curve needs one model row per (unit, period, offline time).
//! Thinning replaces runs of similar costs by a single step so that only the
//! first offline time of every run keeps a row. Runs are grown greedily from
//! the left while the relative error of the run stays below the tolerance;
//! the step value is the harmonic mean of the run's end points, which
//! minimizes the worst relative error inside the run.

use serde::Serialize;
use thiserror::Error;

use crate::instance::{StartupCostCurve, UnitId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThinningError {
    #[error("costs must satisfy 0 <= first <= last, got ({first}, {last})")]
    Domain { first: f64, last: f64 },
    #[error("startup costs of unit {unit} decrease at offline time {offline}")]
    NonMonotoneCurve { unit: UnitId, offline: u32 },
    #[error("tolerance {0} is outside [0, 1]")]
    ToleranceOutOfRange(f64),
}

fn check_domain(first: f64, last: f64) -> Result<(), ThinningError> {
    if first >= 0.0 && first <= last && last.is_finite() {
        Ok(())
    } else {
        Err(ThinningError::Domain { first, last })
    }
}

/// Smallest achievable worst-case relative error when the costs between
/// `first` and `last` share one step.
pub fn best_error(first: f64, last: f64) -> Result<f64, ThinningError> {
    check_domain(first, last)?;
    if first == 0.0 && last == 0.0 {
        return Ok(0.0);
    }
    Ok((last - first) / (last + first))
}

/// The step value attaining [`best_error`]: the harmonic mean of the ends.
pub fn best_step(first: f64, last: f64) -> Result<f64, ThinningError> {
    check_domain(first, last)?;
    if first == 0.0 && last == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * first * last / (first + last))
}

/// Whether a run from `first` to `last` may share one step. Equal ends always
/// merge, so a zero tolerance still collapses constant runs.
fn may_share_step(first: f64, last: f64, tol: f64) -> bool {
    first == last || best_error(first, last).is_ok_and(|e| e < tol)
}

/// One run of offline times sharing a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepGroup {
    /// First offline time of the run; the only one that keeps a model row.
    pub start: u32,
    /// Last offline time of the run (inclusive).
    pub end: u32,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ThinnedCurve {
    pub unit_id: UnitId,
    pub groups: Vec<StepGroup>,
}

impl ThinnedCurve {
    /// `(start, step)` for every group, in increasing offline time.
    pub fn steps(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.groups.iter().map(|g| (g.start, g.step))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// The thinned cost for an offline time of `offline` periods, i.e. the
    /// step of the last group starting at or before it.
    pub fn cost_at(&self, offline: u32) -> Option<f64> {
        self.groups
            .iter()
            .take_while(|g| g.start <= offline)
            .last()
            .map(|g| g.step)
    }

    /// Unthinned curve: every defined offline time keeps its own step.
    pub fn identity(curve: &StartupCostCurve) -> Self {
        let groups = curve
            .costs
            .iter()
            .map(|(&t, &c)| StepGroup {
                start: t,
                end: t,
                step: c,
            })
            .collect();
        ThinnedCurve {
            unit_id: curve.unit_id,
            groups,
        }
    }
}

fn check_curve(curve: &StartupCostCurve) -> Result<(), ThinningError> {
    match curve.first_decrease() {
        Some(offline) => Err(ThinningError::NonMonotoneCurve {
            unit: curve.unit_id,
            offline,
        }),
        None => Ok(()),
    }
}

fn check_tolerance(tol: f64) -> Result<(), ThinningError> {
    if (0.0..=1.0).contains(&tol) {
        Ok(())
    } else {
        Err(ThinningError::ToleranceOutOfRange(tol))
    }
}

/// Greedy left-to-right thinning of a monotone curve.
///
/// Defined offline times are taken in increasing order; an offline time
/// missing between two defined ones costs the same as its predecessor, so
/// the curve is treated as the sequence of its defined points.
pub fn thin_curve(curve: &StartupCostCurve, tol: f64) -> Result<ThinnedCurve, ThinningError> {
    check_tolerance(tol)?;
    check_curve(curve)?;
    let points: Vec<(u32, f64)> = curve.costs.iter().map(|(&t, &c)| (t, c)).collect();

    let mut groups = Vec::new();
    let mut first = 0;
    while first < points.len() {
        let mut last = first;
        while last + 1 < points.len() && may_share_step(points[first].1, points[last + 1].1, tol) {
            last += 1;
        }
        groups.push(StepGroup {
            start: points[first].0,
            end: points[last].0,
            step: best_step(points[first].1, points[last].1)?,
        });
        first = last + 1;
    }
    Ok(ThinnedCurve {
        unit_id: curve.unit_id,
        groups,
    })
}

/// Exact minimum number of runs a curve can be split into, by dynamic
/// programming over run boundaries. Shares no code with [`thin_curve`] and
/// serves as the reference for its minimality.
pub fn min_groups_oracle(curve: &StartupCostCurve, tol: f64) -> Result<usize, ThinningError> {
    check_tolerance(tol)?;
    check_curve(curve)?;
    let values: Vec<f64> = curve.costs.values().copied().collect();
    let n = values.len();
    let admissible = |a: f64, b: f64| {
        if a == b {
            return true;
        }
        let err = if a + b == 0.0 { 0.0 } else { (b - a) / (b + a) };
        err < tol
    };
    // fewest[i]: fewest runs covering the first i points.
    let mut fewest = vec![usize::MAX; n + 1];
    fewest[0] = 0;
    for end in 1..=n {
        for begin in 0..end {
            if fewest[begin] != usize::MAX && admissible(values[begin], values[end - 1]) {
                fewest[end] = fewest[end].min(fewest[begin] + 1);
            }
        }
    }
    Ok(fewest[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(values: &[f64]) -> StartupCostCurve {
        StartupCostCurve::from_values(7, values)
    }

    #[test]
    fn best_error_examples() {
        assert_eq!(best_error(100.0, 100.0).unwrap(), 0.0);
        assert!((best_error(90.0, 110.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(best_error(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn best_step_examples() {
        assert_eq!(best_step(100.0, 100.0).unwrap(), 100.0);
        assert!((best_step(90.0, 110.0).unwrap() - 99.0).abs() < 1e-12);
        assert_eq!(best_step(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            best_error(110.0, 90.0),
            Err(ThinningError::Domain { .. })
        ));
        assert!(matches!(
            best_step(-1.0, 5.0),
            Err(ThinningError::Domain { .. })
        ));
        assert!(matches!(
            best_error(1.0, f64::NAN),
            Err(ThinningError::Domain { .. })
        ));
    }

    #[test]
    fn constant_curve_is_one_group() {
        let thinned = thin_curve(&curve(&[100.0, 100.0, 100.0]), 0.05).unwrap();
        assert_eq!(
            thinned.groups,
            vec![StepGroup {
                start: 1,
                end: 3,
                step: 100.0
            }]
        );
        assert_eq!(
            min_groups_oracle(&curve(&[100.0, 100.0, 100.0]), 0.05).unwrap(),
            1
        );
    }

    #[test]
    fn large_jump_blocks_merging() {
        let c = curve(&[100.0, 200.0]);
        let thinned = thin_curve(&c, 0.05).unwrap();
        assert_eq!(
            thinned.steps().collect::<Vec<_>>(),
            vec![(1, 100.0), (2, 200.0)]
        );
        assert_eq!(min_groups_oracle(&c, 0.05).unwrap(), 2);
    }

    #[test]
    fn zero_tolerance_merges_only_equal_values() {
        let zeros = curve(&[0.0; 4]);
        assert_eq!(min_groups_oracle(&zeros, 0.0).unwrap(), 1);
        assert_eq!(thin_curve(&zeros, 0.0).unwrap().len(), 1);
        let c = curve(&[1.0, 2.0, 2.0, 3.0]);
        let thinned = thin_curve(&c, 0.0).unwrap();
        assert_eq!(
            thinned.steps().collect::<Vec<_>>(),
            vec![(1, 1.0), (2, 2.0), (4, 3.0)]
        );
    }

    #[test]
    fn zero_never_merges_with_positive() {
        let c = curve(&[0.0, 1.0, 1.0]);
        assert_eq!(thin_curve(&c, 1.0).unwrap().len(), 2);
    }

    #[test]
    fn gaps_are_stepped_over() {
        let mut c = StartupCostCurve::new(3);
        c.costs.insert(1, 100.0);
        c.costs.insert(2, 101.0);
        c.costs.insert(5, 300.0);
        let thinned = thin_curve(&c, 0.05).unwrap();
        assert_eq!(thinned.groups.len(), 2);
        assert_eq!(thinned.groups[0].end, 2);
        assert_eq!(
            thinned.groups[1],
            StepGroup {
                start: 5,
                end: 5,
                step: 300.0
            }
        );
        assert_eq!(thinned.cost_at(4), Some(thinned.groups[0].step));
        assert_eq!(thinned.cost_at(9), Some(300.0));
    }

    #[test]
    fn rejects_decreasing_curves_and_bad_tolerances() {
        assert_eq!(
            thin_curve(&curve(&[500.0, 400.0]), 0.05),
            Err(ThinningError::NonMonotoneCurve {
                unit: 7,
                offline: 2
            })
        );
        assert!(matches!(
            min_groups_oracle(&curve(&[5.0, 4.0]), 0.05),
            Err(ThinningError::NonMonotoneCurve { .. })
        ));
        assert_eq!(
            thin_curve(&curve(&[1.0]), 1.5),
            Err(ThinningError::ToleranceOutOfRange(1.5))
        );
    }

    #[test]
    fn empty_curve_thins_to_nothing() {
        assert!(thin_curve(&curve(&[]), 0.05).unwrap().is_empty());
        assert_eq!(min_groups_oracle(&curve(&[]), 0.05).unwrap(), 0);
    }

    fn monotone_curve() -> impl Strategy<Value = Vec<f64>> {
        (
            prop::collection::vec(0.0f64..50.0, 1..200),
            0.0f64..100.0,
            prop::bool::ANY,
        )
            .prop_map(|(steps, base, flat)| {
                let mut level = base;
                steps
                    .into_iter()
                    .map(|s| {
                        // Sprinkle plateaus so that exact ties are exercised.
                        if !(flat && s < 20.0) {
                            level += s;
                        }
                        level
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn greedy_matches_oracle(values in monotone_curve(), tol in prop::sample::select(vec![0.0, 0.01, 0.05, 0.2, 0.5, 1.0])) {
            let c = curve(&values);
            let thinned = thin_curve(&c, tol).unwrap();
            prop_assert_eq!(thinned.len(), min_groups_oracle(&c, tol).unwrap());
        }

        #[test]
        fn groups_partition_and_bound_the_error(values in monotone_curve(), tol in 0.0f64..=1.0) {
            let c = curve(&values);
            let thinned = thin_curve(&c, tol).unwrap();
            let mut expected_start = 1;
            let mut last_step = 0.0;
            for g in &thinned.groups {
                prop_assert_eq!(g.start, expected_start);
                prop_assert!(g.start <= g.end);
                prop_assert!(g.step >= last_step);
                last_step = g.step;
                expected_start = g.end + 1;
                for t in g.start..=g.end {
                    let original = c.costs[&t];
                    if original > 0.0 {
                        prop_assert!((g.step - original).abs() / original <= tol + 1e-12);
                    }
                }
            }
            prop_assert_eq!(expected_start as usize, values.len() + 1);
        }
    }
}
