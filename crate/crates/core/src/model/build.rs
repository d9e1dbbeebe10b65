use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Family, MilpModel, ModelError, RowBuilder, RowKey, Sense, VarKind};
use crate::instance::{validate, Instance, StartupCostCurve, UnitId, UnitSpec, ValidationReport};
use crate::thinning::{thin_curve, ThinnedCurve, ThinningError};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("instance has {} validation error(s)", .0.errors().count())]
    ValidationFailed(ValidationReport),
    #[error("no thinned startup curve for unit {0}")]
    MissingThinnedCurve(UnitId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    /// Include the `min{..}·(1 - v)` terms of the ramping rows. They cut off
    /// fractional points of the relaxation but no integer solutions.
    pub ramp_tightening: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            ramp_tightening: true,
        }
    }
}

/// Thins the startup curve of every unit with tolerance `tol`.
pub fn thin_all(
    instance: &Instance,
    tol: f64,
) -> Result<BTreeMap<UnitId, ThinnedCurve>, ThinningError> {
    instance
        .units
        .iter()
        .map(|u| {
            let curve = instance
                .startup_curve(u.id)
                .cloned()
                .unwrap_or_else(|| StartupCostCurve::new(u.id));
            Ok((u.id, thin_curve(&curve, tol)?))
        })
        .collect()
}

pub fn build_model(
    instance: &Instance,
    thinned: &BTreeMap<UnitId, ThinnedCurve>,
) -> Result<MilpModel, BuildError> {
    build_model_with(instance, thinned, ModelOptions::default())
}

type Row = super::RowParts;

#[derive(Default)]
struct Draft {
    vars: Vec<(VarKind, Option<UnitId>, usize)>,
    lookup: HashMap<(VarKind, Option<UnitId>, usize), usize>,
    rows: Vec<Row>,
    objective: Vec<(usize, f64)>,
}

impl Draft {
    fn declare(&mut self, kind: VarKind, unit: Option<UnitId>, period: usize) -> usize {
        let pos = self.vars.len();
        self.vars.push((kind, unit, period));
        self.lookup.insert((kind, unit, period), pos);
        pos
    }

    fn col(&self, kind: VarKind, unit: Option<UnitId>, period: usize) -> usize {
        self.lookup[&(kind, unit, period)]
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        family: Family,
        unit: Option<UnitId>,
        period: usize,
        inner: usize,
        terms: RowBuilder,
        sense: Sense,
        rhs: f64,
    ) {
        self.rows.push((
            RowKey {
                family,
                unit,
                period,
                inner,
            },
            terms.finish(),
            sense,
            rhs,
        ));
    }
}

pub fn build_model_with(
    instance: &Instance,
    thinned: &BTreeMap<UnitId, ThinnedCurve>,
    options: ModelOptions,
) -> Result<MilpModel, BuildError> {
    let report = validate(instance);
    if report.has_errors() {
        return Err(BuildError::ValidationFailed(report));
    }
    let units = instance.sorted_units();
    for unit in &units {
        if !thinned.contains_key(&unit.id) {
            return Err(BuildError::MissingThinnedCurve(unit.id));
        }
    }

    let g = &instance.general;
    let t_max = g.num_periods;
    let mut d = Draft::default();

    for unit in &units {
        let j = Some(unit.id);
        for k in 1..=t_max {
            d.declare(VarKind::OnOff, j, k);
            d.declare(VarKind::Production, j, k);
            d.declare(VarKind::MaxPossible, j, k);
            if unit.is_storage() {
                d.declare(VarKind::Storage, j, k);
                d.declare(VarKind::Consumption, j, k);
            }
            for kind in [
                VarKind::ProductionCost,
                VarKind::StartupCost,
                VarKind::ShutdownCost,
            ] {
                let col = d.declare(kind, j, k);
                d.objective.push((col, 1.0));
            }
        }
    }
    for k in 1..=t_max {
        let pu = d.declare(VarKind::UnderProduction, None, k);
        let po = d.declare(VarKind::OverProduction, None, k);
        let ru = d.declare(VarKind::UnderReserve, None, k);
        d.objective.push((pu, g.under_production_penalty));
        d.objective.push((po, g.over_production_penalty));
        d.objective.push((ru, g.under_reserve_penalty));
    }

    for unit in &units {
        add_unit_rows(&mut d, instance, unit, &thinned[&unit.id], options);
    }
    add_period_rows(&mut d, instance, &units);

    Ok(MilpModel::from_parts(d.vars, d.rows, d.objective)?)
}

fn add_unit_rows(
    d: &mut Draft,
    instance: &Instance,
    unit: &UnitSpec,
    thinned: &ThinnedCurve,
    options: ModelOptions,
) {
    use VarKind::*;
    let g = &instance.general;
    let t_max = g.num_periods;
    let length = g.period_length;
    let j = Some(unit.id);
    let v = |d: &Draft, k: usize| d.col(OnOff, j, k);
    let p = |d: &Draft, k: usize| d.col(Production, j, k);
    let pmax = |d: &Draft, k: usize| d.col(MaxPossible, j, k);
    let new = RowBuilder::new;

    // Initial state.
    for k in 1..=(unit.initial_uptime.max(0) as usize).min(t_max) {
        let mut r = new();
        r.add(v(d, k), 1.0);
        d.row(Family::InitOn, j, k, 0, r, Sense::Eq, 1.0);
    }
    for k in 1..=(unit.initial_downtime.max(0) as usize).min(t_max) {
        let mut r = new();
        r.add(v(d, k), 1.0);
        d.row(Family::InitOff, j, k, 0, r, Sense::Eq, 0.0);
    }

    // Minimal up- and downtime: a startup in k keeps the unit on for
    // k+1..k+UT-1, a shutdown in k keeps it off for k+1..k+DT-1.
    for k in (unit.initial_uptime.max(0) as usize + 2)..=t_max {
        let span = (unit.min_uptime - 1).max(0) as usize;
        for i in 1..=span.min(t_max - k) {
            let mut r = new();
            r.add(v(d, k + i), 1.0)
                .add(v(d, k), -1.0)
                .add(v(d, k - 1), 1.0);
            d.row(Family::MinUp, j, k, i, r, Sense::Ge, 0.0);
        }
    }
    for k in (unit.initial_downtime.max(0) as usize + 2)..=t_max {
        let span = (unit.min_downtime - 1).max(0) as usize;
        for i in 1..=span.min(t_max - k) {
            let mut r = new();
            r.add(v(d, k + i), 1.0)
                .add(v(d, k - 1), 1.0)
                .add(v(d, k), -1.0);
            d.row(Family::MinDown, j, k, i, r, Sense::Le, 1.0);
        }
    }

    // P_min·v <= p <= pmax <= P_max·v
    for k in 1..=t_max {
        let mut r = new();
        r.add(v(d, k), unit.p_min).add(p(d, k), -1.0);
        d.row(Family::Bounds, j, k, 1, r, Sense::Le, 0.0);
        let mut r = new();
        r.add(p(d, k), 1.0).add(pmax(d, k), -1.0);
        d.row(Family::Bounds, j, k, 2, r, Sense::Le, 0.0);
        let mut r = new();
        r.add(pmax(d, k), 1.0).add(v(d, k), -unit.p_max);
        d.row(Family::Bounds, j, k, 3, r, Sense::Le, 0.0);
    }

    // Ramping. The tightening constants use max(P_min, 0), the best lower
    // bound of p(k-1), so storage units are handled too.
    let floor = unit.p_min.max(0.0);
    let (up_tight, down_tight) = if options.ramp_tightening {
        (
            unit.startup_ramp.min(floor + length * unit.ramp_up),
            unit.shutdown_ramp.min(floor + length * unit.ramp_down),
        )
    } else {
        (0.0, 0.0)
    };
    for k in 2..=t_max {
        // pmax(k) <= p(k-1) + L·RU·v(k-1) + SU·(1 - v(k-1)) - up_tight·(1 - v(k))
        let mut r = new();
        r.add(pmax(d, k), 1.0)
            .add(p(d, k - 1), -1.0)
            .add(v(d, k - 1), -(length * unit.ramp_up - unit.startup_ramp))
            .add(v(d, k), -up_tight);
        d.row(
            Family::RampUp,
            j,
            k,
            0,
            r,
            Sense::Le,
            unit.startup_ramp - up_tight,
        );

        // p(k) >= p(k-1) - L·RD·v(k) - SD·(1 - v(k)) + down_tight·(1 - v(k-1))
        let mut r = new();
        r.add(p(d, k), 1.0)
            .add(p(d, k - 1), -1.0)
            .add(v(d, k), length * unit.ramp_down - unit.shutdown_ramp)
            .add(v(d, k - 1), down_tight);
        d.row(
            Family::RampDown,
            j,
            k,
            0,
            r,
            Sense::Ge,
            down_tight - unit.shutdown_ramp,
        );
    }
    for k in 1..t_max {
        // pmax(k) <= P_max·v(k+1) + SD·(v(k) - v(k+1))
        let mut r = new();
        r.add(pmax(d, k), 1.0)
            .add(v(d, k), -unit.shutdown_ramp)
            .add(v(d, k + 1), unit.shutdown_ramp - unit.p_max);
        d.row(Family::ShutdownLimit, j, k, 0, r, Sense::Le, 0.0);
    }

    if unit.is_storage() {
        let s = |d: &Draft, k: usize| d.col(Storage, j, k);
        let c = |d: &Draft, k: usize| d.col(Consumption, j, k);
        let eff = unit.storage_efficiency;
        for k in 1..=t_max {
            let mut r = new();
            r.add(s(d, k), 1.0);
            d.row(
                Family::StorageCap,
                j,
                k,
                0,
                r,
                Sense::Le,
                unit.storage_capacity,
            );
            let mut r = new();
            r.add(c(d, k), 1.0);
            d.row(
                Family::ConsumptionCap,
                j,
                k,
                0,
                r,
                Sense::Le,
                unit.max_consumption(),
            );
        }
        for k in 2..=t_max {
            // s(k) = s(k-1) + L·(SE·c(k-1) - p(k-1) + SIF)
            let mut r = new();
            r.add(s(d, k), 1.0)
                .add(s(d, k - 1), -1.0)
                .add(c(d, k - 1), -length * eff)
                .add(p(d, k - 1), length);
            d.row(
                Family::StorageBalance,
                j,
                k,
                0,
                r,
                Sense::Eq,
                length * unit.storage_inflow,
            );
        }
        let mut r = new();
        r.add(s(d, 1), 1.0);
        d.row(
            Family::StorageInitial,
            j,
            1,
            0,
            r,
            Sense::Eq,
            unit.initial_storage,
        );
        // SF = s(T) + L·(SE·c(T) - p(T) + SIF)
        let mut r = new();
        r.add(s(d, t_max), 1.0)
            .add(c(d, t_max), length * eff)
            .add(p(d, t_max), -length);
        d.row(
            Family::StorageFinal,
            j,
            t_max,
            0,
            r,
            Sense::Eq,
            unit.final_storage - length * unit.storage_inflow,
        );
    }

    // cp = (FA·FC + PA)·L·p + (FB·FC + PB)·L·v
    for k in 1..=t_max {
        let price = instance.fuel_price(unit, k);
        let mut r = new();
        r.add(d.col(ProductionCost, j, k), 1.0)
            .add(p(d, k), -unit.marginal_cost(price) * length)
            .add(v(d, k), -unit.hourly_fixed_cost(price) * length);
        d.row(Family::ProductionCost, j, k, 0, r, Sense::Eq, 0.0);
    }

    // cd(k) >= CD·(v(k-1) - v(k))
    for k in 2..=t_max {
        let mut r = new();
        r.add(d.col(ShutdownCost, j, k), 1.0)
            .add(v(d, k - 1), -unit.shutdown_cost)
            .add(v(d, k), unit.shutdown_cost);
        d.row(Family::ShutdownCost, j, k, 0, r, Sense::Ge, 0.0);
    }

    // cu(k) >= step(t)·(v(k) - Σ_{n=1..t} v(k-n)) for every group start t < k.
    for k in 1..=t_max {
        for (t, step) in thinned.steps() {
            let t = t as usize;
            if t >= k {
                break;
            }
            let mut r = new();
            r.add(d.col(StartupCost, j, k), 1.0).add(v(d, k), -step);
            for n in 1..=t {
                r.add(v(d, k - n), step);
            }
            d.row(Family::StartupCost, j, k, t, r, Sense::Ge, 0.0);
        }
    }
}

fn add_period_rows(d: &mut Draft, instance: &Instance, units: &[&UnitSpec]) {
    use VarKind::*;
    let periods = &instance.periods;
    for k in 1..=instance.general.num_periods {
        // Σ (p - c) + pu - po = D
        let mut r = RowBuilder::new();
        for unit in units {
            let j = Some(unit.id);
            r.add(d.col(Production, j, k), 1.0);
            if unit.is_storage() {
                r.add(d.col(Consumption, j, k), -1.0);
            }
        }
        r.add(d.col(UnderProduction, None, k), 1.0)
            .add(d.col(OverProduction, None, k), -1.0);
        d.row(
            Family::Demand,
            None,
            k,
            0,
            r,
            Sense::Eq,
            periods.demand[k - 1],
        );

        // Σ (pmax - p + c) + ru >= R
        let mut r = RowBuilder::new();
        for unit in units {
            let j = Some(unit.id);
            r.add(d.col(MaxPossible, j, k), 1.0)
                .add(d.col(Production, j, k), -1.0);
            if unit.is_storage() {
                r.add(d.col(Consumption, j, k), 1.0);
            }
        }
        r.add(d.col(UnderReserve, None, k), 1.0);
        d.row(
            Family::Reserve,
            None,
            k,
            0,
            r,
            Sense::Ge,
            periods.reserve[k - 1],
        );
    }
}
