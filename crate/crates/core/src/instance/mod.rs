//! Model parameters: general configuration, per-period series, unit
//! specifications and startup-cost curves.
//!
//! An [`Instance`] is plain data. It is read from CSV/TOML files by
//! [`load_instance`], written back by [`write_instance`], and checked against
//! the input-data consistency rules by [`validate`].

use std::collections::BTreeMap;

use chrono::{NaiveDateTime, TimeDelta};

mod io;
mod validate;

pub use io::{
    load_instance, load_instance_with_overrides, period_index, write_instance, InstancePaths,
    LoadError, TIMESTAMP_FORMAT,
};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationCode};

/// Identifier of a power unit (the `j` column of the unit tables).
pub type UnitId = u32;

/// Parameters that apply to the whole modeled horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralConfig {
    /// Period length in hours.
    pub period_length: f64,
    /// Number of modeled periods.
    pub num_periods: usize,
    /// Start of the first period.
    pub start: NaiveDateTime,
    /// Penalty per MWh of unserved demand.
    pub under_production_penalty: f64,
    /// Penalty per MWh of missing spinning reserve.
    pub under_reserve_penalty: f64,
    /// Penalty per MWh of production above demand.
    pub over_production_penalty: f64,
    /// Relative error tolerance of the startup-cost thinning.
    pub startup_tol: f64,
}

impl GeneralConfig {
    pub const DEFAULT_STARTUP_TOL: f64 = 0.05;

    /// Timestamp at which period `k` (1-based) starts.
    pub fn period_start(&self, k: usize) -> NaiveDateTime {
        let millis = ((k as f64 - 1.0) * self.period_length * 3_600_000.0).round() as i64;
        self.start + TimeDelta::milliseconds(millis)
    }
}

/// Per-period demand, reserve requirement and fuel prices. All series are
/// indexed by `k - 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeriodSeries {
    pub demand: Vec<f64>,
    pub reserve: Vec<f64>,
    /// Fuel price per MWh of fuel, keyed by fuel name.
    pub fuel_cost: BTreeMap<String, Vec<f64>>,
}

impl PeriodSeries {
    pub fn fuel_price(&self, fuel: &str, k: usize) -> Option<f64> {
        self.fuel_cost
            .get(fuel)
            .and_then(|series| series.get(k - 1))
            .copied()
    }
}

/// Technical and economic parameters of one unit.
///
/// A unit with negative `p_min` is a storage unit: `-p_min` is its maximal
/// consumption.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSpec {
    pub id: UnitId,
    /// Minimal uptime after starting up, in periods.
    pub min_uptime: i64,
    /// Minimal downtime after shutting down, in periods.
    pub min_downtime: i64,
    /// The unit must stay online in periods `1..=initial_uptime`.
    pub initial_uptime: i64,
    /// The unit must stay offline in periods `1..=initial_downtime`.
    pub initial_downtime: i64,
    pub p_min: f64,
    pub p_max: f64,
    /// MW/h.
    pub ramp_up: f64,
    /// MW/h.
    pub ramp_down: f64,
    /// Maximal production in the period of a startup.
    pub startup_ramp: f64,
    /// Maximal production in the period before a shutdown.
    pub shutdown_ramp: f64,
    pub storage_capacity: f64,
    pub storage_efficiency: f64,
    pub storage_inflow: f64,
    pub initial_storage: f64,
    pub final_storage: f64,
    pub fuel: String,
    /// Fuel need per MWh produced.
    pub var_fuel: f64,
    /// Fuel need per online hour.
    pub fixed_fuel: f64,
    /// Non-fuel cost per MWh produced.
    pub var_cost: f64,
    /// Non-fuel cost per online hour.
    pub fixed_cost: f64,
    pub shutdown_cost: f64,
}

impl UnitSpec {
    /// A unit with one-period up/down times, no initial state and every
    /// numeric parameter zero.
    pub fn new(id: UnitId, fuel: impl Into<String>) -> Self {
        UnitSpec {
            id,
            min_uptime: 1,
            min_downtime: 1,
            initial_uptime: 0,
            initial_downtime: 0,
            p_min: 0.0,
            p_max: 0.0,
            ramp_up: 0.0,
            ramp_down: 0.0,
            startup_ramp: 0.0,
            shutdown_ramp: 0.0,
            storage_capacity: 0.0,
            storage_efficiency: 0.0,
            storage_inflow: 0.0,
            initial_storage: 0.0,
            final_storage: 0.0,
            fuel: fuel.into(),
            var_fuel: 0.0,
            fixed_fuel: 0.0,
            var_cost: 0.0,
            fixed_cost: 0.0,
            shutdown_cost: 0.0,
        }
    }

    pub fn is_storage(&self) -> bool {
        self.p_min < 0.0
    }

    /// Maximal consumption of a storage unit, zero for every other unit.
    pub fn max_consumption(&self) -> f64 {
        (-self.p_min).max(0.0)
    }

    /// Marginal cost per MWh in period `k`, given that period's fuel price.
    pub fn marginal_cost(&self, fuel_price: f64) -> f64 {
        self.var_fuel * fuel_price + self.var_cost
    }

    /// Cost per online hour in a period with the given fuel price.
    pub fn hourly_fixed_cost(&self, fuel_price: f64) -> f64 {
        self.fixed_fuel * fuel_price + self.fixed_cost
    }
}

/// Startup cost as a function of the preceding offline time `t` (in periods).
/// Only the defined offline times are stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StartupCostCurve {
    pub unit_id: UnitId,
    pub costs: BTreeMap<u32, f64>,
}

impl StartupCostCurve {
    pub fn new(unit_id: UnitId) -> Self {
        StartupCostCurve {
            unit_id,
            costs: BTreeMap::new(),
        }
    }

    /// Curve defined at `t = 1, 2, ...` with the given values.
    pub fn from_values(unit_id: UnitId, values: &[f64]) -> Self {
        let costs = values
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u32 + 1, c))
            .collect();
        StartupCostCurve { unit_id, costs }
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// First offline time whose cost is lower than its predecessor's, with
    /// an implicit leading zero.
    pub fn first_decrease(&self) -> Option<u32> {
        let mut last = 0.0;
        for (&t, &cost) in &self.costs {
            if cost < last || cost.is_nan() {
                return Some(t);
            }
            last = cost;
        }
        None
    }
}

/// A complete unit-commitment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub general: GeneralConfig,
    pub periods: PeriodSeries,
    pub units: Vec<UnitSpec>,
    pub startup_curves: BTreeMap<UnitId, StartupCostCurve>,
}

impl Instance {
    pub fn num_periods(&self) -> usize {
        self.general.num_periods
    }

    pub fn unit(&self, id: UnitId) -> Option<&UnitSpec> {
        self.units.iter().find(|u| u.id == id)
    }

    pub fn startup_curve(&self, id: UnitId) -> Option<&StartupCostCurve> {
        self.startup_curves.get(&id)
    }

    /// Fuel price seen by `unit` in period `k`; a missing fuel series prices
    /// at zero (validation reports it separately).
    pub fn fuel_price(&self, unit: &UnitSpec, k: usize) -> f64 {
        self.periods.fuel_price(&unit.fuel, k).unwrap_or(0.0)
    }

    /// Units sorted by id.
    pub fn sorted_units(&self) -> Vec<&UnitSpec> {
        let mut units: Vec<&UnitSpec> = self.units.iter().collect();
        units.sort_by_key(|u| u.id);
        units
    }

    /// Multiplies every cost input (fuel prices, variable and fixed costs,
    /// shutdown and startup costs, penalties) by `factor`.
    pub fn scale_costs(&mut self, factor: f64) {
        for series in self.periods.fuel_cost.values_mut() {
            series.iter_mut().for_each(|c| *c *= factor);
        }
        for unit in &mut self.units {
            unit.var_cost *= factor;
            unit.fixed_cost *= factor;
            unit.shutdown_cost *= factor;
        }
        for curve in self.startup_curves.values_mut() {
            curve.costs.values_mut().for_each(|c| *c *= factor);
        }
        self.general.under_production_penalty *= factor;
        self.general.under_reserve_penalty *= factor;
        self.general.over_production_penalty *= factor;
    }
}
