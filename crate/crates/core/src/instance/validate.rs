//! Input-data consistency checks.
//!
//! Every rule produces its own [`ViolationCode`]. All problems are collected;
//! nothing here fails early. A capacity shortfall is only a warning because
//! the demand and reserve rows carry penalized slack.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{Instance, UnitId, UnitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationCode {
    InvalidPeriodLength,
    InvalidPeriodCount,
    NegativePenalty,
    StartupTolOutOfRange,
    SeriesLengthMismatch,
    NegativeDemand,
    NegativeReserve,
    NegativeFuelCost,
    InvalidFuelName,
    DuplicateUnit,
    UnknownFuel,
    MissingStartupCurve,
    InvalidUnitParameter,
    InitialUptimeOutOfRange,
    InitialDowntimeOutOfRange,
    SimultaneousInitialState,
    MinUptimeOutOfRange,
    MinDowntimeOutOfRange,
    ImpossibleProductionLimits,
    CannotStartUp,
    CannotShutDown,
    NonMonotoneStartupCost,
    StorageInflowOvercapacity,
    InvalidStorageEfficiency,
    InvalidInitialStorage,
    InvalidFinalStorage,
    StorageCannotFill,
    StorageCannotDrain,
    CapacityShortfall,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 29] = [
        Self::InvalidPeriodLength,
        Self::InvalidPeriodCount,
        Self::NegativePenalty,
        Self::StartupTolOutOfRange,
        Self::SeriesLengthMismatch,
        Self::NegativeDemand,
        Self::NegativeReserve,
        Self::NegativeFuelCost,
        Self::InvalidFuelName,
        Self::DuplicateUnit,
        Self::UnknownFuel,
        Self::MissingStartupCurve,
        Self::InvalidUnitParameter,
        Self::InitialUptimeOutOfRange,
        Self::InitialDowntimeOutOfRange,
        Self::SimultaneousInitialState,
        Self::MinUptimeOutOfRange,
        Self::MinDowntimeOutOfRange,
        Self::ImpossibleProductionLimits,
        Self::CannotStartUp,
        Self::CannotShutDown,
        Self::NonMonotoneStartupCost,
        Self::StorageInflowOvercapacity,
        Self::InvalidStorageEfficiency,
        Self::InvalidInitialStorage,
        Self::InvalidFinalStorage,
        Self::StorageCannotFill,
        Self::StorageCannotDrain,
        Self::CapacityShortfall,
    ];

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::CapacityShortfall => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn message(self) -> &'static str {
        use ViolationCode::*;
        match self {
            InvalidPeriodLength => "Period length must be positive!",
            InvalidPeriodCount => "Number of periods must be at least one!",
            NegativePenalty => "Penalties must not be negative!",
            StartupTolOutOfRange => "Start-up cost tolerance out of range!",
            SeriesLengthMismatch => "Period series length differs from the number of periods!",
            NegativeDemand => "Negative demand!",
            NegativeReserve => "Negative reserve!",
            NegativeFuelCost => "Negative fuel cost!",
            InvalidFuelName => "Fuel names may only contain letters, digits and underscores!",
            DuplicateUnit => "Duplicate unit id!",
            UnknownFuel => "Unit uses a fuel without price series!",
            MissingStartupCurve => "Unit has no start-up cost curve!",
            InvalidUnitParameter => "Unit parameter is negative or not finite!",
            InitialUptimeOutOfRange => "Initial uptime out of range!",
            InitialDowntimeOutOfRange => "Initial downtime out of range!",
            SimultaneousInitialState => "Simultaneous initial down- and uptime!",
            MinUptimeOutOfRange => "Minimal uptime out of range!",
            MinDowntimeOutOfRange => "Minimal downtime out of range!",
            ImpossibleProductionLimits => "Impossible production limits!",
            CannotStartUp => "Some unit is not able to start up!",
            CannotShutDown => "Some unit is not able to shutdown!",
            NonMonotoneStartupCost => "The start-up costs are not monotonically increasing!",
            StorageInflowOvercapacity => "Storage inflow leads to overcapacity!",
            InvalidStorageEfficiency => "Invalid storage efficiency!",
            InvalidInitialStorage => "Invalid initial storage fill!",
            InvalidFinalStorage => "Invalid final storage fill!",
            StorageCannotFill | StorageCannotDrain => {
                "Some storage constraints are not fulfillable!"
            }
            CapacityShortfall => {
                "Excessive demand or reserve: total maximal production is too low!"
            }
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    pub unit: Option<UnitId>,
    pub period: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level} [{}]", self.code)?;
        if let Some(unit) = self.unit {
            write!(f, " unit {unit}")?;
        }
        if let Some(period) = self.period {
            write!(f, " period {period}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn push(&mut self, code: ViolationCode, unit: Option<UnitId>, period: Option<usize>) {
        self.push_detail(code, unit, period, None);
    }

    fn push_detail(
        &mut self,
        code: ViolationCode,
        unit: Option<UnitId>,
        period: Option<usize>,
        detail: Option<String>,
    ) {
        let message = match detail {
            Some(d) => format!("{} ({d})", code.message()),
            None => code.message().to_owned(),
        };
        self.violations.push(Violation {
            code,
            severity: code.severity(),
            unit,
            period,
            message,
        });
    }
}

fn is_valid_fuel_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn validate(instance: &Instance) -> ValidationReport {
    use ViolationCode::*;
    let mut report = ValidationReport::default();
    let g = &instance.general;
    let t = g.num_periods;
    let length = g.period_length;

    if !(length > 0.0 && length.is_finite()) {
        report.push(InvalidPeriodLength, None, None);
    }
    if t < 1 {
        report.push(InvalidPeriodCount, None, None);
    }
    let penalties = [
        g.under_production_penalty,
        g.under_reserve_penalty,
        g.over_production_penalty,
    ];
    if penalties.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        report.push(NegativePenalty, None, None);
    }
    if !(0.0..=1.0).contains(&g.startup_tol) {
        report.push(StartupTolOutOfRange, None, None);
    }

    let periods = &instance.periods;
    let lengths_ok = periods.demand.len() == t
        && periods.reserve.len() == t
        && periods.fuel_cost.values().all(|series| series.len() == t);
    if !lengths_ok {
        report.push(SeriesLengthMismatch, None, None);
    }
    for (i, d) in periods.demand.iter().enumerate() {
        if !(*d >= 0.0 && d.is_finite()) {
            report.push(NegativeDemand, None, Some(i + 1));
        }
    }
    for (i, r) in periods.reserve.iter().enumerate() {
        if !(*r >= 0.0 && r.is_finite()) {
            report.push(NegativeReserve, None, Some(i + 1));
        }
    }
    for (fuel, series) in &periods.fuel_cost {
        if !is_valid_fuel_name(fuel) {
            report.push_detail(InvalidFuelName, None, None, Some(fuel.clone()));
        }
        for (i, c) in series.iter().enumerate() {
            if !(*c >= 0.0 && c.is_finite()) {
                report.push_detail(NegativeFuelCost, None, Some(i + 1), Some(fuel.clone()));
            }
        }
    }

    let mut seen = BTreeSet::new();
    for unit in &instance.units {
        if !seen.insert(unit.id) {
            report.push(DuplicateUnit, Some(unit.id), None);
        }
        validate_unit(instance, unit, &mut report);
    }

    if lengths_ok {
        for k in 1..=t {
            let capacity: f64 = instance.units.iter().map(|u| u.p_max).sum();
            let need = periods.demand[k - 1] + periods.reserve[k - 1];
            if capacity < need {
                report.push_detail(
                    CapacityShortfall,
                    None,
                    Some(k),
                    Some(format!("capacity {capacity} < demand + reserve {need}")),
                );
            }
        }
    }
    report
}

fn validate_unit(instance: &Instance, unit: &UnitSpec, report: &mut ValidationReport) {
    use ViolationCode::*;
    let id = Some(unit.id);
    let t = instance.general.num_periods as i64;
    let length = instance.general.period_length;

    if !instance.periods.fuel_cost.contains_key(&unit.fuel) {
        report.push_detail(UnknownFuel, id, None, Some(unit.fuel.clone()));
    }
    let non_negative = [
        ("P_max", unit.p_max),
        ("RU", unit.ramp_up),
        ("RD", unit.ramp_down),
        ("SU", unit.startup_ramp),
        ("SD", unit.shutdown_ramp),
        ("SC", unit.storage_capacity),
        ("SIF", unit.storage_inflow),
        ("SI", unit.initial_storage),
        ("SF", unit.final_storage),
        ("FA", unit.var_fuel),
        ("FB", unit.fixed_fuel),
        ("PA", unit.var_cost),
        ("PB", unit.fixed_cost),
        ("CD", unit.shutdown_cost),
    ];
    let mut bad: Vec<&str> = non_negative
        .iter()
        .filter(|(_, v)| !(*v >= 0.0 && v.is_finite()))
        .map(|(n, _)| *n)
        .collect();
    if !unit.p_min.is_finite() {
        bad.push("P_min");
    }
    if !unit.storage_efficiency.is_finite() {
        bad.push("SE");
    }
    if !bad.is_empty() {
        report.push_detail(InvalidUnitParameter, id, None, Some(bad.join(", ")));
    }

    if !(0..=t).contains(&unit.initial_uptime) {
        report.push(InitialUptimeOutOfRange, id, None);
    }
    if !(0..=t).contains(&unit.initial_downtime) {
        report.push(InitialDowntimeOutOfRange, id, None);
    }
    if unit.initial_uptime != 0 && unit.initial_downtime != 0 {
        report.push(SimultaneousInitialState, id, None);
    }
    if !(1..=t).contains(&unit.min_uptime) {
        report.push(MinUptimeOutOfRange, id, None);
    }
    if !(1..=t).contains(&unit.min_downtime) {
        report.push(MinDowntimeOutOfRange, id, None);
    }
    if unit.p_min > unit.p_max {
        report.push(ImpossibleProductionLimits, id, None);
    }
    if unit.p_min > unit.startup_ramp {
        report.push(CannotStartUp, id, None);
    }
    if unit.p_min > unit.shutdown_ramp {
        report.push(CannotShutDown, id, None);
    }

    match instance.startup_curve(unit.id) {
        None => report.push(MissingStartupCurve, id, None),
        Some(curve) => {
            if let Some(offline) = curve.first_decrease() {
                report.push_detail(
                    NonMonotoneStartupCost,
                    id,
                    None,
                    Some(format!("at offline time {offline}")),
                );
            }
        }
    }

    if unit.storage_inflow > unit.p_max {
        report.push(StorageInflowOvercapacity, id, None);
    }
    if !(0.0..=1.0).contains(&unit.storage_efficiency) {
        report.push(InvalidStorageEfficiency, id, None);
    }
    if unit.initial_storage > unit.storage_capacity {
        report.push(InvalidInitialStorage, id, None);
    }
    if unit.final_storage > unit.storage_capacity {
        report.push(InvalidFinalStorage, id, None);
    }
    let horizon = length * t as f64;
    let max_fill = unit.initial_storage
        + horizon * (unit.storage_efficiency * unit.max_consumption() + unit.storage_inflow);
    if max_fill < unit.final_storage {
        report.push(StorageCannotFill, id, None);
    }
    let min_fill = unit.initial_storage + horizon * (unit.storage_inflow - unit.p_max);
    if min_fill > unit.final_storage {
        report.push(StorageCannotDrain, id, None);
    }
}
