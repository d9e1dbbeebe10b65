//! Deterministic inputs for the benchmarks in `benches/`.

use uc_core::fixtures::single_unit;
use uc_core::instance::{Instance, StartupCostCurve, UnitSpec};

/// Startup costs rising from 700 toward 1000 over `len` offline periods.
pub fn cooling_curve(len: usize) -> Vec<f64> {
    (1..=len)
        .map(|t| 1000.0 * (0.7 + 0.3 * (1.0 - (-(t as f64) / 24.0).exp())))
        .collect()
}

/// `units` thermal units over `periods` hours with a daily demand swing.
///
/// Units differ in size and cost so the commitment is not trivial.
pub fn synthetic_instance(units: usize, periods: usize) -> Instance {
    let mut instance = single_unit();
    instance.general.num_periods = periods;
    instance.units.clear();
    instance.startup_curves.clear();
    let mut capacity = 0.0;
    for j in 1..=units as u32 {
        let size = 100.0 + 50.0 * f64::from(j % 4);
        let mut unit = UnitSpec::new(j, "coal");
        unit.p_min = 0.3 * size;
        unit.p_max = size;
        unit.ramp_up = 0.5 * size;
        unit.ramp_down = 0.5 * size;
        unit.startup_ramp = 0.6 * size;
        unit.shutdown_ramp = 0.6 * size;
        unit.var_cost = 8.0 + f64::from(j);
        unit.fixed_cost = 50.0 + 10.0 * f64::from(j);
        unit.shutdown_cost = 20.0;
        capacity += size;
        instance.units.push(unit);
        let curve: Vec<f64> = cooling_curve(periods)
            .iter()
            .map(|c| c * f64::from(j))
            .collect();
        instance
            .startup_curves
            .insert(j, StartupCostCurve::from_values(j, &curve));
    }
    instance.periods.demand = (0..periods)
        .map(|k| capacity * (0.55 + 0.25 * (k as f64 * std::f64::consts::TAU / 24.0).sin()))
        .collect();
    instance.periods.reserve = instance.periods.demand.iter().map(|d| 0.05 * d).collect();
    instance
        .periods
        .fuel_cost
        .insert("coal".into(), vec![2.0; periods]);
    instance
}
