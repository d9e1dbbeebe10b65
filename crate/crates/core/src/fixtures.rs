//! Small reference instances for examples, tests and benchmarks.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::instance::{GeneralConfig, Instance, PeriodSeries, StartupCostCurve, UnitSpec};

/// One thermal unit over two one-hour periods with demand 100 and 150.
///
/// The optimum keeps the unit on in both periods at production (100, 150)
/// for a cost of 2700.
pub fn single_unit() -> Instance {
    let mut unit = UnitSpec::new(1, "coal");
    unit.p_min = 50.0;
    unit.p_max = 200.0;
    unit.ramp_up = 1000.0;
    unit.ramp_down = 1000.0;
    unit.startup_ramp = 200.0;
    unit.shutdown_ramp = 200.0;
    unit.var_cost = 10.0;
    unit.fixed_cost = 100.0;

    let general = GeneralConfig {
        period_length: 1.0,
        num_periods: 2,
        start: NaiveDate::from_ymd_opt(2024, 1, 1)
            .expect("valid date")
            .and_hms_opt(0, 0, 0)
            .expect("valid time"),
        under_production_penalty: 1e4,
        under_reserve_penalty: 5e3,
        over_production_penalty: 1e3,
        startup_tol: GeneralConfig::DEFAULT_STARTUP_TOL,
    };
    let periods = PeriodSeries {
        demand: vec![100.0, 150.0],
        reserve: vec![0.0, 0.0],
        fuel_cost: BTreeMap::from([("coal".to_owned(), vec![2.0, 2.0])]),
    };
    Instance {
        general,
        periods,
        units: vec![unit],
        startup_curves: BTreeMap::from([(1, StartupCostCurve::from_values(1, &[500.0]))]),
    }
}
