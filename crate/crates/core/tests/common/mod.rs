//! Shared helpers: random tiny instances and the external solver command.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uc_core::instance::{GeneralConfig, Instance, PeriodSeries, StartupCostCurve, UnitSpec};
use uc_core::model::{MilpModel, ModelOptions};
use uc_core::{build_model_with, solve_exact, thin_all, Solution, SolverConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn highs_script() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py")
}

/// Command template running the bundled HiGHS script.
pub fn highs_command() -> String {
    let script = highs_script();
    format!(
        "python3 {} {{model}} {{solution}}",
        shell_words::quote(&script.to_string_lossy())
    )
}

pub fn external_config() -> SolverConfig {
    SolverConfig::external(highs_command())
}

#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    /// Upper bound on units × periods.
    pub max_binaries: usize,
    /// Allow storage units.
    pub storage: bool,
    /// Units that can go anywhere between 0 and P_max from one period to the
    /// next, without minimum up/down times or initial state.
    pub flexible: bool,
    /// Force demand plus reserve above capacity in at least one period and
    /// use penalties far above any production cost.
    pub shortfall: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_binaries: 12,
            storage: true,
            flexible: false,
            shortfall: false,
        }
    }
}

fn round(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn thermal_unit(rng: &mut impl Rng, id: u32, t: usize, opts: &GenOptions) -> UnitSpec {
    let mut u = UnitSpec::new(id, if rng.random_bool(0.5) { "gas" } else { "coal" });
    u.p_min = round(
        rng.random_range(0.0..if opts.shortfall { 30.0 } else { 60.0 }),
        5.0,
    );
    u.p_max = u.p_min + round(rng.random_range(40.0..200.0), 5.0);
    if opts.flexible {
        u.ramp_up = u.p_max;
        u.ramp_down = u.p_max;
        u.startup_ramp = u.p_max;
        u.shutdown_ramp = u.p_max;
    } else {
        u.ramp_up = round(rng.random_range(10.0..=u.p_max), 5.0);
        u.ramp_down = round(rng.random_range(10.0..=u.p_max), 5.0);
        u.startup_ramp = round(rng.random_range(u.p_min..=u.p_max), 5.0);
        u.shutdown_ramp = round(rng.random_range(u.p_min..=u.p_max), 5.0);
        let cap = t.min(3) as i64;
        u.min_uptime = rng.random_range(1..=cap);
        u.min_downtime = rng.random_range(1..=cap);
        match rng.random_range(0..3) {
            0 => u.initial_uptime = rng.random_range(1..=cap),
            1 => u.initial_downtime = rng.random_range(1..=cap),
            _ => {}
        }
    }
    u.var_fuel = round(rng.random_range(0.0..3.0), 0.1);
    u.fixed_fuel = round(rng.random_range(0.0..2.0), 0.1);
    u.var_cost = round(rng.random_range(0.0..20.0), 0.5);
    u.fixed_cost = round(rng.random_range(0.0..100.0), 1.0);
    u.shutdown_cost = round(rng.random_range(0.0..200.0), 1.0);
    u
}

/// A storage unit that can move its fill freely, so any fill target that
/// passes validation is reachable.
fn storage_unit(rng: &mut impl Rng, id: u32, t: usize, l: f64) -> UnitSpec {
    let mut u = UnitSpec::new(id, "water");
    u.p_min = -round(rng.random_range(20.0..80.0), 5.0);
    u.p_max = round(rng.random_range(20.0..100.0), 5.0);
    u.ramp_up = u.p_max;
    u.ramp_down = u.p_max;
    u.startup_ramp = u.p_max;
    u.shutdown_ramp = u.p_max;
    u.storage_capacity = round(rng.random_range(50.0..300.0), 5.0);
    u.storage_efficiency = round(rng.random_range(0.6..0.95), 0.05);
    u.storage_inflow = if rng.random_bool(0.5) {
        0.0
    } else {
        round(rng.random_range(0.0..10.0), 1.0)
    };
    u.initial_storage = round(rng.random_range(0.0..=u.storage_capacity), 5.0);
    let horizon = l * t as f64;
    let lowest = (u.initial_storage + horizon * (u.storage_inflow - u.p_max)).max(0.0);
    let highest = (u.initial_storage
        + horizon * (u.storage_efficiency * u.max_consumption() + u.storage_inflow))
        .min(u.storage_capacity);
    u.final_storage = rng.random_range(lowest..=highest);
    u.var_cost = round(rng.random_range(0.0..5.0), 0.5);
    u.fixed_cost = round(rng.random_range(0.0..20.0), 1.0);
    u
}

fn startup_curve(rng: &mut impl Rng, id: u32, t: usize) -> StartupCostCurve {
    let len = rng.random_range(1..=t.max(1));
    let mut level = round(rng.random_range(0.0..300.0), 10.0);
    let values: Vec<f64> = (0..len)
        .map(|_| {
            let v = level;
            level += round(rng.random_range(0.0..150.0), 5.0);
            v
        })
        .collect();
    StartupCostCurve::from_values(id, &values)
}

/// A random valid instance with at most `opts.max_binaries` binaries.
pub fn random_instance(rng: &mut impl Rng, opts: &GenOptions) -> Instance {
    let units = if opts.max_binaries >= 4 && rng.random_bool(0.5) {
        2
    } else {
        1
    };
    let t = rng.random_range(2..=(opts.max_binaries / units).clamp(2, 6));
    let l = if opts.flexible {
        1.0
    } else {
        [0.5, 1.0, 2.0][rng.random_range(0..3)]
    };

    let mut specs = Vec::new();
    for id in 1..=units as u32 {
        let storage = opts.storage && !opts.shortfall && rng.random_bool(0.3);
        specs.push(if storage {
            storage_unit(rng, id, t, l)
        } else {
            thermal_unit(rng, id, t, opts)
        });
    }
    let curves = specs
        .iter()
        .map(|u| (u.id, startup_curve(rng, u.id, t)))
        .collect::<BTreeMap<_, _>>();

    let capacity: f64 = specs.iter().map(|u| u.p_max).sum();
    let mut demand = Vec::new();
    let mut reserve = Vec::new();
    for _ in 0..t {
        if opts.shortfall {
            demand.push(round(
                rng.random_range(40.0_f64.max(0.5 * capacity)..1.3 * capacity),
                1.0,
            ));
        } else {
            demand.push(round(
                rng.random_range(0.2 * capacity..1.05 * capacity),
                1.0,
            ));
        }
        reserve.push(round(rng.random_range(0.0..0.2 * capacity), 1.0));
    }
    if opts.shortfall && (0..t).all(|k| demand[k] + reserve[k] <= capacity) {
        let k = rng.random_range(0..t);
        demand[k] = round(capacity * 1.1 + 10.0, 1.0);
    }
    let mut fuel_cost = BTreeMap::new();
    let fuels: std::collections::BTreeSet<&str> = specs.iter().map(|u| u.fuel.as_str()).collect();
    for fuel in fuels {
        fuel_cost.insert(
            fuel.to_owned(),
            (0..t)
                .map(|_| round(rng.random_range(1.0..5.0), 0.1))
                .collect(),
        );
    }

    let (upp, urp, opp) = if opts.shortfall {
        (1e5, 1e5, 1e5)
    } else {
        (
            round(rng.random_range(500.0..2000.0), 10.0),
            round(rng.random_range(100.0..1000.0), 10.0),
            round(rng.random_range(50.0..500.0), 10.0),
        )
    };
    Instance {
        general: GeneralConfig {
            period_length: l,
            num_periods: t,
            start: NaiveDate::from_ymd_opt(2009, 5, 11)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            under_production_penalty: upp,
            under_reserve_penalty: urp,
            over_production_penalty: opp,
            startup_tol: GeneralConfig::DEFAULT_STARTUP_TOL,
        },
        periods: PeriodSeries {
            demand,
            reserve,
            fuel_cost,
        },
        units: specs,
        startup_curves: curves,
    }
}

pub fn build(instance: &Instance, options: ModelOptions) -> MilpModel {
    let thinned = thin_all(instance, instance.general.startup_tol).expect("thinning");
    build_model_with(instance, &thinned, options).expect("model")
}

pub fn solve_builtin(model: &MilpModel) -> Solution {
    solve_exact(model, &SolverConfig::default()).expect("exact solve")
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// One instance per violation code, each triggering exactly that code.
pub fn violation_catalog() -> Vec<(uc_core::ViolationCode, Instance)> {
    use uc_core::fixtures::single_unit;
    use uc_core::ViolationCode::*;

    fn with(change: impl FnOnce(&mut Instance)) -> Instance {
        let mut instance = single_unit();
        change(&mut instance);
        instance
    }
    fn unit(change: impl FnOnce(&mut UnitSpec)) -> Instance {
        with(|i| change(&mut i.units[0]))
    }
    fn storage(change: impl FnOnce(&mut UnitSpec)) -> Instance {
        unit(|u| {
            u.p_min = -50.0;
            u.storage_efficiency = 1.0;
            u.storage_capacity = 1000.0;
            change(u);
        })
    }

    vec![
        (InvalidPeriodLength, with(|i| i.general.period_length = 0.0)),
        (
            InvalidPeriodCount,
            with(|i| {
                i.general.num_periods = 0;
                i.units.clear();
                i.startup_curves.clear();
                i.periods.demand.clear();
                i.periods.reserve.clear();
                i.periods.fuel_cost.values_mut().for_each(Vec::clear);
            }),
        ),
        (
            NegativePenalty,
            with(|i| i.general.under_production_penalty = -1.0),
        ),
        (StartupTolOutOfRange, with(|i| i.general.startup_tol = 1.5)),
        (SeriesLengthMismatch, with(|i| i.periods.demand.truncate(1))),
        (NegativeDemand, with(|i| i.periods.demand[0] = -5.0)),
        (NegativeReserve, with(|i| i.periods.reserve[0] = -5.0)),
        (
            NegativeFuelCost,
            with(|i| i.periods.fuel_cost.get_mut("coal").unwrap()[0] = -1.0),
        ),
        (
            InvalidFuelName,
            with(|i| {
                drop(
                    i.periods
                        .fuel_cost
                        .insert("bad-name".into(), vec![1.0, 1.0]),
                )
            }),
        ),
        (DuplicateUnit, with(|i| i.units.push(i.units[0].clone()))),
        (UnknownFuel, unit(|u| u.fuel = "oil".into())),
        (MissingStartupCurve, with(|i| i.startup_curves.clear())),
        (InvalidUnitParameter, unit(|u| u.var_cost = -1.0)),
        (InitialUptimeOutOfRange, unit(|u| u.initial_uptime = 3)),
        (InitialDowntimeOutOfRange, unit(|u| u.initial_downtime = 3)),
        (
            SimultaneousInitialState,
            unit(|u| {
                u.initial_uptime = 1;
                u.initial_downtime = 1;
            }),
        ),
        (MinUptimeOutOfRange, unit(|u| u.min_uptime = 3)),
        (MinDowntimeOutOfRange, unit(|u| u.min_downtime = 0)),
        (
            ImpossibleProductionLimits,
            unit(|u| {
                u.p_min = 250.0;
                u.startup_ramp = 300.0;
                u.shutdown_ramp = 300.0;
            }),
        ),
        (CannotStartUp, unit(|u| u.startup_ramp = 40.0)),
        (CannotShutDown, unit(|u| u.shutdown_ramp = 40.0)),
        (
            NonMonotoneStartupCost,
            with(|i| {
                drop(
                    i.startup_curves
                        .insert(1, StartupCostCurve::from_values(1, &[500.0, 400.0])),
                )
            }),
        ),
        (
            StorageInflowOvercapacity,
            unit(|u| {
                u.storage_inflow = 250.0;
                u.storage_capacity = 1000.0;
                u.final_storage = 500.0;
            }),
        ),
        (
            InvalidStorageEfficiency,
            unit(|u| u.storage_efficiency = 1.5),
        ),
        (InvalidInitialStorage, unit(|u| u.initial_storage = 10.0)),
        (
            InvalidFinalStorage,
            storage(|u| {
                u.storage_capacity = 0.0;
                u.final_storage = 10.0;
            }),
        ),
        (
            StorageCannotFill,
            storage(|u| {
                u.storage_efficiency = 0.5;
                u.final_storage = 60.0;
            }),
        ),
        (
            StorageCannotDrain,
            unit(|u| {
                u.storage_capacity = 1000.0;
                u.initial_storage = 1000.0;
            }),
        ),
        (CapacityShortfall, with(|i| i.periods.demand[1] = 250.0)),
    ]
}
