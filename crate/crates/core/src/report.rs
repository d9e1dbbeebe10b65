//! Post-processing of a solved model: price estimate, exact maximal possible
//! production, cost breakdown and CSV tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, UnitId, TIMESTAMP_FORMAT};
use crate::model::{MilpModel, VarKind};
use crate::solve::{Solution, SolveStatus};

/// `v` at or above this value counts as committed.
pub const COMMITMENT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("solution status is {0}, not optimal")]
    NotOptimal(SolveStatus),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Solved values arranged by unit and period (index `k - 1`).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Schedule {
    pub on: BTreeMap<UnitId, Vec<f64>>,
    pub production: BTreeMap<UnitId, Vec<f64>>,
    pub max_possible: BTreeMap<UnitId, Vec<f64>>,
    /// Storage units only.
    pub storage: BTreeMap<UnitId, Vec<f64>>,
    /// Storage units only.
    pub consumption: BTreeMap<UnitId, Vec<f64>>,
    pub production_cost: BTreeMap<UnitId, Vec<f64>>,
    pub startup_cost: BTreeMap<UnitId, Vec<f64>>,
    pub shutdown_cost: BTreeMap<UnitId, Vec<f64>>,
    pub under_production: Vec<f64>,
    pub over_production: Vec<f64>,
    pub under_reserve: Vec<f64>,
}

impl Schedule {
    /// Columns absent from the model read as 0.
    pub fn from_solution(instance: &Instance, model: &MilpModel, solution: &Solution) -> Self {
        let t = instance.num_periods();
        let series = |kind: VarKind, unit: Option<UnitId>| -> Vec<f64> {
            (1..=t)
                .map(|k| {
                    model
                        .column(kind, unit, k)
                        .map_or(0.0, |c| solution.value(c))
                })
                .collect()
        };
        let mut s = Schedule {
            under_production: series(VarKind::UnderProduction, None),
            over_production: series(VarKind::OverProduction, None),
            under_reserve: series(VarKind::UnderReserve, None),
            ..Schedule::default()
        };
        for unit in instance.sorted_units() {
            let j = Some(unit.id);
            s.on.insert(unit.id, series(VarKind::OnOff, j));
            s.production.insert(unit.id, series(VarKind::Production, j));
            s.max_possible
                .insert(unit.id, series(VarKind::MaxPossible, j));
            s.production_cost
                .insert(unit.id, series(VarKind::ProductionCost, j));
            s.startup_cost
                .insert(unit.id, series(VarKind::StartupCost, j));
            s.shutdown_cost
                .insert(unit.id, series(VarKind::ShutdownCost, j));
            if unit.is_storage() {
                s.storage.insert(unit.id, series(VarKind::Storage, j));
                s.consumption
                    .insert(unit.id, series(VarKind::Consumption, j));
            }
        }
        s
    }

    pub fn is_committed(&self, unit: UnitId, k: usize) -> bool {
        self.on
            .get(&unit)
            .and_then(|v| v.get(k - 1))
            .is_some_and(|&v| v >= COMMITMENT_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub production: f64,
    pub startup: f64,
    pub shutdown: f64,
    pub under_production_penalty: f64,
    pub under_reserve_penalty: f64,
    pub over_production_penalty: f64,
}

impl CostBreakdown {
    pub fn from_schedule(instance: &Instance, schedule: &Schedule) -> Self {
        let total = |m: &BTreeMap<UnitId, Vec<f64>>| m.values().flatten().sum::<f64>();
        let g = &instance.general;
        CostBreakdown {
            production: total(&schedule.production_cost),
            startup: total(&schedule.startup_cost),
            shutdown: total(&schedule.shutdown_cost),
            under_production_penalty: g.under_production_penalty
                * schedule.under_production.iter().sum::<f64>(),
            under_reserve_penalty: g.under_reserve_penalty
                * schedule.under_reserve.iter().sum::<f64>(),
            over_production_penalty: g.over_production_penalty
                * schedule.over_production.iter().sum::<f64>(),
        }
    }

    pub fn total(&self) -> f64 {
        self.production
            + self.startup
            + self.shutdown
            + self.under_production_penalty
            + self.under_reserve_penalty
            + self.over_production_penalty
    }

    pub fn components(&self) -> [(&'static str, f64); 6] {
        [
            ("production", self.production),
            ("startup", self.startup),
            ("shutdown", self.shutdown),
            ("under_production_penalty", self.under_production_penalty),
            ("under_reserve_penalty", self.under_reserve_penalty),
            ("over_production_penalty", self.over_production_penalty),
        ]
    }
}

/// Price estimate per period: the largest marginal cost among committed
/// units, `None` when no unit is committed.
pub fn price_series(instance: &Instance, schedule: &Schedule) -> Vec<Option<f64>> {
    (1..=instance.num_periods())
        .map(|k| {
            instance
                .units
                .iter()
                .filter(|u| schedule.is_committed(u.id, k))
                .map(|u| u.marginal_cost(instance.fuel_price(u, k)))
                .fold(None, |best: Option<f64>, c| {
                    Some(best.map_or(c, |b| b.max(c)))
                })
        })
        .collect()
}

/// Maximal possible production recomputed from the solved commitment and
/// production, undoing the slack the `pmax` variables may have in the model.
pub fn exact_max_possible(instance: &Instance, schedule: &Schedule) -> BTreeMap<UnitId, Vec<f64>> {
    let t = instance.num_periods();
    let l = instance.general.period_length;
    let mut out = BTreeMap::new();
    for unit in instance.sorted_units() {
        let on = |k: usize| {
            if schedule.is_committed(unit.id, k) {
                1.0
            } else {
                0.0
            }
        };
        let produced = schedule.production.get(&unit.id);
        let p = |k: usize| produced.and_then(|v| v.get(k - 1)).copied().unwrap_or(0.0);
        let values = (1..=t)
            .map(|k| {
                let mut cap = unit.p_max * on(k);
                if k > 1 {
                    let ramp = p(k - 1)
                        + l * unit.ramp_up * on(k - 1)
                        + unit.startup_ramp * (1.0 - on(k - 1))
                        + unit.p_max * (1.0 - on(k));
                    cap = cap.min(ramp);
                }
                if k < t {
                    cap =
                        cap.min(unit.p_max * on(k + 1) + unit.shutdown_ramp * (on(k) - on(k + 1)));
                }
                cap
            })
            .collect();
        out.insert(unit.id, values);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchReport {
    pub schedule: Schedule,
    pub price: Vec<Option<f64>>,
    pub exact_p_max: BTreeMap<UnitId, Vec<f64>>,
    pub cost_breakdown: CostBreakdown,
    pub objective: f64,
}

impl DispatchReport {
    pub fn new(
        instance: &Instance,
        model: &MilpModel,
        solution: &Solution,
    ) -> Result<Self, ReportError> {
        if !solution.is_optimal() {
            return Err(ReportError::NotOptimal(solution.status));
        }
        let schedule = Schedule::from_solution(instance, model, solution);
        Ok(DispatchReport {
            price: price_series(instance, &schedule),
            exact_p_max: exact_max_possible(instance, &schedule),
            cost_breakdown: CostBreakdown::from_schedule(instance, &schedule),
            objective: solution.objective,
            schedule,
        })
    }
}

/// Formats with at most 12 significant digits, without trailing zeros.
pub fn format_value(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".to_owned()
    } else {
        rounded.to_string()
    }
}

fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes one CSV per variable family (periods as rows, units as columns),
/// plus `price.csv`, `slacks.csv` and `summary.csv`. Returns the written
/// paths in a fixed order.
pub fn write_reports(
    instance: &Instance,
    report: &DispatchReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let t = instance.num_periods();
    let stamp = |k: usize| {
        instance
            .general
            .period_start(k)
            .format(TIMESTAMP_FORMAT)
            .to_string()
    };
    let s = &report.schedule;
    let mut written = Vec::new();

    let tables: [(&str, &BTreeMap<UnitId, Vec<f64>>); 8] = [
        ("v", &s.on),
        ("p", &s.production),
        ("p_max", &report.exact_p_max),
        ("s", &s.storage),
        ("c", &s.consumption),
        ("cp", &s.production_cost),
        ("cu", &s.startup_cost),
        ("cd", &s.shutdown_cost),
    ];
    for (name, table) in tables {
        let path = out_dir.join(format!("{name}.csv"));
        let mut header = vec!["k".to_owned(), "timestamp".to_owned()];
        header.extend(table.keys().map(|j| j.to_string()));
        let rows = (1..=t).map(|k| {
            let mut row = vec![k.to_string(), stamp(k)];
            row.extend(table.values().map(|v| format_value(v[k - 1])));
            row
        });
        write_csv(&path, &header, rows)?;
        written.push(path);
    }

    let path = out_dir.join("price.csv");
    let header = ["k", "timestamp", "price"].map(String::from);
    let rows = (1..=t).map(|k| {
        vec![
            k.to_string(),
            stamp(k),
            report.price[k - 1].map_or(String::new(), format_value),
        ]
    });
    write_csv(&path, &header, rows)?;
    written.push(path);

    let path = out_dir.join("slacks.csv");
    let header = ["k", "p_under", "p_over", "r_under"].map(String::from);
    let rows = (1..=t).map(|k| {
        vec![
            k.to_string(),
            format_value(s.under_production[k - 1]),
            format_value(s.over_production[k - 1]),
            format_value(s.under_reserve[k - 1]),
        ]
    });
    write_csv(&path, &header, rows)?;
    written.push(path);

    let path = out_dir.join("summary.csv");
    let header = ["component", "value"].map(String::from);
    let c = &report.cost_breakdown;
    let rows = c
        .components()
        .into_iter()
        .chain([("total", c.total()), ("objective", report.objective)])
        .map(|(name, value)| vec![name.to_owned(), format_value(value)]);
    write_csv(&path, &header, rows)?;
    written.push(path);

    Ok(written)
}
