//! CSV/TOML ingestion and write-back of instances.
//!
//! File layout:
//!
//! * config (TOML): `START`, `T`, `L`, `UPP`, `URP`, `OPP`, `STARTUP_TOL`
//! * units: `j,UT,DT,IUT,IDT,P_min,P_max,RU,RD,SU,SD,SC,SE,SIF,SI,SF,F,FA,FB,PA,PB,CD`
//! * startup costs: `j,k,CU` where `k` is the offline time in periods
//! * periods: `t,D,R,FC_<fuel>...` with `t` formatted as `YYYY-MM-DD HH:MM:SS`

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use thiserror::Error;

use super::{GeneralConfig, Instance, PeriodSeries, StartupCostCurve, UnitId, UnitSpec};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

pub const UNIT_COLUMNS: [&str; 22] = [
    "j", "UT", "DT", "IUT", "IDT", "P_min", "P_max", "RU", "RD", "SU", "SD", "SC", "SE", "SIF",
    "SI", "SF", "F", "FA", "FB", "PA", "PB", "CD",
];
pub const STARTUP_COLUMNS: [&str; 3] = ["j", "k", "CU"];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("config key {key} is missing")]
    MissingConfigKey { key: &'static str },
    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}:{line}: column {column}: cannot parse {value:?} as a number")]
    MalformedNumber {
        path: PathBuf,
        line: u64,
        column: String,
        value: String,
    },
    #[error("{path}:{line}: cannot parse timestamp {value:?} (expected YYYY-MM-DD HH:MM:SS)")]
    MalformedTimestamp {
        path: PathBuf,
        line: u64,
        value: String,
    },
    #[error("unit {unit} uses fuel {fuel:?} but the periods file has no FC_{fuel} column")]
    UnknownFuelReference { unit: UnitId, fuel: String },
    #[error("unit {unit} is defined twice")]
    DuplicateUnit { unit: UnitId },
    #[error("startup cost for unknown unit {unit}")]
    UnknownUnit { unit: UnitId },
    #[error("startup cost of unit {unit} at offline time {offline} is defined twice")]
    DuplicateStartupCost { unit: UnitId, offline: u32 },
    #[error("startup cost of unit {unit}: offline time {offline} is not positive")]
    InvalidOfflineTime { unit: UnitId, offline: i64 },
    #[error("two rows map to period {period}")]
    DuplicatePeriod { period: usize },
    #[error("no row maps to period {period}")]
    MissingPeriod { period: usize },
}

/// Locations of the four input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePaths {
    pub config: PathBuf,
    pub units: PathBuf,
    pub startup: PathBuf,
    pub periods: PathBuf,
}

impl InstancePaths {
    /// The conventional file names inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        InstancePaths {
            config: dir.join("config.toml"),
            units: dir.join("units.csv"),
            startup: dir.join("units_cu.csv"),
            periods: dir.join("periods.csv"),
        }
    }
}

/// Maps a period timestamp to its 1-based index.
///
/// Elapsed hours get a 0.1 h guard before flooring so that timestamps a few
/// seconds early still land in their period.
pub fn period_index(timestamp: NaiveDateTime, start: NaiveDateTime, period_length: f64) -> i64 {
    let elapsed_days = (timestamp - start).num_milliseconds() as f64 / 86_400_000.0;
    ((elapsed_days * 24.0 + 0.1) / period_length).floor() as i64 + 1
}

pub fn load_instance(paths: &InstancePaths) -> Result<Instance, LoadError> {
    load_instance_with_overrides(paths, &[])
}

/// Loads an instance, replacing config values by `overrides` (`KEY`, `VALUE`
/// pairs) before the period data is mapped.
pub fn load_instance_with_overrides(
    paths: &InstancePaths,
    overrides: &[(String, String)],
) -> Result<Instance, LoadError> {
    let general = read_config(&paths.config, overrides)?;
    let units = read_units(&paths.units)?;
    let startup_curves = read_startup_costs(&paths.startup, &units)?;
    let fuels: BTreeSet<&str> = units.iter().map(|u| u.fuel.as_str()).collect();
    let periods = read_periods(&paths.periods, &general, &fuels, &units)?;
    Ok(Instance {
        general,
        periods,
        units,
        startup_curves,
    })
}

fn read_to_string(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

fn override_value(raw: &str) -> toml::Value {
    if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(raw.to_owned())
    }
}

fn read_config(path: &Path, overrides: &[(String, String)]) -> Result<GeneralConfig, LoadError> {
    let text = read_to_string(path)?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LoadError::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
    for (key, value) in overrides {
        table.insert(key.clone(), override_value(value));
    }
    let bad = |key: &str, what: &str| LoadError::Config {
        path: path.to_owned(),
        message: format!("{key} must be {what}"),
    };
    let number = |key: &'static str| -> Result<Option<f64>, LoadError> {
        match table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(_) => Err(bad(key, "a number")),
        }
    };
    let required = |key: &'static str| number(key)?.ok_or(LoadError::MissingConfigKey { key });

    let start = match table.get("START") {
        None => return Err(LoadError::MissingConfigKey { key: "START" }),
        Some(toml::Value::String(s)) => {
            NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT)
                .map_err(|_| bad("START", "a timestamp formatted YYYY-MM-DD HH:MM:SS"))?
        }
        Some(_) => return Err(bad("START", "a string")),
    };
    let num_periods = match table.get("T") {
        None => return Err(LoadError::MissingConfigKey { key: "T" }),
        Some(toml::Value::Integer(t)) if *t >= 0 => *t as usize,
        Some(_) => return Err(bad("T", "a non-negative integer")),
    };
    Ok(GeneralConfig {
        period_length: required("L")?,
        num_periods,
        start,
        under_production_penalty: required("UPP")?,
        under_reserve_penalty: required("URP")?,
        over_production_penalty: required("OPP")?,
        startup_tol: number("STARTUP_TOL")?.unwrap_or(GeneralConfig::DEFAULT_STARTUP_TOL),
    })
}

/// A CSV file whose columns are addressed by header name.
struct Table {
    path: PathBuf,
    headers: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, LoadError> {
        let csv_err = |source| LoadError::Csv {
            path: path.to_owned(),
            source,
        };
        let file = fs::File::open(path).map_err(|source| LoadError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_owned)
            .collect();
        let records = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(csv_err)?;
        Ok(Table {
            path: path.to_owned(),
            headers,
            records,
        })
    }

    fn column(&self, name: &str) -> Result<usize, LoadError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LoadError::MissingColumn {
                path: self.path.clone(),
                column: name.to_owned(),
            })
    }

    fn line(record: &csv::StringRecord) -> u64 {
        record.position().map_or(0, |p| p.line())
    }

    fn text<'r>(&self, record: &'r csv::StringRecord, col: usize) -> &'r str {
        record.get(col).unwrap_or("")
    }

    fn real(&self, record: &csv::StringRecord, col: usize) -> Result<f64, LoadError> {
        let raw = self.text(record, col);
        raw.parse::<f64>()
            .map_err(|_| self.malformed(record, col, raw))
    }

    /// Integers may be written as reals with zero fraction (spreadsheet exports).
    fn integer(&self, record: &csv::StringRecord, col: usize) -> Result<i64, LoadError> {
        let raw = self.text(record, col);
        if let Ok(i) = raw.parse::<i64>() {
            return Ok(i);
        }
        match raw.parse::<f64>() {
            Ok(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
            _ => Err(self.malformed(record, col, raw)),
        }
    }

    fn unit_id(&self, record: &csv::StringRecord, col: usize) -> Result<UnitId, LoadError> {
        let raw = self.text(record, col);
        let id = self.integer(record, col)?;
        UnitId::try_from(id).map_err(|_| self.malformed(record, col, raw))
    }

    fn malformed(&self, record: &csv::StringRecord, col: usize, raw: &str) -> LoadError {
        LoadError::MalformedNumber {
            path: self.path.clone(),
            line: Self::line(record),
            column: self.headers.get(col).cloned().unwrap_or_default(),
            value: raw.to_owned(),
        }
    }
}

fn read_units(path: &Path) -> Result<Vec<UnitSpec>, LoadError> {
    let table = Table::read(path)?;
    let mut cols = [0usize; UNIT_COLUMNS.len()];
    for (slot, name) in cols.iter_mut().zip(UNIT_COLUMNS) {
        *slot = table.column(name)?;
    }
    let [j, ut, dt, iut, idt, p_min, p_max, ru, rd, su, sd, sc, se, sif, si, sf, fuel, fa, fb, pa, pb, cd] =
        cols;

    let mut seen = BTreeSet::new();
    let mut units = Vec::with_capacity(table.records.len());
    for rec in &table.records {
        let id = table.unit_id(rec, j)?;
        if !seen.insert(id) {
            return Err(LoadError::DuplicateUnit { unit: id });
        }
        units.push(UnitSpec {
            id,
            min_uptime: table.integer(rec, ut)?,
            min_downtime: table.integer(rec, dt)?,
            initial_uptime: table.integer(rec, iut)?,
            initial_downtime: table.integer(rec, idt)?,
            p_min: table.real(rec, p_min)?,
            p_max: table.real(rec, p_max)?,
            ramp_up: table.real(rec, ru)?,
            ramp_down: table.real(rec, rd)?,
            startup_ramp: table.real(rec, su)?,
            shutdown_ramp: table.real(rec, sd)?,
            storage_capacity: table.real(rec, sc)?,
            storage_efficiency: table.real(rec, se)?,
            storage_inflow: table.real(rec, sif)?,
            initial_storage: table.real(rec, si)?,
            final_storage: table.real(rec, sf)?,
            fuel: table.text(rec, fuel).to_owned(),
            var_fuel: table.real(rec, fa)?,
            fixed_fuel: table.real(rec, fb)?,
            var_cost: table.real(rec, pa)?,
            fixed_cost: table.real(rec, pb)?,
            shutdown_cost: table.real(rec, cd)?,
        });
    }
    Ok(units)
}

fn read_startup_costs(
    path: &Path,
    units: &[UnitSpec],
) -> Result<BTreeMap<UnitId, StartupCostCurve>, LoadError> {
    let table = Table::read(path)?;
    let [j, k, cu] = STARTUP_COLUMNS.map(|name| table.column(name));
    let (j, k, cu) = (j?, k?, cu?);

    let mut curves: BTreeMap<UnitId, StartupCostCurve> = units
        .iter()
        .map(|u| (u.id, StartupCostCurve::new(u.id)))
        .collect();
    for rec in &table.records {
        let unit = table.unit_id(rec, j)?;
        let offline = table.integer(rec, k)?;
        let cost = table.real(rec, cu)?;
        let curve = curves
            .get_mut(&unit)
            .ok_or(LoadError::UnknownUnit { unit })?;
        let offline = u32::try_from(offline)
            .ok()
            .filter(|&t| t >= 1)
            .ok_or(LoadError::InvalidOfflineTime { unit, offline })?;
        if curve.costs.insert(offline, cost).is_some() {
            return Err(LoadError::DuplicateStartupCost { unit, offline });
        }
    }
    Ok(curves)
}

fn read_periods(
    path: &Path,
    general: &GeneralConfig,
    fuels: &BTreeSet<&str>,
    units: &[UnitSpec],
) -> Result<PeriodSeries, LoadError> {
    let table = Table::read(path)?;
    let t_col = table.column("t")?;
    let d_col = table.column("D")?;
    let r_col = table.column("R")?;
    let mut fuel_cols = Vec::with_capacity(fuels.len());
    for &fuel in fuels {
        let col = table.column(&format!("FC_{fuel}")).map_err(|_| {
            let unit = units.iter().find(|u| u.fuel == fuel).map_or(0, |u| u.id);
            LoadError::UnknownFuelReference {
                unit,
                fuel: fuel.to_owned(),
            }
        })?;
        fuel_cols.push((fuel, col));
    }

    let n = general.num_periods;
    let mut rows: Vec<Option<&csv::StringRecord>> = vec![None; n];
    for rec in &table.records {
        let raw = table.text(rec, t_col);
        let ts = NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT).map_err(|_| {
            LoadError::MalformedTimestamp {
                path: path.to_owned(),
                line: Table::line(rec),
                value: raw.to_owned(),
            }
        })?;
        let k = period_index(ts, general.start, general.period_length);
        if k < 1 || k > n as i64 {
            continue;
        }
        let slot = &mut rows[k as usize - 1];
        if slot.is_some() {
            return Err(LoadError::DuplicatePeriod { period: k as usize });
        }
        *slot = Some(rec);
    }

    let mut series = PeriodSeries {
        demand: Vec::with_capacity(n),
        reserve: Vec::with_capacity(n),
        fuel_cost: fuel_cols
            .iter()
            .map(|&(f, _)| (f.to_owned(), Vec::with_capacity(n)))
            .collect(),
    };
    for (i, row) in rows.iter().enumerate() {
        let rec = row.ok_or(LoadError::MissingPeriod { period: i + 1 })?;
        series.demand.push(table.real(rec, d_col)?);
        series.reserve.push(table.real(rec, r_col)?);
        for &(fuel, col) in &fuel_cols {
            let price = table.real(rec, col)?;
            series
                .fuel_cost
                .get_mut(fuel)
                .expect("fuel series allocated above")
                .push(price);
        }
    }
    Ok(series)
}

/// Writes `instance` into `dir` using the conventional file names.
pub fn write_instance(instance: &Instance, dir: &Path) -> Result<InstancePaths, LoadError> {
    let paths = InstancePaths::in_dir(dir);
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| LoadError::Io { path, source }
    };
    let csv_err = |path: &Path| {
        let path = path.to_owned();
        move |source| LoadError::Csv { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let g = &instance.general;
    let mut config = toml::Table::new();
    config.insert(
        "START".into(),
        g.start.format(TIMESTAMP_FORMAT).to_string().into(),
    );
    config.insert("T".into(), (g.num_periods as i64).into());
    config.insert("L".into(), g.period_length.into());
    config.insert("UPP".into(), g.under_production_penalty.into());
    config.insert("URP".into(), g.under_reserve_penalty.into());
    config.insert("OPP".into(), g.over_production_penalty.into());
    config.insert("STARTUP_TOL".into(), g.startup_tol.into());
    let text = toml::to_string(&config).map_err(|e| LoadError::Config {
        path: paths.config.clone(),
        message: e.to_string(),
    })?;
    fs::write(&paths.config, text).map_err(io_err(&paths.config))?;

    let mut w = csv::Writer::from_path(&paths.units).map_err(csv_err(&paths.units))?;
    w.write_record(UNIT_COLUMNS)
        .map_err(csv_err(&paths.units))?;
    for u in &instance.units {
        let reals = [
            u.p_min,
            u.p_max,
            u.ramp_up,
            u.ramp_down,
            u.startup_ramp,
            u.shutdown_ramp,
            u.storage_capacity,
            u.storage_efficiency,
            u.storage_inflow,
            u.initial_storage,
            u.final_storage,
        ];
        let mut row: Vec<String> = vec![
            u.id.to_string(),
            u.min_uptime.to_string(),
            u.min_downtime.to_string(),
            u.initial_uptime.to_string(),
            u.initial_downtime.to_string(),
        ];
        row.extend(reals.iter().map(f64::to_string));
        row.push(u.fuel.clone());
        row.extend(
            [
                u.var_fuel,
                u.fixed_fuel,
                u.var_cost,
                u.fixed_cost,
                u.shutdown_cost,
            ]
            .iter()
            .map(f64::to_string),
        );
        w.write_record(&row).map_err(csv_err(&paths.units))?;
    }
    w.flush().map_err(io_err(&paths.units))?;

    let mut w = csv::Writer::from_path(&paths.startup).map_err(csv_err(&paths.startup))?;
    w.write_record(STARTUP_COLUMNS)
        .map_err(csv_err(&paths.startup))?;
    for curve in instance.startup_curves.values() {
        for (t, cost) in &curve.costs {
            w.write_record([curve.unit_id.to_string(), t.to_string(), cost.to_string()])
                .map_err(csv_err(&paths.startup))?;
        }
    }
    w.flush().map_err(io_err(&paths.startup))?;

    let mut w = csv::Writer::from_path(&paths.periods).map_err(csv_err(&paths.periods))?;
    let mut header = vec!["t".to_owned(), "D".to_owned(), "R".to_owned()];
    header.extend(instance.periods.fuel_cost.keys().map(|f| format!("FC_{f}")));
    w.write_record(&header).map_err(csv_err(&paths.periods))?;
    for k in 1..=g.num_periods {
        let mut row = vec![
            g.period_start(k).format(TIMESTAMP_FORMAT).to_string(),
            instance
                .periods
                .demand
                .get(k - 1)
                .copied()
                .unwrap_or(0.0)
                .to_string(),
            instance
                .periods
                .reserve
                .get(k - 1)
                .copied()
                .unwrap_or(0.0)
                .to_string(),
        ];
        row.extend(
            instance
                .periods
                .fuel_cost
                .values()
                .map(|s| s.get(k - 1).copied().unwrap_or(0.0).to_string()),
        );
        w.write_record(&row).map_err(csv_err(&paths.periods))?;
    }
    w.flush().map_err(io_err(&paths.periods))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).unwrap()
    }

    #[test]
    fn period_index_examples() {
        let start = ts("2009-05-11 00:00:00");
        assert_eq!(period_index(ts("2009-05-11 00:00:00"), start, 1.0), 1);
        assert_eq!(period_index(ts("2009-05-11 05:00:00"), start, 1.0), 6);
        assert_eq!(period_index(ts("2009-05-12 00:00:00"), start, 24.0), 2);
    }

    #[test]
    fn period_index_tolerates_early_timestamps() {
        let start = ts("2009-05-11 00:00:00");
        // 4:59:00 is within the 0.1 h guard of period 6.
        assert_eq!(period_index(ts("2009-05-11 04:59:00"), start, 1.0), 6);
        assert_eq!(period_index(ts("2009-05-11 04:50:00"), start, 1.0), 5);
        assert!(period_index(ts("2009-05-10 23:00:00"), start, 1.0) < 1);
    }

    #[test]
    fn overrides_are_typed() {
        assert_eq!(override_value("24"), toml::Value::Integer(24));
        assert_eq!(override_value("0.5"), toml::Value::Float(0.5));
        assert_eq!(
            override_value("2009-05-11 00:00:00"),
            toml::Value::String("2009-05-11 00:00:00".into())
        );
    }
}
