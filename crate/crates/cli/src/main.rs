//! `uc`: validate, thin, build and solve unit commitment instances.

mod exit;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use uc_core::instance::{load_instance_with_overrides, validate, Instance, InstancePaths};
use uc_core::model::{build_model, model_stats, thin_all, MilpModel};
use uc_core::report::{format_value, write_reports, DispatchReport};
use uc_core::solve::{
    check_solution, parse_solution_file, Backend, ModelFormat, Solution, SolveError, SolveStatus,
    SolverConfig,
};
use uc_core::thin_curve;

use exit::Failure;

const CONFIG_KEYS: [&str; 7] = ["START", "T", "L", "UPP", "URP", "OPP", "STARTUP_TOL"];

#[derive(Parser)]
#[command(name = "uc", version, about = "Unit commitment toolkit")]
struct Cli {
    /// Print a JSON summary instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check an instance.
    Validate(Inputs),
    /// Print the thinned startup cost steps as CSV.
    Thin {
        #[command(flatten)]
        inputs: Inputs,
        /// Relative error tolerance; defaults to STARTUP_TOL from the config.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Write the model in MPS or LP format.
    Build {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value_t = Format::Mps)]
        format: Format,
        /// Output file; defaults to model.mps or model.lp.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and write the report tables.
    #[command(visible_alias = "run")]
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
    /// Write the report tables for a solution file produced elsewhere.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        /// Solution file with one `name value` pair per line.
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct Inputs {
    /// Directory with config.toml, units.csv, units_cu.csv and periods.csv.
    dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    units: Option<PathBuf>,
    /// Startup cost curves (j,k,CU).
    #[arg(long)]
    startup: Option<PathBuf>,
    #[arg(long)]
    periods: Option<PathBuf>,
    /// Override a config value, e.g. --set UPP=5000. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Builtin)]
    backend: BackendArg,
    /// External solver command with {model} and {solution} placeholders.
    #[arg(long, env = "UC_SOLVER_CMD")]
    solver_cmd: Option<String>,
    /// Model format handed to the external solver.
    #[arg(long, value_enum, default_value_t = Format::Mps)]
    format: Format,
    /// Largest number of binaries the builtin solver accepts.
    #[arg(long, default_value_t = uc_core::solve::DEFAULT_BINARY_BUDGET)]
    binary_budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Mps,
    Lp,
}

impl From<Format> for ModelFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Mps => ModelFormat::Mps,
            Format::Lp => ModelFormat::Lp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Builtin,
    External,
}

fn parse_override(raw: &str) -> Result<(String, String), String> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {raw:?}"))?;
    let key = key.trim().to_ascii_uppercase();
    if !CONFIG_KEYS.contains(&key.as_str()) {
        return Err(format!(
            "unknown key {key}; expected one of {}",
            CONFIG_KEYS.join(", ")
        ));
    }
    Ok((key, value.trim().to_owned()))
}

impl Inputs {
    fn paths(&self) -> Result<InstancePaths, Failure> {
        let base = self.dir.as_deref().map(InstancePaths::in_dir);
        let pick = |flag: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| {
            flag.clone().or_else(|| from_dir.cloned()).ok_or_else(|| {
                Failure::usage(format!(
                    "no {name} file given; pass a directory or --{name}"
                ))
            })
        };
        Ok(InstancePaths {
            config: pick(&self.config, base.as_ref().map(|b| &b.config), "config")?,
            units: pick(&self.units, base.as_ref().map(|b| &b.units), "units")?,
            startup: pick(&self.startup, base.as_ref().map(|b| &b.startup), "startup")?,
            periods: pick(&self.periods, base.as_ref().map(|b| &b.periods), "periods")?,
        })
    }

    fn load(&self) -> Result<Instance> {
        let paths = self.paths()?;
        Ok(load_instance_with_overrides(&paths, &self.overrides)?)
    }
}

/// Loads and validates; warnings go to stderr, errors abort.
fn load_valid(inputs: &Inputs) -> Result<Instance> {
    let instance = inputs.load()?;
    let report = validate(&instance);
    for v in report.warnings() {
        eprintln!("warning: {v}");
    }
    if report.has_errors() {
        for v in report.errors() {
            eprintln!("error: {v}");
        }
        return Err(Failure::domain(format!(
            "instance has {} validation error(s)",
            report.errors().count()
        ))
        .into());
    }
    Ok(instance)
}

fn build(instance: &Instance) -> Result<MilpModel> {
    let thinned = thin_all(instance, instance.general.startup_tol)?;
    Ok(build_model(instance, &thinned)?)
}

fn print_json(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("JSON values serialize")
    );
}

fn cmd_validate(inputs: &Inputs, json: bool) -> Result<u8> {
    let instance = inputs.load()?;
    let report = validate(&instance);
    if json {
        print_json(json!({ "valid": !report.has_errors(), "violations": report.violations }));
    } else if report.is_empty() {
        println!("no violations");
    } else {
        for v in &report.violations {
            println!("{v}");
        }
    }
    Ok(if report.has_errors() {
        exit::DOMAIN
    } else {
        exit::SUCCESS
    })
}

fn cmd_thin(inputs: &Inputs, tol: Option<f64>, json: bool) -> Result<u8> {
    let instance = inputs.load()?;
    let tol = tol.unwrap_or(instance.general.startup_tol);
    if !(0.0..=1.0).contains(&tol) {
        return Err(Failure::usage(format!("--tol must lie in [0, 1], got {tol}")).into());
    }
    let mut curves = Vec::new();
    for unit in instance.sorted_units() {
        let empty = uc_core::instance::StartupCostCurve::new(unit.id);
        curves.push(thin_curve(
            instance.startup_curve(unit.id).unwrap_or(&empty),
            tol,
        )?);
    }
    if json {
        print_json(json!({ "tol": tol, "curves": curves }));
    } else {
        println!("unit_id,t_a,t_b,step");
        for curve in &curves {
            for g in &curve.groups {
                println!(
                    "{},{},{},{}",
                    curve.unit_id,
                    g.start,
                    g.end,
                    format_value(g.step)
                );
            }
        }
    }
    Ok(exit::SUCCESS)
}

fn cmd_build(inputs: &Inputs, format: Format, out: Option<PathBuf>, json: bool) -> Result<u8> {
    let instance = load_valid(inputs)?;
    let model = build(&instance)?;
    let format = ModelFormat::from(format);
    let out = out.unwrap_or_else(|| PathBuf::from(format!("model.{}", format.extension())));
    fs::write(&out, format.write(&model))
        .with_context(|| format!("cannot write {}", out.display()))?;
    let stats = model_stats(&model);
    if json {
        print_json(json!({ "path": out, "stats": stats }));
    } else {
        print!("{stats}");
        println!("wrote {}", out.display());
    }
    Ok(exit::SUCCESS)
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig, Failure> {
    let mut config = SolverConfig {
        binary_budget: args.binary_budget,
        model_format: args.format.into(),
        ..SolverConfig::default()
    };
    if args.backend == BackendArg::External {
        let cmd = args
            .solver_cmd
            .clone()
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| {
                Failure::usage("--backend external needs --solver-cmd or UC_SOLVER_CMD")
            })?;
        config.backend = Backend::External;
        config.command_template = Some(cmd);
    }
    config.check().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(config)
}

fn solve_error(err: SolveError) -> anyhow::Error {
    match err {
        SolveError::TooManyBinaries { .. } => Failure::solver(format!(
            "{err}\nhint: use --backend external --solver-cmd '<solver> {{model}} {{solution}}' for larger models"
        ))
        .into(),
        other => other.into(),
    }
}

fn finish(
    instance: &Instance,
    model: &MilpModel,
    solution: &Solution,
    out_dir: &Path,
    json: bool,
) -> Result<u8> {
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            return Err(Failure::domain(format!("model is {}", solution.status)).into());
        }
        status => {
            return Err(Failure::solver(format!("solver stopped with status {status}")).into())
        }
    }
    let report = DispatchReport::new(instance, model, solution)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let files = write_reports(instance, &report, out_dir)?;
    if json {
        print_json(json!({
            "status": solution.status.to_string(),
            "backend": solution.backend,
            "objective": report.objective,
            "wall_time_s": solution.wall_time.as_secs_f64(),
            "cost_breakdown": report.cost_breakdown,
            "files": files,
        }));
    } else {
        println!("status: {} ({})", solution.status, solution.backend);
        println!("objective: {}", format_value(report.objective));
        for (name, value) in report.cost_breakdown.components() {
            println!("  {name}: {}", format_value(value));
        }
        println!("reports written to {}", out_dir.display());
    }
    Ok(exit::SUCCESS)
}

fn cmd_solve(inputs: &Inputs, args: &SolverArgs, out_dir: &Path, json: bool) -> Result<u8> {
    let config = solver_config(args)?;
    let instance = load_valid(inputs)?;
    let model = build(&instance)?;
    let solution = uc_core::solve(&model, &config).map_err(solve_error)?;
    finish(&instance, &model, &solution, out_dir, json)
}

fn cmd_report(inputs: &Inputs, solution_path: &Path, out_dir: &Path, json: bool) -> Result<u8> {
    let instance = load_valid(inputs)?;
    let model = build(&instance)?;
    let text = fs::read_to_string(solution_path)
        .with_context(|| format!("cannot read {}", solution_path.display()))?;
    let parsed = parse_solution_file(&text, &model)?;
    if parsed.warnings() > 0 {
        eprintln!(
            "warning: {} missing and {} unknown column(s) in the solution file",
            parsed.missing.len(),
            parsed.unknown.len()
        );
    }
    let residuals = check_solution(&model, &parsed.values);
    if !residuals.passes(uc_core::solve::DEFAULT_TOLERANCE) {
        return Err(SolveError::ResidualCheckFailed(Box::new(residuals)).into());
    }
    let solution = Solution {
        objective: model.objective_value(&parsed.values),
        values: parsed.values,
        status: SolveStatus::Optimal,
        backend: "file".into(),
        wall_time: Default::default(),
    };
    finish(&instance, &model, &solution, out_dir, json)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate(inputs) => cmd_validate(inputs, cli.json),
        Command::Thin { inputs, tol } => cmd_thin(inputs, *tol, cli.json),
        Command::Build {
            inputs,
            format,
            out,
        } => cmd_build(inputs, *format, out.clone(), cli.json),
        Command::Solve {
            inputs,
            solver,
            out_dir,
        } => cmd_solve(inputs, solver, out_dir, cli.json),
        Command::Report {
            inputs,
            solution,
            out_dir,
        } => cmd_report(inputs, solution, out_dir, cli.json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_of(&err))
        }
    }
}
