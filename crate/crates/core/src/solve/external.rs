use std::collections::HashMap;
use std::fs;
use std::process::Command;
use std::time::Instant;

use log::warn;

use super::{check_solution, Solution, SolveError, SolveStatus, SolverConfig};
use crate::model::MilpModel;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedSolution {
    /// One value per model column.
    pub values: Vec<f64>,
    /// Columns absent from the file, set to 0.
    pub missing: Vec<String>,
    /// Names in the file that match no column; ignored.
    pub unknown: Vec<String>,
}

impl ParsedSolution {
    pub fn warnings(&self) -> usize {
        self.missing.len() + self.unknown.len()
    }
}

fn parse_value(text: &str, line: usize) -> Result<f64, SolveError> {
    text.parse::<f64>().map_err(|_| {
        SolveError::UnparsableSolution(format!("line {line}: `{text}` is not a number"))
    })
}

/// Reads `name value` lines. Two other common shapes are accepted too:
/// `name=value`, and indexed rows `index name value ...` where extra
/// columns are ignored. Blank lines and lines starting with `#` are skipped.
pub fn parse_solution_file(text: &str, model: &MilpModel) -> Result<ParsedSolution, SolveError> {
    let columns: HashMap<String, usize> = model
        .variables()
        .iter()
        .map(|v| (v.name(), v.column))
        .collect();
    let mut values: Vec<Option<f64>> = vec![None; model.num_columns()];
    let mut unknown = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = if let Some((name, value)) = line.split_once('=') {
            (name.trim(), parse_value(value.trim(), line_no)?)
        } else {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                [name, value] => (*name, parse_value(value, line_no)?),
                [index, name, value, ..] if index.parse::<u64>().is_ok() => {
                    (*name, parse_value(value, line_no)?)
                }
                _ => {
                    return Err(SolveError::UnparsableSolution(format!(
                        "line {line_no}: expected `name value`, got `{line}`"
                    )))
                }
            }
        };
        match columns.get(name) {
            Some(&col) => values[col] = Some(value),
            None => {
                warn!("solution names unknown column {name}");
                unknown.push(name.to_owned());
            }
        }
    }

    let mut missing = Vec::new();
    let values = values
        .into_iter()
        .zip(model.variables())
        .map(|(v, var)| {
            v.unwrap_or_else(|| {
                missing.push(var.name());
                0.0
            })
        })
        .collect();
    if !missing.is_empty() {
        warn!(
            "{} columns missing from the solution, set to 0",
            missing.len()
        );
    }
    Ok(ParsedSolution {
        values,
        missing,
        unknown,
    })
}

/// Writes the model to a temporary directory, runs the configured command
/// and reads back the solution, which must pass the residual check.
pub fn solve_external(model: &MilpModel, config: &SolverConfig) -> Result<Solution, SolveError> {
    config.check()?;
    let template = config
        .command_template
        .as_deref()
        .ok_or(SolveError::MissingSolverCommand)?;
    let started = Instant::now();

    let dir = tempfile::tempdir().map_err(|source| SolveError::Io {
        path: "temporary directory".into(),
        source,
    })?;
    let model_path = dir
        .path()
        .join(format!("model.{}", config.model_format.extension()));
    let solution_path = dir.path().join("solution.txt");
    fs::write(&model_path, config.model_format.write(model)).map_err(|source| SolveError::Io {
        path: model_path.display().to_string(),
        source,
    })?;

    let words = shell_words::split(template)
        .map_err(|e| SolveError::InvalidConfig(format!("cannot split solver command: {e}")))?;
    let model_arg = model_path.to_string_lossy();
    let solution_arg = solution_path.to_string_lossy();
    let args: Vec<String> = words
        .iter()
        .map(|w| {
            w.replace("{model}", &model_arg)
                .replace("{solution}", &solution_arg)
        })
        .collect();
    let (program, rest) = args
        .split_first()
        .ok_or_else(|| SolveError::InvalidConfig("empty solver command".into()))?;

    let output = Command::new(program)
        .args(rest)
        .output()
        .map_err(|source| SolveError::SolverLaunchFailed {
            command: program.clone(),
            source,
        })?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        let tail: String = stderr
            .trim()
            .chars()
            .rev()
            .take(2000)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        return Err(SolveError::SolverNonZeroExit {
            code: output.status.code(),
            stderr: tail,
        });
    }

    let text = fs::read_to_string(&solution_path)
        .map_err(|e| SolveError::UnparsableSolution(format!("cannot read solution file: {e}")))?;
    let parsed = parse_solution_file(&text, model)?;
    let report = check_solution(model, &parsed.values);
    if !report.passes(config.tolerance) {
        return Err(SolveError::ResidualCheckFailed(Box::new(report)));
    }
    let objective = model.objective_value(&parsed.values);
    let name = std::path::Path::new(program)
        .file_name()
        .map_or(program.clone(), |n| n.to_string_lossy().into_owned());
    Ok(Solution {
        values: parsed.values,
        objective,
        status: SolveStatus::Optimal,
        backend: format!("external:{name}"),
        wall_time: started.elapsed(),
    })
}
