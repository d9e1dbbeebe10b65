use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use uc_core::fixtures::single_unit;
use uc_core::instance::{write_instance, Instance, StartupCostCurve};

fn uc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uc"))
        .args(args)
        .env_remove("UC_SOLVER_CMD")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn instance_dir(instance: &Instance) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_instance(instance, dir.path()).unwrap();
    dir
}

fn path(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn highs_command() -> String {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py");
    format!("python3 '{}' {{model}} {{solution}}", script.display())
}

#[test]
fn validate_clean_fixture() {
    let dir = instance_dir(&single_unit());
    let out = uc(&["validate", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "no violations");

    let out = uc(&["--json", "validate", path(dir.path())]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn validate_impossible_limits() {
    let mut instance = single_unit();
    instance.units[0].p_min = 250.0;
    instance.units[0].startup_ramp = 300.0;
    instance.units[0].shutdown_ramp = 300.0;
    let dir = instance_dir(&instance);
    let out = uc(&["validate", path(dir.path())]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.contains("Impossible production limits!"));
}

#[test]
fn validate_missing_file() {
    let dir = instance_dir(&single_unit());
    fs::remove_file(dir.path().join("units.csv")).unwrap();
    let out = uc(&["validate", path(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("units.csv"));
}

#[test]
fn explicit_file_flags_and_overrides() {
    let dir = instance_dir(&single_unit());
    let file = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let out = uc(&[
        "validate",
        "--config",
        &file("config.toml"),
        "--units",
        &file("units.csv"),
        "--startup",
        &file("units_cu.csv"),
        "--periods",
        &file("periods.csv"),
        "--set",
        "UPP=20000",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = uc(&["validate", "--units", &file("units.csv")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&uc(&[])), 2);
    assert_eq!(code(&uc(&["frobnicate"])), 2);
    let dir = instance_dir(&single_unit());
    assert_eq!(code(&uc(&["validate", path(dir.path()), "--bogus"])), 2);
    assert_eq!(
        code(&uc(&["validate", path(dir.path()), "--set", "NOPE=1"])),
        2
    );
    assert_eq!(
        code(&uc(&["validate", path(dir.path()), "--set", "UPP"])),
        2
    );
}

fn curve_instance(values: &[f64]) -> Instance {
    let mut instance = single_unit();
    let mut second = instance.units[0].clone();
    second.id = 2;
    instance.units.push(second);
    for id in [1, 2] {
        instance
            .startup_curves
            .insert(id, StartupCostCurve::from_values(id, values));
    }
    instance
}

#[test]
fn thin_constant_curve() {
    let dir = instance_dir(&curve_instance(&[300.0; 6]));
    let out = uc(&["thin", path(dir.path()), "--tol", "0.05"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "unit_id,t_a,t_b,step\n1,1,6,300\n2,1,6,300\n");
}

#[test]
fn thin_zero_tolerance_keeps_every_point() {
    let dir = instance_dir(&curve_instance(&[100.0, 101.0, 102.0, 103.0]));
    let out = uc(&["thin", path(dir.path()), "--tol", "0"]);
    assert_eq!(code(&out), 0);
    let rows: Vec<String> = stdout(&out).lines().skip(1).map(str::to_owned).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], "1,1,1,100");
    assert_eq!(rows[3], "1,4,4,103");

    // Without --tol the config value (0.05) applies.
    let out = uc(&["thin", path(dir.path())]);
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn thin_rejects_bad_tolerance() {
    let dir = instance_dir(&single_unit());
    assert_eq!(code(&uc(&["thin", path(dir.path()), "--tol", "1.5"])), 2);
    assert_eq!(code(&uc(&["thin", path(dir.path()), "--tol", "-0.1"])), 2);
}

#[test]
fn thin_non_monotone_curve() {
    let dir = instance_dir(&curve_instance(&[500.0, 400.0]));
    let out = uc(&["thin", path(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("decrease"));
}

#[test]
fn build_writes_both_formats() {
    let dir = instance_dir(&single_unit());
    for (format, head) in [("mps", "NAME"), ("lp", "Minimize")] {
        let out_file = dir.path().join(format!("out.{format}"));
        let out = uc(&[
            "build",
            path(dir.path()),
            "--format",
            format,
            "--out",
            out_file.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(fs::read_to_string(&out_file).unwrap().starts_with(head));
        assert!(stdout(&out).contains("2 binary"));
    }
}

#[test]
fn build_rejects_invalid_instance() {
    let mut instance = single_unit();
    instance.units[0].p_min = 250.0;
    let dir = instance_dir(&instance);
    let out_file = dir.path().join("model.mps");
    let out = uc(&[
        "build",
        path(dir.path()),
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("Impossible production limits!"));
    assert!(!out_file.exists());
}

#[test]
fn build_into_missing_directory() {
    let dir = instance_dir(&single_unit());
    let out_file = dir.path().join("nope/model.mps");
    assert_eq!(
        code(&uc(&[
            "build",
            path(dir.path()),
            "--out",
            out_file.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn solve_fixture_builtin() {
    let dir = instance_dir(&single_unit());
    let out_dir = dir.path().join("results");
    let out = uc(&[
        "solve",
        path(dir.path()),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("objective: 2700\n"));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.ends_with("objective,2700\n"));

    let out = uc(&[
        "--json",
        "run",
        path(dir.path()),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["objective"], 2700.0);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["files"].as_array().unwrap().len(), 11);
}

#[test]
fn solve_is_reproducible() {
    let dir = instance_dir(&single_unit());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        assert_eq!(
            code(&uc(&[
                "solve",
                path(dir.path()),
                "--out-dir",
                out_dir.to_str().unwrap()
            ])),
            0
        );
    }
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn over_capacity_demand_is_penalised() {
    let mut instance = single_unit();
    instance.periods.demand = vec![100.0, 250.0];
    let dir = instance_dir(&instance);
    let out_dir = dir.path().join("results");
    let out = uc(&[
        "solve",
        path(dir.path()),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // 50 MW short in period 2 at 10^4 per MW.
    assert!(
        stdout(&out).contains("under_production_penalty: 500000\n"),
        "{}",
        stdout(&out)
    );
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.contains("under_production_penalty,500000\n"));
}

#[test]
fn external_backend_needs_a_command() {
    let dir = instance_dir(&single_unit());
    let out = uc(&["solve", path(dir.path()), "--backend", "external"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--solver-cmd"));
}

#[test]
fn external_backend_with_highs() {
    let dir = instance_dir(&single_unit());
    let out_dir = dir.path().join("results");
    for format in ["mps", "lp"] {
        let out = uc(&[
            "solve",
            path(dir.path()),
            "--backend",
            "external",
            "--solver-cmd",
            &highs_command(),
            "--format",
            format,
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(
            stdout(&out).contains("objective: 2700\n"),
            "{}",
            stdout(&out)
        );
    }
}

#[test]
fn solver_command_from_environment() {
    let dir = instance_dir(&single_unit());
    let out = Command::new(env!("CARGO_BIN_EXE_uc"))
        .args([
            "solve",
            path(dir.path()),
            "--backend",
            "external",
            "--out-dir",
        ])
        .arg(dir.path().join("results"))
        .env("UC_SOLVER_CMD", highs_command())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn solver_failures_exit_3() {
    let dir = instance_dir(&single_unit());
    let out_dir = dir.path().join("results");
    let run = |cmd: &str| {
        uc(&[
            "solve",
            path(dir.path()),
            "--backend",
            "external",
            "--solver-cmd",
            cmd,
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
    };
    assert_eq!(code(&run("/nonexistent/solver {model} {solution}")), 3);
    assert_eq!(code(&run("sh -c 'exit 4'")), 3);
    assert_eq!(code(&run("sh -c 'exit 0'")), 3);
}

#[test]
fn too_many_binaries_suggests_external_backend() {
    let dir = instance_dir(&single_unit());
    let out = uc(&["solve", path(dir.path()), "--binary-budget", "1"]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("--backend external"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn report_from_solution_file() {
    let dir = instance_dir(&single_unit());
    let solution = dir.path().join("solution.txt");
    fs::write(
        &solution,
        "v_1_1 1\nv_1_2 1\np_1_1 100\np_1_2 150\npmax_1_1 200\npmax_1_2 200\ncp_1_1 1100\ncp_1_2 1600\n",
    )
    .unwrap();
    let out_dir = dir.path().join("results");
    let out = uc(&[
        "report",
        path(dir.path()),
        "--solution",
        solution.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("objective: 2700\n"));
    assert!(out_dir.join("price.csv").exists());

    fs::write(&solution, "v_1_1 1\n").unwrap();
    let out = uc(&[
        "report",
        path(dir.path()),
        "--solution",
        solution.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);

    let missing = dir.path().join("none.txt");
    assert_eq!(
        code(&uc(&[
            "report",
            path(dir.path()),
            "--solution",
            missing.to_str().unwrap()
        ])),
        2
    );
}
