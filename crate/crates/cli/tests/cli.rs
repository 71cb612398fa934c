//! End-to-end tests of the binary: every subcommand, exit-code contract,
//! determinism and round-trips of the emitted files.

use std::path::Path;
use std::process::{Command, Output};

use growth_cycles::data::{read_numeric_table, read_trajectory_points, read_year_records};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_growth-cycles"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sample_then_fit_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    let report = dir.path().join("report.json");
    let curve = dir.path().join("curve.csv");
    assert_success(&run(&[
        "sample", "--b", "0.34", "--x-t", "7.5", "--alpha", "2.8", "--count", "200000", "--seed",
        "7", "--output", samples.to_str().unwrap(),
    ]));
    assert_success(&run(&[
        "fit-gpd",
        "--input",
        samples.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let fit = &parsed["fit"];
    assert!(fit["converged"].as_bool().unwrap());
    let b = fit["b"].as_f64().unwrap();
    let alpha = fit["alpha"].as_f64().unwrap();
    let x_t = fit["x_t"].as_f64().unwrap();
    assert!((b - 0.34).abs() / 0.34 < 0.05, "B {b}");
    assert!((alpha - 2.8).abs() / 2.8 < 0.05, "alpha {alpha}");
    assert!((x_t - 7.5).abs() / 7.5 < 0.10, "x_t {x_t}");
    // Curve export parses and has both distribution columns.
    let (header, rows) = read_numeric_table(&curve).unwrap();
    assert_eq!(header, vec!["x", "empirical_F", "fitted_F"]);
    assert!(rows.len() > 1000);
}

#[test]
fn fit_gpd_distinguishes_input_error_from_fit_failure() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "fit-gpd",
        "--input",
        empty.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "empty input is a usage error");

    let missing = dir.path().join("nope.csv");
    let out = run(&[
        "fit-gpd",
        "--input",
        missing.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_gpd_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    assert_success(&run(&[
        "sample", "--b", "0.34", "--x-t", "7.5", "--alpha", "2.8", "--count", "50000", "--seed",
        "3", "--output", samples.to_str().unwrap(),
    ]));
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        assert_success(&run(&[
            "fit-gpd",
            "--input",
            samples.to_str().unwrap(),
            "--report",
            r.to_str().unwrap(),
        ]));
    }
    assert_eq!(
        std::fs::read(&r1).unwrap(),
        std::fs::read(&r2).unwrap(),
        "reports differ between identical runs"
    );
}

#[test]
fn sample_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        assert_success(&run(&[
            "sample", "--b", "0.34", "--x-t", "7.5", "--alpha", "2.8", "--count", "1000",
            "--seed", "11", "--output", path.to_str().unwrap(),
        ]));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn evaluate_bundled_table_counts_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("eval.csv");
    let out = run(&["evaluate", "--output", output.to_str().unwrap()]);
    assert_success(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    // The three unsampled years are skipped with a notice each.
    assert_eq!(stderr.matches("row skipped").count(), 3);
    let (header, rows) = read_numeric_table(&output).unwrap();
    assert_eq!(rows.len(), 26);
    assert_eq!(header[0], "year");
    // 1981: computed labor share within the documented 7% margin.
    let idx_u_model = header.iter().position(|h| h == "u_model").unwrap();
    let idx_u_gap = header.iter().position(|h| h == "u_gap").unwrap();
    let row_1981 = &rows[0];
    let u_model = row_1981[idx_u_model].unwrap();
    assert!((u_model - 82.4696).abs() < 1e-3);
    assert!(row_1981[idx_u_gap].unwrap().abs() < 0.07);
}

#[test]
fn simulate_center_start_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let report = dir.path().join("report.json");
    assert_success(&run(&[
        "simulate",
        "--model",
        "goodwin",
        "--a1",
        "1.0",
        "--a2",
        "1.0",
        "--b1",
        "0.02",
        "--b2",
        "0.02",
        "--u0",
        "50",
        "--v0",
        "50",
        "--t-end",
        "5",
        "--step",
        "0.001",
        "--trajectory",
        traj.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let points = read_trajectory_points(&traj).unwrap();
    assert!(points.iter().all(|p| (p.u - 50.0).abs() < 1e-12));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["detected_period"].is_null());
    assert!(parsed["period_error"].is_string());
    assert_eq!(parsed["center"]["u"].as_f64().unwrap(), 50.0);
}

#[test]
fn simulate_detects_small_amplitude_period() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let report = dir.path().join("report.json");
    assert_success(&run(&[
        "simulate",
        "--model",
        "goodwin",
        "--a1",
        "1.0",
        "--a2",
        "1.0",
        "--b1",
        "0.02",
        "--b2",
        "0.02",
        "--u0",
        "50",
        "--v0",
        "50.5",
        "--t-end",
        "40",
        "--step",
        "0.001",
        "--stride",
        "10",
        "--trajectory",
        traj.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let period = parsed["detected_period"]["period"].as_f64().unwrap();
    let formula = parsed["center"]["period"].as_f64().unwrap();
    assert!((period - formula).abs() / formula < 5e-3);
    let drift = parsed["conserved_drift"].as_f64().unwrap();
    assert!(drift < 1e-8);
    // Stride thinning keeps the final state.
    let points = read_trajectory_points(&traj).unwrap();
    assert!((points.last().unwrap().t - 40.0).abs() < 1e-9);
}

#[test]
fn simulate_dhmp_domain_exit_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let report = dir.path().join("report.json");
    let out = run(&[
        "simulate",
        "--model",
        "dhmp",
        "--a1",
        "-0.5",
        "--a2",
        "0.19",
        "--b1",
        "0.0",
        "--b2",
        "0.05",
        "--delta",
        "1.0",
        "--u-bar",
        "95",
        "--u0",
        "90",
        "--v0",
        "50",
        "--t-end",
        "50",
        "--step",
        "0.001",
        "--trajectory",
        traj.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "domain exit must exit 3");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["exit"]["reason"].as_str().unwrap(), "LaborShareCeiling");
    // Truncated trajectory was still written.
    let points = read_trajectory_points(&traj).unwrap();
    assert!(points.last().unwrap().t < 50.0);
}

#[test]
fn simulate_accepts_params_file() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    std::fs::write(
        &params,
        r#"{"a1": 1.0, "a2": 1.0, "b1": 0.02, "b2": 0.02}"#,
    )
    .unwrap();
    let traj = dir.path().join("traj.csv");
    let report = dir.path().join("report.json");
    assert_success(&run(&[
        "simulate",
        "--model",
        "goodwin",
        "--params-file",
        params.to_str().unwrap(),
        "--u0",
        "51",
        "--v0",
        "50",
        "--t-end",
        "1",
        "--trajectory",
        traj.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
}

#[test]
fn estimate_bundled_table_reproduces_published_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("est");
    assert_success(&run(&[
        "estimate",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    let wage = &parsed["goodwin"]["wage"]["coefficients"];
    let a1 = wage[0]["value"].as_f64().unwrap();
    let b1 = wage[1]["value"].as_f64().unwrap();
    assert!((a1 - 0.17).abs() <= 0.06);
    assert!((b1 + 0.0019).abs() <= 0.0006);
    let log_fit = &parsed["dhmp"]["employment_log"]["coefficients"];
    let a2b = log_fit[0]["value"].as_f64().unwrap();
    assert!((a2b - 0.12).abs() <= 0.05);
    // Sign pattern of the fitted constants.
    let empirical = parsed["goodwin_conditions"]["empirical"].as_array().unwrap();
    for check in &empirical[..3] {
        assert_eq!(check["status"].as_str().unwrap(), "Holds", "{check}");
    }
    // Exported series round-trip through the table loaders.
    let (header, rows) = read_numeric_table(&out_dir.join("series.csv")).unwrap();
    assert_eq!(header, vec!["year", "u", "v"]);
    assert_eq!(rows.len(), 29);
    let (header, rows) = read_numeric_table(&out_dir.join("phase.csv")).unwrap();
    assert_eq!(header, vec!["label", "year", "u", "v"]);
    assert_eq!(rows.len(), 29);
    assert_eq!(rows[0][0], Some(1.0));
    assert_eq!(rows[28][0], Some(29.0));
    assert_eq!(rows[28][1], Some(2009.0));
    // Derivative comparison is embedded and includes 1982.
    let comparison = parsed["derivative_comparison"].as_array().unwrap();
    assert_eq!(comparison.len(), 29);
    let row_1982 = &comparison[1];
    assert_eq!(row_1982["year"].as_i64().unwrap(), 1982);
    assert!((row_1982["du_recomputed"].as_f64().unwrap() + 1.10).abs() < 1e-9);
    assert_eq!(row_1982["du_printed"].as_f64().unwrap(), 1.08);
}

#[test]
fn estimate_forward_orientation_flips_signs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("est");
    assert_success(&run(&[
        "estimate",
        "--orientation",
        "forward",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    let a1 = parsed["goodwin"]["wage"]["coefficients"][0]["value"]
        .as_f64()
        .unwrap();
    assert!((a1 + 0.17).abs() <= 0.06, "forward wage intercept {a1}");
}

#[test]
fn estimate_rejects_low_ceiling_as_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "estimate",
        "--u-bar",
        "80",
        "--output-dir",
        dir.path().join("est").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table1_roundtrips_and_interpolates() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("table1.csv");
    assert_success(&run(&["table1", "--output", plain.to_str().unwrap()]));
    let records = read_year_records(&plain).unwrap();
    assert_eq!(records.len(), 29);
    assert_eq!(records.iter().filter(|r| !r.has_gpd_params()).count(), 3);

    let filled = dir.path().join("filled.csv");
    assert_success(&run(&[
        "table1",
        "--interpolate",
        "--output",
        filled.to_str().unwrap(),
    ]));
    let records = read_year_records(&filled).unwrap();
    assert_eq!(records.iter().filter(|r| r.interpolated).count(), 3);
    assert!(records.iter().all(|r| r.has_gpd_params()));
}

#[test]
fn estimate_runs_are_byte_identical(){
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("one");
    let d2 = dir.path().join("two");
    for d in [&d1, &d2] {
        assert_success(&run(&["estimate", "--output-dir", d.to_str().unwrap()]));
    }
    for name in ["report.json", "series.csv", "phase.csv"] {
        assert_eq!(
            std::fs::read(d1.join(name)).unwrap(),
            std::fs::read(d2.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn path_helpers_exist() {
    // Guard against the binary name drifting from the docs.
    let path = Path::new(env!("CARGO_BIN_EXE_growth-cycles"));
    assert!(path.file_stem().unwrap().to_str().unwrap().starts_with("growth-cycles"));
}
