mod common;

use std::f64::consts::PI;
use std::fs;

use common::*;
use serde_json::Value;

fn json_file(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn widths_product_matches_standard_limit() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let r = cli(&["widths", "--state", &f["product4.json"]]);
    assert!(r.status.success());
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_valid("widths.schema.json", &v);
    // 1/(sqrt(2*4)*1)
    let expected = 1.0 / 8f64.sqrt();
    assert!((v["marginal"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((v["conditional"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(format!("{:.6}", v["marginal"].as_f64().unwrap()), "0.353553");
}

#[test]
fn pattern_period_of_three_photon_dual_delta() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let r = cli(&["pattern", "--state", &f["dualdelta3.json"], "--grid", "-6.283185307179586,6.283185307179586,2001"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = stdout(&r);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,intensity"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2001);
    let step = rows[1].0 - rows[0].0;
    // independent autocorrelation: first maximum after the first zero crossing
    let v: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let c: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let ac = |lag: usize| c[..c.len() - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>();
    let first_neg = (1..c.len() / 2).find(|&l| ac(l) < 0.0).unwrap();
    let peak = (first_neg..c.len() / 2).max_by(|&a, &b| ac(a).total_cmp(&ac(b))).unwrap();
    let period = peak as f64 * step;
    assert!((period - PI / 3.0).abs() <= step, "period {period}");

    let out = dir.path().join("p");
    let r = cli(&[
        "pattern",
        "--state",
        &f["dualdelta3.json"],
        "--grid",
        "-6.283185307179586,6.283185307179586,2001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let summary = json_file(&out.join("pattern.json"));
    assert_valid("pattern.schema.json", &summary);
    assert!((summary["fringe_period"].as_f64().unwrap() - PI / 3.0).abs() <= step);
}

#[test]
fn dual_delta_widths_refused_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let r = cli(&["widths", "--state", &f["dualdelta3.json"]]);
    assert_eq!(r.status.code(), Some(2));
    assert!(r.stdout.is_empty());
    let e = stderr_json(&r);
    assert_valid("error.schema.json", &e);
    assert_eq!(e["error"], "InfiniteMoment");
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"variant":"product","n":0,"envelope":{"type":"gaussian","kappa":1.0}}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["widths", "--state", bad.to_str().unwrap()],
        vec!["widths", "--state", "/nonexistent.json"],
        vec!["widths"],
        vec!["pattern", "--state", &f["product4.json"], "--grid", "1,0,5"],
        vec!["widths", "--state", &f["product4.json"], "--precision", "0"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let r = cli(&args);
        assert_eq!(r.status.code(), Some(1), "{args:?}");
        assert_valid("error.schema.json", &stderr_json(&r));
    }
    let r = std::process::Command::new(BIN)
        .args(["widths", "--state", &f["product4.json"]])
        .env("PHOTON_SQL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn computation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    // coincident states have no finite total rate
    let r = cli(&["rate", "--state", &f["coincident2.json"]]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(stderr_json(&r)["error"], "NonNormalizable");
    // expansion needs a soliton
    let r = cli(&["expand", "--state", &f["product4.json"], "--schedule", &f["schedule.json"]]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(stderr_json(&r)["error"], "UnsupportedVariant");
}

#[test]
fn help_and_version_succeed() {
    assert!(cli(&["--help"]).status.success());
    assert!(cli(&["--version"]).status.success());
    assert!(cli(&["design", "--help"]).status.success());
}

#[test]
fn threads_variable_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let args = ["oracle-compare", "--state", f["product2.json"].as_str()];
    let base = cli(&args);
    let one = std::process::Command::new(BIN).args(args).env("PHOTON_SQL_THREADS", "1").output().unwrap();
    assert!(base.status.success() && one.status.success());
    assert_eq!(base.stdout, one.stdout);
}

#[test]
fn every_emitted_json_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let out = dir.path().join("out");
    run_matrix(&f, &out);
    let checks = [
        ("widths/widths.json", "widths.schema.json"),
        ("widths-soliton3/widths.json", "widths.schema.json"),
        ("pattern/pattern.json", "pattern.schema.json"),
        ("rate/rate.json", "rate.schema.json"),
        ("expand/expansion.json", "expansion.schema.json"),
        ("chain/chain.json", "chain.schema.json"),
        ("design/report.json", "design_report.schema.json"),
        ("oracle/oracle.json", "oracle.schema.json"),
    ];
    let produced = artifacts(&out);
    let json_files: Vec<&String> = produced.keys().filter(|k| k.ends_with(".json")).collect();
    assert_eq!(json_files.len(), checks.len(), "{json_files:?}");
    for (file, schema) in checks {
        assert_valid(schema, &json_file(&out.join(file)));
    }
    for name in ["product4.json", "soliton2.json", "soliton3.json", "dualdelta3.json"] {
        assert_valid("state.schema.json", &json_file(std::path::Path::new(&f[name])));
    }
    assert_valid("schedule.schema.json", &json_file(std::path::Path::new(&f["schedule.json"])));
}

#[test]
fn stdout_json_matches_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let cases = [
        (vec!["rate", "--state", f["soliton2.json"].as_str()], "rate.schema.json"),
        (
            vec!["chain", "--state", f["soliton2.json"].as_str(), "--chain", f["chain.json"].as_str()],
            "chain.schema.json",
        ),
        (
            vec![
                "design",
                "--target",
                f["target.csv"].as_str(),
                "--state",
                f["coincident2.json"].as_str(),
                "--lambda",
                "3",
            ],
            "design_report.schema.json",
        ),
    ];
    for (args, schema) in cases {
        let r = cli(&args);
        assert!(r.status.success(), "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
        assert_valid(schema, &serde_json::from_slice(&r.stdout).unwrap());
    }
}

#[test]
fn expand_table_matches_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let out = dir.path().join("e");
    let r = cli(&[
        "expand",
        "--state",
        &f["soliton3.json"],
        "--schedule",
        &f["schedule.json"],
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let csv_rows = fs::read_to_string(out.join("expansion.csv")).unwrap().lines().count() - 1;
    let table_rows = stdout(&r).lines().count() - 2;
    assert_eq!(csv_rows, 6);
    assert_eq!(table_rows, csv_rows);
    let header = fs::read_to_string(out.join("expansion.csv")).unwrap();
    assert!(header.starts_with("step,ratio,b_integral,marginal_width,conditional_width,delta_xi_rms,uql_metric\n"));
}

#[test]
fn design_report_residual_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let out = dir.path().join("d");
    let r = cli(&[
        "design",
        "--target",
        &f["target.csv"],
        "--state",
        &f["coincident2.json"],
        "--lambda",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report = json_file(&out.join("report.json"));
    let text = stdout(&r);
    let lines: Vec<&str> = text.lines().collect();
    let headers: Vec<&str> = lines[0].split_whitespace().collect();
    let col = headers.iter().position(|h| *h == "residual").unwrap();
    let cell: f64 = lines[2].split_whitespace().nth(col).unwrap().parse().unwrap();
    assert_eq!(cell, report["residual"].as_f64().unwrap());
    assert!(cell < 1e-6, "residual {cell}");
    for file in ["envelope.csv", "transfer.csv", "achieved_pattern.csv", "report.json"] {
        assert!(out.join(file).exists(), "{file}");
    }
    assert!(fs::read_to_string(out.join("transfer.csv")).unwrap().starts_with("k,re,im\n"));
    assert!(fs::read_to_string(out.join("achieved_pattern.csv")).unwrap().starts_with("x,intensity\n"));
}

#[test]
fn precision_flag_rounds_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let r = cli(&["widths", "--state", &f["product4.json"], "--precision", "6"]);
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["marginal"].as_f64().unwrap(), 0.353553);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let sa = run_matrix(&f, &a);
    let sb = run_matrix(&f, &b);
    assert_eq!(sa, sb);
    assert_eq!(artifacts(&a), artifacts(&b));
}
