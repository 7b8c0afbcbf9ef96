use std::process::Command;

use tpgabor_cli::{run_args, EXIT_CONFIG};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpgabor"))
}

fn quick<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["tpgabor"];
    v.extend_from_slice(extra);
    v.extend(["--x-grid-n", "16", "--ladder", "8,16,32"]);
    v
}

#[test]
fn diagnose_exit_codes() {
    let frame = run_args(quick(&["diagnose", "--alpha", "1/2"]));
    assert_eq!(frame.exit_code, 0, "{}", frame.stderr);
    let json: serde_json::Value = serde_json::from_str(&frame.stdout).unwrap();
    assert_eq!(json["verdict"], "Frame");
    assert!(json["evidence"].as_array().unwrap().len() >= 4);

    let critical = run_args(quick(&["diagnose", "--alpha", "1"]));
    assert_eq!(critical.exit_code, 1);
    let json: serde_json::Value = serde_json::from_str(&critical.stdout).unwrap();
    let kinds: Vec<&str> = json["evidence"].as_array().unwrap().iter().map(|e| e["type"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"density") && kinds.contains(&"zak_zero"));

    let dense = run_args(quick(&["diagnose", "--alpha", "3/2"]));
    assert_eq!(dense.exit_code, 1);
    let json: serde_json::Value = serde_json::from_str(&dense.stdout).unwrap();
    assert_eq!(json["ladder_trace"].as_array().unwrap().len(), 0);
}

#[test]
fn binary_exit_codes_and_stderr() {
    let out = bin().args(["diagnose", "--alpha", "3/2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["diagnose", "--sigma-tol=-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = bin().args(["diagnose", "--alpha", "0.75", "--x-grid-n", "16", "--ladder", "8,16,32"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rationalized to 3/4"));
    let out = bin().args(["bogus"]).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn empty_scan_is_header_only() {
    let run = run_args(["tpgabor", "scan", "--alphas", ""]);
    assert_eq!(run.exit_code, 0);
    assert_eq!(run.stdout, "# tpgabor-scan v1\nalpha,beta,alphabeta,verdict,A_est,min_sigma\n");
}

#[test]
fn scan_rows_in_grid_order() {
    let run = run_args(quick(&["scan", "--window", "one_sided_exp", "--alphas", "3/4,1,5/4"]));
    let rows: Vec<Vec<String>> = run.stdout.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect();
    let got: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[3].as_str())).collect();
    assert_eq!(got[0], ("3/4", "Frame"));
    assert_ne!(got[1].1, "NotFrame");
    assert_eq!(got[2], ("5/4", "NotFrame"));
}

#[test]
fn zak_row_count() {
    let run = run_args(["tpgabor", "zak", "--grid-n", "128"]);
    assert_eq!(run.exit_code, 0);
    let mut lines = run.stdout.lines();
    assert_eq!(lines.next(), Some("# tpgabor-zak v1"));
    assert_eq!(lines.next(), Some("x,xi,re,im,abs"));
    assert_eq!(lines.count(), 128 * 128);
}

#[test]
fn zzdet_covers_one_over_p() {
    let run = run_args(["tpgabor", "zzdet", "--alpha", "2/3", "--grid-n", "64"]);
    assert_eq!(run.exit_code, 0, "{}", run.stderr);
    let xs: Vec<f64> = run.stdout.lines().skip(2).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 65);
    assert_eq!(xs[0], 0.0);
    assert!((xs[64] - 0.5).abs() < 1e-12);
    for line in run.stdout.lines().skip(2) {
        let sigma: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(sigma > 0.0);
    }
}

#[test]
fn witness_prints_alternating_vector() {
    let run = run_args(["tpgabor", "witness", "--alpha", "2/3", "--x", "0.1"]);
    assert_eq!(run.exit_code, 0, "{}", run.stderr);
    let nu_line = run.stdout.lines().nth(2).unwrap();
    assert!(nu_line.starts_with("# nu="));
    let nu: f64 = nu_line[5..].split_whitespace().next().unwrap().parse().unwrap();
    assert!(nu > 0.0);
    let u: Vec<f64> = run.stdout.lines().skip(3).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(u.len(), 33);
    assert!(u.windows(2).all(|p| p[0] * p[1] < 0.0));
}

#[test]
fn audit_reports_json() {
    let run = run_args(["tpgabor", "audit", "--alpha", "1/2", "--trials", "500", "--window", "two_sided_exp"]);
    assert_eq!(run.exit_code, 0, "{}", run.stderr);
    let json: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["trials"], 500);
}

#[test]
fn bounds_json_schema() {
    let run = run_args(quick(&["bounds", "--alpha", "1/2"]));
    assert_eq!(run.exit_code, 0);
    let json: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    for key in ["verdict", "A_est", "B_est", "worst_x", "ladder_trace"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(json["A_est"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"window": {"kind": "gaussian", "gamma": 3.141592653589793}, "alpha": "3/2", "x_grid_n": 16, "ladder": [8, 16, 32]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(run_args(["tpgabor", "diagnose", "--config", cfg]).exit_code, 1);
    assert_eq!(run_args(["tpgabor", "diagnose", "--config", cfg, "--alpha", "1/2"]).exit_code, 0);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"alpah": "1/2"}"#).unwrap();
    let run = run_args(["tpgabor", "diagnose", "--config", bad.to_str().unwrap()]);
    assert_eq!(run.exit_code, EXIT_CONFIG);
    let run = run_args(["tpgabor", "diagnose", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(run.exit_code, EXIT_CONFIG);
}

#[test]
fn output_file_and_jobs_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zak.csv");
    let out = bin().args(["zak", "--grid-n", "16", "--output", path.to_str().unwrap()]).env("TPGABOR_JOBS", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, run_args(["tpgabor", "zak", "--grid-n", "16"]).stdout);

    let out = bin().args(["zak", "--grid-n", "16"]).env("TPGABOR_JOBS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn repeated_runs_are_identical() {
    let args = quick(&["scan", "--window", "sech", "--alphas", "1/2:3/2:1/2"]);
    let a = run_args(args.clone());
    let mut more = args.clone();
    more.extend(["--jobs", "4"]);
    let b = run_args(more);
    assert_eq!(a, b);
}
