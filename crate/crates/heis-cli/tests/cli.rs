//! End-to-end tests of the hdl binary: flag/file/env precedence, exit codes,
//! report determinism, and the emitted file set.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hdl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hdl"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hdl_test_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    hdl().args(args).output().expect("failed to spawn hdl")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn usage_errors_name_the_field() {
    let out = run(&["--command", "simulate-path", "--dt", "-1"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("dt"), "stderr: {}", stderr_of(&out));

    let out = run(&["--command", "warp-speed"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("command"));

    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags_and_env() {
    let dir = tmp_dir("precedence");
    let cfg_path = dir.join("exp.cfg");
    fs::write(
        &cfg_path,
        "command = simulate-path\ndt = 0.01\nT = 0.05\nseed = 3\npaths = 1\n",
    )
    .unwrap();

    // Flag beats file.
    let out_dir = dir.join("a");
    let out = hdl()
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "--dt",
            "0.005",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let echoed = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.contains("dt = 0.005"), "echo: {echoed}");

    // Env beats file, flag beats env.
    let out_dir = dir.join("b");
    let out = hdl()
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("HDL_DT", "0.002")
        .env("HDL_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let echoed = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.contains("dt = 0.002"), "echo: {echoed}");
    assert!(echoed.contains("seed = 9"), "echo: {echoed}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tmp_dir("unknown_key");
    let cfg_path = dir.join("exp.cfg");
    fs::write(&cfg_path, "command = simulate-path\nwarp = 9\n").unwrap();
    let out = run(&["--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("warp"));
}

fn read_report(dir: &Path) -> serde_json::Value {
    let text = fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn simulate_path_emits_deterministic_reports_and_csv() {
    let dir = tmp_dir("simpath");
    let args = |out: &Path| {
        vec![
            "--command".to_string(),
            "simulate-path".to_string(),
            "--n".to_string(),
            "1".to_string(),
            "--T".to_string(),
            "0.05".to_string(),
            "--dt".to_string(),
            "0.001".to_string(),
            "--seed".to_string(),
            "7".to_string(),
            "--paths".to_string(),
            "2".to_string(),
            "--out".to_string(),
            out.display().to_string(),
        ]
    };
    // Identical config (including out dir) run twice: report.json must be
    // byte-identical; only metadata.json carries the timestamp/wall time.
    let out_a = dir.join("a");
    let out = hdl().args(args(&out_a)).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report_first = fs::read(out_a.join("report.json")).unwrap();
    let out = hdl().args(args(&out_a)).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report_second = fs::read(out_a.join("report.json")).unwrap();
    assert_eq!(report_first, report_second);
    assert!(out_a.join("metadata.json").exists());

    // CSV: one file per path with the documented header.
    let csv = fs::read_to_string(out_a.join("path_0000.csv")).unwrap();
    assert!(csv.starts_with("t,x1,y1,eta\n"), "header: {}", &csv[..30.min(csv.len())]);
    assert!(out_a.join("path_0001.csv").exists());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 51); // header + grid points for T=0.05, dt=1e-3

    let report = read_report(&out_a);
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["seed"], 7);
    // Horizontality residual is recorded and tiny.
    let res = report["results"]["paths"][0]["horizontality_residual"].as_f64().unwrap();
    assert!(res <= 1e-12);
}

#[test]
fn check_morphism_exit_codes_follow_the_verdict() {
    let dir = tmp_dir("morphism");
    let out = hdl()
        .args([
            "--command",
            "check-morphism",
            "--map",
            "dilation:2",
            "--points",
            "200",
            "--seed",
            "5",
            "--out",
            dir.join("pass").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report = read_report(&dir.join("pass"));
    assert_eq!(report["results"]["report"]["verdicts"]["overall"], true);

    let out = hdl()
        .args([
            "--command",
            "check-morphism",
            "--map",
            "projection",
            "--n",
            "2",
            "--points",
            "200",
            "--seed",
            "5",
            "--out",
            dir.join("fail").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
    let report = read_report(&dir.join("fail"));
    assert_eq!(report["results"]["report"]["verdicts"]["contact"], false);
    assert_eq!(report["pass"], false);

    // Unknown map id is a usage error, not an assertion failure.
    let out = run(&["--command", "check-morphism", "--map", "escher"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pushforward_test_runs_the_battery() {
    let dir = tmp_dir("pushforward");
    let out = hdl()
        .args([
            "--command",
            "pushforward-test",
            "--map",
            "dilation:2",
            "--paths",
            "2",
            "--T",
            "0.6",
            "--dt",
            "0.001",
            "--seed",
            "11",
            "--out",
            dir.join("ok").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report = read_report(&dir.join("ok"));
    assert_eq!(report["results"]["battery"]["pass"], true);
    assert_eq!(report["results"]["lambda0"], 4.0);
    let csv = fs::read_to_string(dir.join("ok").join("per_path_stats.csv")).unwrap();
    assert!(csv.starts_with("path,qv_ratio_1,qv_ratio_2,ks_p_1,ks_p_2,cross_cov_max,vertical_residual_max"));

    // The same map without enough increments is a runtime error (exit 3).
    let out = hdl()
        .args([
            "--command",
            "pushforward-test",
            "--map",
            "dilation:2",
            "--paths",
            "1",
            "--T",
            "0.1",
            "--dt",
            "0.001",
            "--out",
            dir.join("short").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn dirichlet_solve_writes_exits_and_kernel_block() {
    let dir = tmp_dir("dirichlet");
    let out = hdl()
        .args([
            "--command",
            "dirichlet-solve",
            "--samples",
            "60",
            "--dt",
            "0.005",
            "--seed",
            "3",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report = read_report(&dir.join("run"));
    let ratio = report["results"]["kernel"]["constant_ratio"].as_f64().unwrap();
    assert!((ratio - std::f64::consts::PI).abs() < 1e-3);
    let csv = fs::read_to_string(dir.join("run").join("exits.csv")).unwrap();
    assert!(csv.starts_with("t_exit,x1,y1,eta\n"));
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn mean_value_check_passes_at_default_tolerance() {
    let dir = tmp_dir("mvp");
    let out = hdl()
        .args([
            "--command",
            "mean-value-check",
            "--ball-radius",
            "0.5",
            "--out",
            dir.join("run").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let report = read_report(&dir.join("run"));
    let rows = report["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8); // 4 fields × 2 radii
}
