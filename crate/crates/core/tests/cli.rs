use std::process::{Command, Output};

use serde_json::Value;

fn canard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn validator() -> jsonschema::Validator {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/analysis_report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn route<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["predictions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["route"] == name)
        .unwrap()
}

#[test]
fn analyze_vdp() {
    let r = json(&canard(&["analyze", "--model", "vdp", "--eps", "0.05", "--bracket", "-0.2", "0.2"]));
    assert!(r["lambda_H"].as_f64().unwrap().abs() < 1e-8);
    assert!((r["omega0"].as_f64().unwrap() - 0.2236).abs() < 1e-4);
    assert!((r["lyapunov"]["l1_mc"].as_f64().unwrap() - 0.4762).abs() < 1e-3);
    assert!((route(&r, "mc")["lambda_c"].as_f64().unwrap() + 0.0060).abs() < 3e-4);
    assert!(r["timing"].is_object());
    assert!(validator().is_valid(&r));
}

#[test]
fn analyze_fhn_has_only_spatial_routes() {
    let r = json(&canard(&["analyze", "--model", "fhn", "--eps", "0.001", "--bracket", "0.04", "0.07"]));
    assert!((route(&r, "mc")["lambda_c"].as_f64().unwrap() - 0.05196).abs() < 1e-4);
    assert_eq!(r["predictions"].as_array().unwrap().len(), 2);
    assert!(r["lyapunov"].get("l1_gh").is_none());
    assert!(validator().is_valid(&r));
}

#[test]
fn analyze_config_file_matches_builtin() {
    let a = json(&canard(&["analyze", "--config", &config("vdp.json"), "--bracket", "-0.2", "0.2", "--no-timing"]));
    let b = json(&canard(&["analyze", "--model", "vdp", "--no-timing"]));
    let l1 = |r: &Value| r["lyapunov"]["l1_mc"].as_f64().unwrap();
    assert!((l1(&a) - l1(&b)).abs() < 1e-6);
}

#[test]
fn analyze_with_oracle_validates() {
    let r = json(&canard(&["analyze", "--model", "vdp", "--with-oracle", "--oracle-bracket", "-0.01", "-0.001"]));
    assert!((r["oracle"]["lambda_c"].as_f64().unwrap() + 0.006509).abs() < 5e-5);
    assert!(r["timing"]["oracle_s"].is_number());
    assert!(validator().is_valid(&r));
}

#[test]
fn analyze_is_deterministic_without_timing() {
    let args = ["analyze", "--model", "fhn", "--eps", "0.005", "--no-timing"];
    let a = canard(&args);
    let b = canard(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("timing"));
}

#[test]
fn table_output_rounds_to_six_digits() {
    let o = canard(&["analyze", "--model", "vdp", "--table"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("0.223607"), "{s}");
    assert!(s.contains("0.47619"), "{s}");
}

#[test]
fn missing_sign_change_exits_no_hopf() {
    let o = canard(&["analyze", "--model", "vdp", "--bracket", "0.05", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0.05"));
}

#[test]
fn vanishing_l1_exits_degenerate() {
    let o = canard(&["analyze", "--config", &config("harmonic.json"), "--bracket", "-1", "0.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_vdp() {
    let r = json(&canard(&["oracle", "--model", "vdp", "--eps", "0.05", "--bracket", "-0.01", "-0.001"]));
    assert!((r["lambda_c"].as_f64().unwrap() + 0.006509).abs() < 5e-5);
    let b = r["bracket"].as_array().unwrap();
    assert!(b[1].as_f64().unwrap() - b[0].as_f64().unwrap() <= 1e-9);
}

#[test]
fn oracle_fhn() {
    let r = json(&canard(&["oracle", "--model", "fhn", "--eps", "0.005", "--bracket", "0.05", "0.06"]));
    assert!((r["lambda_c"].as_f64().unwrap() - 0.0545535).abs() < 1e-3);
}

#[test]
fn oracle_equal_sides_exit_bracket_code() {
    let o = canard(&["oracle", "--model", "vdp", "--bracket", "-0.01", "-0.008"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_usage_and_config_exit_six() {
    assert_eq!(canard(&["analyze", "--model", "nope"]).status.code(), Some(6));
    assert_eq!(canard(&["analyze", "--frobnicate"]).status.code(), Some(6));
    assert_eq!(canard(&["analyze", "--config", "/nonexistent.json"]).status.code(), Some(6));
    assert_eq!(
        canard(&["analyze", "--model", "vdp", "--bracket", "0.2", "-0.2"]).status.code(),
        Some(6)
    );
}

#[test]
fn single_eps_sweep_has_one_row_and_no_slope() {
    let o = canard(&["sweep", "--model", "vdp", "--eps-list", "0.05"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2, "{s}");
    assert!(lines[0].starts_with("epsilon,lambda_H,omega0,l1_mc,K_route,lambda_c_pred,lambda_c_obs,abs_err"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n/a"));
}

#[test]
fn vdp_sweep_error_shrinks() {
    let o = canard(&["sweep", "--model", "vdp", "--json"]);
    let r = json(&o);
    let errs: Vec<f64> = r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["abs_err"].as_f64().unwrap())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(r["slope"].is_number());
}

#[test]
fn sweep_writes_gnuplot_orbits() {
    let dir = std::env::temp_dir().join(format!("canard-orbits-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("orbits.dat");
    let o = canard(&["sweep", "--model", "vdp", "--eps-list", "0.05", "--orbits", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with('#'));
    assert!(text.contains("\n\n\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn models_listing() {
    let o = canard(&["models"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("x^2 + x^3/3 - y"));
    assert!(s.contains("s = 1.37"));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("canard-report-{}.json", std::process::id()));
    let o = canard(&["analyze", "--model", "vdp", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(validator().is_valid(&r));
    std::fs::remove_file(&path).unwrap();
}
