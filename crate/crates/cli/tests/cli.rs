use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushinlab")).args(args).env_remove("GRUSHINLAB_CACHE").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn csv_body(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn constants_report_critical_power() {
    let out = run(&["constants", "--beta1", "2", "--beta2", "2", "--sigma", "0", "--assumption", "A1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["s_critical"], 1.0);
    assert_eq!(v["header"]["program"], "grushinlab");
    assert_eq!(v["header"]["config"]["command"], "constants");

    let v = json(&run(&["constants", "--beta1", "1", "--assumption", "A2"]));
    assert_eq!(v["result"]["s_critical"], 1.0);
}

#[test]
fn constants_infinite_supremum_names_reason() {
    let out = run(&["constants", "--beta1", "2", "--beta2", "3", "--sigma", "0", "--assumption", "A1", "--s", "2"]);
    assert!(out.status.success());
    let sup = &json(&out)["result"]["sup_bounds"];
    assert_eq!(sup["sup_is_finite"], false);
    assert!(sup["reason"].as_str().unwrap().contains("b₋<0"));
}

#[test]
fn constants_below_zeta_is_a_structured_error() {
    let out = run(&["constants", "--s", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "hypothesis");
    assert!(v["error"]["message"].as_str().unwrap().contains("ζ"));
}

#[test]
fn phase_diagram_rows() {
    let out = run(&["phase-diagram", "--beta-max", "2", "--resolution", "4"]);
    assert!(out.status.success());
    let rows = csv_body(&out);
    let find = |beta: &str, a: &str| rows.iter().find(|r| r[0] == beta && r[2] == a).map(|r| r[1].parse::<f64>().unwrap());
    assert_eq!(find("1.0", "A1"), Some(0.75));
    assert_eq!(find("1.0", "A2"), Some(1.0));
    assert_eq!(find("2.0", "A1"), Some(1.0));
    assert!((find("0.5", "A2").unwrap() - 2.5 / 3.0).abs() < 1e-15);
    assert!(rows.iter().all(|r| r[3] == "controllable" && r[4] == "unknown"));
}

#[test]
fn full_domain_observability_audit_passes() {
    let out = run(&["audit", "--set", "full", "--audits", "observability", "--count", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert!(lines[0].get("header").is_some());
    let r = &lines[1];
    assert_eq!(r["quantity"], "observability_constant");
    assert!(r["empirical"].as_f64().unwrap() <= 1.0);
}

#[test]
fn localization_audit_on_oscillator() {
    let out = run(&["audit", "--audits", "localization", "--free", "C_hat=10"]);
    assert_eq!(out.status.code(), Some(0));
    for r in &json_lines(&out)[1..] {
        assert!(r["empirical"].as_f64().unwrap() <= 10.0);
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn empty_set_audit_fails_with_infinite_ratio() {
    let out = run(&["audit", "--set", "empty", "--audits", "spectral-ineq"]);
    assert_eq!(out.status.code(), Some(2));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 4);
    for r in &lines[1..] {
        assert_eq!(r["empirical"], "inf");
        assert_eq!(r["pass"], false);
    }
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(run(&["audit", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["audit", "--audits", "nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["audit", "--gamma", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["eigs", "--V", "cubic"]).status.code(), Some(1));
    assert_eq!(run(&["eigs", "--config", "/nonexistent/config.json"]).status.code(), Some(1));
    assert_eq!(run(&["audit", "--lambda", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn grushin_oracle_agrees() {
    let out = run(&["grushin", "--V", "power:2", "--M", "2", "--oracle"]);
    assert!(out.status.success());
    let v = json(&out);
    let dev = v["result"]["oracle"]["max_relative_deviation"].as_f64().unwrap();
    assert!(dev <= 1e-8, "deviation {dev}");
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    // Rows are even in k.
    for k in 1..=2 {
        let c = |k: i64| rows.iter().find(|r| r["k"][0] == k).unwrap()["C_emp"].clone();
        assert_eq!(c(k), c(-k));
    }
}

#[test]
fn grushin_single_mode() {
    let out = run(&["grushin", "--M", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["k"][0], 0);
    assert_eq!(v["result"]["oracle"], Value::Null);
}

#[test]
fn oversized_oracle_is_rejected_with_advice() {
    let out = run(&["grushin", "--M", "1", "--oracle", "--oracle-points", "1000", "--y-points", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lower oracle_points"));
}

#[test]
fn sweeps_are_deterministic() {
    let args = ["scan-r", "--r", "0.5,2", "--count", "20", "--seed", "3", "--placement", "seeded-random"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(csv_body(&a).len(), 2);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["control", "--count", "15", "--gamma", "0.3", "--T", "0.5"]);
    assert!(first.status.success());
    let v = json(&first);
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, serde_json::to_string(&v["header"]["config"]).unwrap()).unwrap();
    let second = run(&["control", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phase.csv");
    let out = run(&["phase-diagram", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# grushinlab "));
    assert!(text.contains("beta,s_boundary,assumption,regime_above,regime_below"));
}

fn eigenvalues(v: &Value) -> Vec<f64> {
    v["result"]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let go = || {
        Command::new(env!("CARGO_BIN_EXE_grushinlab"))
            .args(["eigs", "--count", "5", "--N", "300"])
            .env("GRUSHINLAB_CACHE", dir.path())
            .output()
            .unwrap()
    };
    let a = go();
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let b = go();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(eigenvalues(&json(&a)), eigenvalues(&json(&run(&["eigs", "--count", "5", "--N", "300"]))));
}

fn write_table(path: &Path) {
    let mut text = String::from("# x, V\n");
    for i in 0..=4000 {
        let x = -20.0 + 0.01 * i as f64;
        text.push_str(&format!("{x},{}\n", x * x));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn table_potential_matches_power() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("v.csv");
    write_table(&table);
    let spec = format!("table:{}", table.display());
    let args = ["eigs", "--count", "4", "--N", "400", "--V", &spec, "--c1", "1", "--c2", "1", "--beta1", "2", "--assumption", "A1"];
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["header"]["table_sha256"].as_object().unwrap().len() == 1);
    let reference = eigenvalues(&json(&run(&["eigs", "--count", "4", "--N", "400"])));
    for (a, b) in eigenvalues(&v).iter().zip(&reference) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn table_potential_needs_growth_parameters() {
    let out = run(&["eigs", "--V", "table:whatever.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a table potential needs --"));
}

#[test]
fn sets_export_mask_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("mask.csv");
    let out = run(&["sets", "--L", "3", "--N", "61", "--mask", mask.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    let count = v["result"]["nodes_in_set"].as_u64().unwrap() as usize;
    let text = std::fs::read_to_string(&mask).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(body.len(), count);
    assert!(v["result"]["thickness"]["gamma_est"].as_f64().unwrap() > 0.0);
}
