//! End-to-end CLI checks: exit codes, file outputs, schema conformance, and
//! bitwise reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lsv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lsv"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lsv-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

/// Minimal structural validation against a shipped JSON schema: required
/// keys exist and primitive types match.
fn validate_schema(json: &serde_json::Value, schema_path: &Path) {
    let schema: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(schema_path).unwrap()).unwrap();
    validate_object(json, &schema, "$");
}

fn validate_object(value: &serde_json::Value, schema: &serde_json::Value, at: &str) {
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required {
            let key = key.as_str().unwrap();
            assert!(
                value.get(key).is_some(),
                "{at}: missing required key `{key}`"
            );
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        for (key, prop_schema) in props {
            let Some(v) = value.get(key) else { continue };
            if let Some(ty) = prop_schema.get("type") {
                let allowed: Vec<&str> = match ty {
                    serde_json::Value::String(s) => vec![s.as_str()],
                    serde_json::Value::Array(a) => a.iter().filter_map(|t| t.as_str()).collect(),
                    _ => vec![],
                };
                let actual = match v {
                    serde_json::Value::Null => "null",
                    serde_json::Value::Bool(_) => "boolean",
                    serde_json::Value::Number(n) => {
                        if n.is_i64() || n.is_u64() {
                            "integer"
                        } else {
                            "number"
                        }
                    }
                    serde_json::Value::String(_) => "string",
                    serde_json::Value::Array(_) => "array",
                    serde_json::Value::Object(_) => "object",
                };
                let ok = allowed
                    .iter()
                    .any(|&t| t == actual || (t == "number" && actual == "integer"));
                assert!(ok, "{at}.{key}: type {actual} not in {allowed:?}");
            }
            if let Some(items) = prop_schema.get("items") {
                if let Some(arr) = v.as_array() {
                    for (i, item) in arr.iter().enumerate() {
                        validate_object(item, items, &format!("{at}.{key}[{i}]"));
                    }
                }
            }
        }
    }
}

fn schema(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/schemas")
        .join(name)
}

#[test]
fn density_run_emits_h_half_and_validates() {
    let dir = tmp_dir("density");
    let base = dir.join("d08");
    let out = run(lsv()
        .args([
            "density",
            "--alpha",
            "0.8",
            "--grid-size",
            "128",
            "--k-max",
            "500",
        ])
        .args(["--ulam", "256", "--out", base.to_str().unwrap()]));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    validate_schema(&json, &schema("density.schema.json"));
    assert!(json["h_half"].as_f64().unwrap() > 0.0);
    assert!(json["residual"].as_f64().unwrap() <= 1e-10);
    assert!(json["ulam_l1_gap"].as_f64().unwrap() < 0.05);
    let csv = fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.starts_with("# tool_version="));
    assert!(csv.contains("x,h_tilde,rho"));
    assert!(base.with_extension("ulam.csv").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_config_exits_one_without_partial_files() {
    let dir = tmp_dir("badconfig");
    let cfg = dir.join("bad.json");
    fs::write(&cfg, r#"{ "alpha": 0.8, "no_such_key": 1 }"#).unwrap();
    let base = dir.join("out");
    let out = run(lsv()
        .args(["density", "--config", cfg.to_str().unwrap()])
        .args(["--out", base.to_str().unwrap()]));
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Only the config file itself is present; no partial outputs.
    let entries: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries.len(), 1, "{entries:?}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_alpha_is_usage_error() {
    let out = run(lsv().args(["density", "--alpha", "7.5"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_failure_exits_two_with_json_report() {
    // An unreachable tolerance exhausts the iteration cap: numerical
    // failure, exit 2, machine-readable report on stdout.
    let dir = tmp_dir("fail");
    let base = dir.join("x");
    let out = run(lsv()
        .args(["density", "--alpha", "0.8", "--grid-size", "64", "--k-max", "64"])
        .args(["--tol", "1e-30", "--out", base.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("JSON error report on stdout");
    assert_eq!(report["kind"], "numerical");
    assert_eq!(report["exit_code"], 2);
    // No partial outputs.
    assert!(!base.with_extension("csv").exists());
    assert!(!base.with_extension("json").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn zeta_values_and_domain_error() {
    let out = run(lsv().args(["zeta", "2.0"]));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1.64493406684822"), "{stdout}");

    let out = run(lsv().args(["zeta", "0.5"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tails_empty_window_exits_one() {
    let out = run(lsv().args([
        "tails",
        "--alpha",
        "0.8",
        "--window-lo",
        "100",
        "--window-hi",
        "100",
    ]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tails_run_validates_schema() {
    let dir = tmp_dir("tails");
    let cfg = dir.join("cfg.json");
    fs::write(
        &cfg,
        r#"{ "alpha": 0.8, "grid_size": 128, "k_max": 500, "window_lo": 50,
             "window_hi": 500, "kac_n_max": 2000 }"#,
    )
    .unwrap();
    let base = dir.join("t08");
    let out = run(lsv()
        .args(["tails", "--config", cfg.to_str().unwrap()])
        .args(["--out", base.to_str().unwrap()]));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    validate_schema(&json, &schema("tails.schema.json"));
    let csv = fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.contains("n,tail_mass,model_value,residual"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_is_bitwise_reproducible_across_thread_counts() {
    let dir = tmp_dir("sim");
    let args = |base: &Path, threads: &str| {
        vec![
            "simulate".to_string(),
            "--mode".into(),
            "birkhoff".into(),
            "--alpha".into(),
            "0.9".into(),
            "--n-steps".into(),
            "20000".into(),
            "--n-orbits".into(),
            "8".into(),
            "--seed".into(),
            "1234".into(),
            "--threads".into(),
            threads.into(),
            "--out".into(),
            base.to_str().unwrap().into(),
        ]
    };
    let b1 = dir.join("run1");
    let b2 = dir.join("run2");
    let b3 = dir.join("run3");
    assert!(run(lsv().args(args(&b1, "4"))).status.success());
    assert!(run(lsv().args(args(&b2, "4"))).status.success());
    assert!(run(lsv().args(args(&b3, "1"))).status.success());
    let c1 = fs::read(b1.with_extension("csv")).unwrap();
    let c2 = fs::read(b2.with_extension("csv")).unwrap();
    let c3 = fs::read(b3.with_extension("csv")).unwrap();
    assert_eq!(c1, c2, "identical run differs");
    assert_eq!(c1, c3, "thread count changed the output");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b1.with_extension("json")).unwrap()).unwrap();
    validate_schema(&json, &schema("ensemble.schema.json"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn response_single_point_grid_is_flagged() {
    let dir = tmp_dir("resp");
    let cfg = dir.join("cfg.json");
    fs::write(
        &cfg,
        r#"{ "alphas": [0.9], "grid_size": 128, "k_max": 500,
             "fit_window_lo": 50, "fit_window_hi": 500, "kac_n_max": 2000 }"#,
    )
    .unwrap();
    let base = dir.join("r1");
    let out = run(lsv()
        .args(["response", "--config", cfg.to_str().unwrap()])
        .args(["--out", base.to_str().unwrap()]));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    validate_schema(&json, &schema("response.schema.json"));
    let report = &json["derivatives"][0];
    assert_eq!(report["converged"], serde_json::Value::Bool(false));
    assert_eq!(report["quotients"].as_array().unwrap().len(), 1);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn response_rejects_grid_at_or_above_one() {
    let out = run(lsv().args(["response", "--alphas", "0.9,1.0"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn expression_potential_flows_through_simulate() {
    let dir = tmp_dir("expr");
    let base = dir.join("e");
    let out = run(lsv().args([
        "simulate",
        "--mode",
        "birkhoff",
        "--alpha",
        "0.9",
        "--n-steps",
        "10000",
        "--n-orbits",
        "4",
        "--potential",
        "x - 0.5*x^2",
        "--eta",
        "1",
        "--holder-c",
        "1.5",
        "--out",
        base.to_str().unwrap(),
    ]));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // A declared Hölder bound that fails the spot check is a usage error
    // (builtin tags like `sqrt` carry vetted data; expressions are checked).
    let out = run(lsv().args([
        "simulate",
        "--mode",
        "birkhoff",
        "--alpha",
        "0.9",
        "--n-steps",
        "1000",
        "--n-orbits",
        "2",
        "--potential",
        "x^0.25",
        "--eta",
        "0.5",
        "--holder-c",
        "1",
    ]));
    assert_eq!(out.status.code(), Some(1));
    fs::remove_dir_all(&dir).unwrap();
}
