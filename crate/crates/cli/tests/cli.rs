//! End-to-end tests of the binary: exit codes, output schemas, and
//! reproducibility of emitted documents.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_increlab")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn simulate_linear_capacitor_constant_current() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sim.json",
        r#"{
            "model": "linear_capacitor",
            "params": {"C": 1.0},
            "grid": {"step": 0.001, "horizon": 1.0},
            "input": {"kind": "constant", "value": [1.0]},
            "x0": [0.0]
        }"#,
    );
    let out = dir.path().join("traj.csv");
    let result = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(lines.next().unwrap(), "t,u0,x0,y0");
    let last = text.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((fields[0] - 1.0).abs() < 1e-12, "final time {}", fields[0]);
    assert!((fields[3] - 1.0).abs() < 1e-9, "final output {}", fields[3]);
}

#[test]
fn malformed_config_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", "{ this is not json");
    let out = dir.path().join("never.csv");
    let result = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&result), 1);
    assert!(!out.exists(), "no output file on config error");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "extra.json",
        r#"{"model": "first_order_lag", "bogus_key": 1}"#,
    );
    let result = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&result), 1);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("bogus_key"), "stderr: {stderr}");
}

#[test]
fn domain_exit_exits_two_with_first_offending_time() {
    let dir = tempfile::tempdir().unwrap();
    // V = -80 sits below V_K = -77.
    let config = write_config(
        dir.path(),
        "hh.json",
        r#"{
            "model": "hh_potassium",
            "grid": {"step": 0.001, "horizon": 1.0},
            "input": {"kind": "constant", "value": [-80.0]}
        }"#,
    );
    let result = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&result), 2);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("t=0"), "stderr: {stderr}");
}

#[test]
fn falsify_cubic_capacitor_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "falsify.json",
        r#"{
            "model": "nonlinear_capacitor",
            "params": {"c": "cubic"},
            "budget": 2000,
            "seed": 42
        }"#,
    );
    let out = dir.path().join("cert.json");
    let result = run(&[
        "falsify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let value = doc["certificate"]["value"].as_f64().unwrap();
    assert!(value < -1e-4, "certificate value {value}");
    assert_eq!(doc["config"]["seed"].as_u64(), Some(42));

    // Replay the emitted document: consistent certificate exits 0.
    let replay = run(&["replay", "--config", out.to_str().unwrap()]);
    assert_eq!(
        code(&replay),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&replay.stderr)
    );

    // A corrupted value must be rejected with exit 2.
    let mut corrupted = doc.clone();
    corrupted["certificate"]["value"] = serde_json::json!(value * 2.0);
    let bad = dir.path().join("bad_cert.json");
    std::fs::write(&bad, serde_json::to_string(&corrupted).unwrap()).unwrap();
    let replay = run(&["replay", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&replay), 2);
}

#[test]
fn falsify_linear_capacitor_reports_negative_result() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "clean.json",
        r#"{
            "model": "linear_capacitor",
            "budget": 400,
            "seed": 7
        }"#,
    );
    let out = dir.path().join("summary.json");
    let result = run(&[
        "falsify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&result), 3);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["certificate"].is_null());
    assert!(doc["search"]["best_value"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn falsify_output_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "repro.json",
        r#"{
            "model": "saturated_integrator",
            "params": {"k": 1.0},
            "budget": 400,
            "seed": 11
        }"#,
    );
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    assert_eq!(
        code(&run(&[
            "falsify",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out1.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "falsify",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out2.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "seeded.json",
        r#"{"model": "saturated_integrator", "budget": 300, "seed": 1}"#,
    );
    let out = dir.path().join("c.json");
    let result = run(&[
        "falsify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(code(&result) == 0 || code(&result) == 3);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"].as_u64(), Some(99));
}

#[test]
fn check_dissipation_lag_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "check.json",
        r#"{
            "model": "first_order_lag",
            "params": {"a": 1.0},
            "mode": "dissipation",
            "input": {"kind": "sine", "amplitude": [1.0], "frequency": [0.3]},
            "x0": [0.0],
            "supply": {"kind": "passivity"},
            "storage": {"p": 0.5, "mode": "state"}
        }"#,
    );
    let result = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(doc["report"]["pass"].as_bool(), Some(true));
}

#[test]
fn check_diffpass_scan_fails_for_cubic_capacitor() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scan.json",
        r#"{
            "model": "nonlinear_capacitor",
            "params": {"c": "cubic"},
            "mode": "diffpass",
            "input": {"kind": "constant", "value": [0.1]},
            "x0": [0.0],
            "diffpass": {"p_scan_log10": {"from": -3.0, "to": 3.0, "count": 13}}
        }"#,
    );
    let result = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(
        code(&result),
        3,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(doc["pass"].as_bool(), Some(false));
    assert_eq!(doc["scan"].as_array().unwrap().len(), 13);
}

#[test]
fn check_gain_of_static_doubler() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "gain.json",
        r#"{
            "model": "static_resistor",
            "params": {"g": {"preset": "linear", "slope": 2.0}},
            "mode": "gain",
            "budget": 500,
            "seed": 3
        }"#,
    );
    let result = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    let value = doc["gain_lower_bound"]["value"].as_f64().unwrap();
    assert!((value - 2.0).abs() < 1e-6, "gain {value}");
}

#[test]
fn check_storage_search_finds_lag_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "search.json",
        r#"{
            "model": "first_order_lag",
            "params": {"a": 1.0},
            "grid": {"step": 0.01, "horizon": 10.0},
            "mode": "storage_search",
            "input": {"kind": "sine", "amplitude": [1.0], "frequency": [0.2]},
            "x0": [0.0],
            "supply": {"kind": "passivity"}
        }"#,
    );
    let result = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(doc["found"].as_bool(), Some(true));
    let p00 = doc["p"][0][0].as_f64().unwrap();
    assert!((p00 - 0.5).abs() < 1e-2, "P = {p00}");
}

#[test]
fn csv_input_round_trips_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    // Write an input signal, then feed it back through the csv input kind.
    let sig =
        increlab_core::Signal::from_fn(0.01, 101, 1, increlab_core::SignalKind::Zoh, |t, _| {
            (2.0 * t).sin()
        })
        .unwrap();
    let csv_path = dir.path().join("input.csv");
    sig.write_csv_path(&csv_path).unwrap();

    let config = write_config(
        dir.path(),
        "sim_csv.json",
        &format!(
            r#"{{
                "model": "first_order_lag",
                "grid": {{"step": 0.01, "horizon": 1.0}},
                "input": {{"kind": "csv", "path": "{}"}},
                "x0": [0.0]
            }}"#,
            csv_path.display()
        ),
    );
    let result = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(
        code(&result),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.lines().count() > 100);
}
