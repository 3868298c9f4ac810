//! CLI contract tests: exit codes, input validation, tolerance plumbing.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rigidcert"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rigidcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, content: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn malformed_graph_exits_one_with_diagnostic() {
    let path = write("loop.json", r#"{"n": 3, "edges": [[0, 0]]}"#);
    let output = bin()
        .args(["connectivity", "--graph"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("self-loop"), "stderr: {stderr}");

    let path = write("dup.json", r#"{"n": 3, "edges": [[0, 1], [1, 0]]}"#);
    let output = bin()
        .args(["connectivity", "--graph"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_file_exits_one() {
    let output = bin()
        .args(["gor", "--graph", "/nonexistent/graph.json", "--dim", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn verified_negative_exits_two() {
    let k33 = write(
        "k33.json",
        r#"{"n":6,"edges":[[0,3],[0,4],[0,5],[1,3],[1,4],[1,5],[2,3],[2,4],[2,5]]}"#,
    );
    let output = bin()
        .args([
            "certify",
            "--graph",
            k33.to_str().unwrap(),
            "--dim",
            "2",
            "--seed",
            "7",
            "--max-attempts",
            "5",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("no_rigid_kernel_found"), "stdout: {text}");
}

#[test]
fn under_connected_graph_is_an_error() {
    let path3 = write("path3.json", r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#);
    let output = bin()
        .args(["gor", "--graph", path3.to_str().unwrap(), "--dim", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("connected"));
}

#[test]
fn tolerance_env_and_flag_are_recorded() {
    let k22 = write("k22.json", r#"{"n":4,"edges":[[0,2],[0,3],[1,2],[1,3]]}"#);
    let output = bin()
        .args(["connectivity", "--graph", k22.to_str().unwrap()])
        .env("RIGIDCERT_TOL", "1e-7")
        .output()
        .unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("json output");
    assert_eq!(json["tol"], serde_json::json!(1e-7));

    // The flag wins over the environment.
    let output = bin()
        .args(["connectivity", "--graph", k22.to_str().unwrap(), "--tol", "1e-5"])
        .env("RIGIDCERT_TOL", "1e-7")
        .output()
        .unwrap();
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["tol"], serde_json::json!(1e-5));
    assert_eq!(json["seed"], serde_json::json!(0));
}

#[test]
fn connectivity_reports_the_cut_size() {
    let k22 = write("k22b.json", r#"{"n":4,"edges":[[0,2],[0,3],[1,2],[1,3]]}"#);
    let output = bin()
        .args(["connectivity", "--graph", k22.to_str().unwrap(), "--dim", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["connectivity"], serde_json::json!(2));
    assert_eq!(json["is_d_plus_1_connected"], serde_json::json!(true));
}

#[test]
fn sdp_probe_reads_instance_files() {
    let inst = write(
        "inst.json",
        r#"{"graph":{"n":4,"edges":[[0,2],[0,3],[1,2],[1,3]]},"d":1,
            "lengths_sq":{"0-2":1.0,"0-3":9.0,"1-2":1.0,"1-3":1.0}}"#,
    );
    let output = bin()
        .args([
            "sdp-probe",
            "--instance",
            inst.to_str().unwrap(),
            "--runs",
            "4",
            "--seed",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["success"], serde_json::json!(true));
    assert_eq!(json["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn kernel_artifact_contains_stability_report() {
    let k4 = write(
        "k4.json",
        r#"{"n":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#,
    );
    let output = bin()
        .args(["kernel", "--graph", k4.to_str().unwrap(), "--dim", "2", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["stability"]["verdict"], serde_json::json!(true));
    assert_eq!(json["framework"]["d"], serde_json::json!(2));
}

#[test]
fn audit_dims_reports_exact_k22_values() {
    let k22 = write("k22c.json", r#"{"n":4,"edges":[[0,2],[0,3],[1,2],[1,3]]}"#);
    let output = bin()
        .args(["audit-dims", "--graph", k22.to_str().unwrap(), "--dim", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["d_g"]["measured"], serde_json::json!(6));
    assert_eq!(json["d_g"]["predicted"], serde_json::json!(6));
    assert_eq!(json["d_l"]["measured"], serde_json::json!(3));
    assert_eq!(json["d_l"]["predicted"], serde_json::json!(3));
    assert_eq!(json["agrees"], serde_json::json!(true));
}

#[test]
fn audit_dims_on_underconnected_graph_is_an_error() {
    let path4 = write("path4.json", r#"{"n":4,"edges":[[0,1],[1,2],[2,3]]}"#);
    let output = bin()
        .args(["audit-dims", "--graph", path4.to_str().unwrap(), "--dim", "2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
