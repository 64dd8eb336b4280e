use std::io::Write;
use std::process::{Command, Output, Stdio};

use relrocket::simulation::Trajectory;

fn relrocket(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_relrocket"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

const REGULATION: &str = r#"{
    "params": {"m0": 1, "vbar": 1},
    "initial": {"p": 1},
    "controller": {"type": "state_feedback", "poles": [[-1, 0], [-1, 0]]},
    "sim": {"horizon": 20, "dt": 0.01}
}"#;

#[test]
fn simulate_from_stdin_writes_csv_to_stdout() {
    let out = relrocket(&["simulate", "--quiet", "--config", "-"], Some(REGULATION));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = Trajectory::<f64>::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(traj.samples.len(), 2001);
    assert!(traj.terminal().unwrap().state.kin.norm() < 1e-3);
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.json");
    let out = relrocket(
        &[
            "simulate",
            "--quiet",
            "--format",
            "json",
            "--config",
            "-",
            "--out",
            path.to_str().unwrap(),
        ],
        Some(REGULATION),
    );
    assert_eq!(out.status.code(), Some(0));
    let traj = Trajectory::<f64>::read_json(std::fs::File::open(&path).unwrap()).unwrap();
    let csv = Trajectory::<f64>::read_csv(traj.to_csv_string().as_bytes()).unwrap();
    assert_eq!(traj, csv);
}

#[test]
fn report_goes_to_stderr_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = relrocket(
        &["verify", "--config", "-", "--report", report.to_str().unwrap()],
        Some(REGULATION),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[PASS] convergence_order"));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    assert_eq!(json["exit_code"], 0);
    assert_eq!(json["design"]["gains"]["k1"], -1.0);
}

#[test]
fn propellant_exhaustion_exits_two() {
    let text = r#"{
        "params": {"m0": 1, "vbar": 1, "m_dry": 0.6},
        "controller": {"type": "open_loop", "schedule": {"kind": "constant", "value": -1}, "channel": "physical"},
        "sim": {"horizon": 5, "dt": 0.01, "mode": "physical"}
    }"#;
    let out = relrocket(&["simulate", "--config", "-"], Some(text));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MassDepleted"));
}

#[test]
fn invalid_config_exits_one() {
    let out = relrocket(
        &["simulate", "--config", "-"],
        Some(r#"{"params": {"m0": 1, "vbar": 2}, "controller": {"type": "coast"}, "sim": {"horizon": 1}}"#),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = relrocket(&["simulate", "--config", "/nonexistent/scenario.json"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn design_prints_steering_profile() {
    let text = r#"{
        "si_units": true,
        "params": {"m0": 1, "vbar": 1},
        "controller": {"type": "steering", "x_target": [1, 0], "t_end": 1},
        "sim": {"horizon": 1}
    }"#;
    let out = relrocket(&["design", "--config", "-"], Some(text));
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["steering"]["slope"].as_f64().unwrap() - 12.0).abs() < 1e-12);
    assert!((json["steering"]["intercept"].as_f64().unwrap() + 6.0).abs() < 1e-12);
}

#[test]
fn schema_is_valid_json() {
    let out = relrocket(&["schema"], None);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["required"], serde_json::json!(["params", "controller", "sim"]));
}
