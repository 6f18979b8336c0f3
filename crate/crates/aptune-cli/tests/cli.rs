//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::Command;

fn aptune() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aptune"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 output")
}

fn write_mechanism(path: &Path, with_noise: bool) {
    let noise = if with_noise {
        r#",
  "noise": {"sigma": [0.3, 0.3], "correlation": [[1.0, 0.0], [0.0, 1.0]]},
  "detection": {"epsilon": [0.6, 0.6]}"#
    } else {
        ""
    };
    let text = format!(
        r#"{{
  "discount": 0.9,
  "punish_len": 4,
  "punish_rate_self": [0.9, 0.9],
  "punish_rate_others": [[0.95, 0.95], [0.95, 0.95]],
  "target_profile": [4.9, 4.9],
  "target_rate": 0.5{noise}
}}"#
    );
    std::fs::write(path, text).unwrap();
}

fn write_two_ap_topology(path: &Path) {
    let text = r#"{
  "noise_floor": 1.0,
  "cs_threshold": [0.05, 0.05],
  "power_min": [1.0, 1.0],
  "power_max": [15.0, 15.0],
  "gains": [[0.0, 0.01], [0.01, 0.0]]
}"#;
    std::fs::write(path, text).unwrap();
}

#[test]
fn gen_topology_round_trips_through_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("topo.json");
    run_ok(aptune()
        .args(["gen-topology", "--n", "6", "--side", "80", "--seed", "9"])
        .arg("--out")
        .arg(&topo));
    assert!(topo.exists());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&topo).unwrap()).unwrap();
    assert_eq!(parsed["positions"].as_array().unwrap().len(), 6);
    assert_eq!(parsed["cs_threshold"].as_array().unwrap().len(), 6);

    let out = run_ok(aptune()
        .args(["optimize", "--pc", "0.6", "--method", "max-power,greedy-pl"])
        .arg("--topology")
        .arg(&topo));
    assert!(out.contains("MAX_POWER"));
    assert!(out.contains("GREEDY_PL"));

    let trace = dir.path().join("trace.csv");
    run_ok(aptune()
        .args(["optimize", "--pc", "0.6", "--method", "greedy-pl"])
        .arg("--topology")
        .arg(&topo)
        .arg("--trace")
        .arg(&trace));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("round,coordinate,level,total"));
    assert!(text.lines().count() > 2);
}

#[test]
fn sweep_emits_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    run_ok(aptune()
        .args([
            "sweep",
            "--n",
            "4",
            "--side",
            "60",
            "--seed",
            "5",
            "--pc",
            "0.3,0.6",
            "--method",
            "max-power,greedy-pl",
        ])
        .arg("--out")
        .arg(&csv));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "topology_seed,p_c,method,status,total_exact,total_surrogate,per_ap_power;per_ap_utility"
    );
    assert_eq!(lines.count(), 4, "2 rates x 2 methods");

    // Re-running reproduces the bytes.
    let again = dir.path().join("sweep2.csv");
    run_ok(aptune()
        .args([
            "sweep", "--n", "4", "--side", "60", "--seed", "5", "--pc", "0.3,0.6", "--method",
            "max-power,greedy-pl",
        ])
        .arg("--out")
        .arg(&again));
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn baselines_run_on_generated_topologies() {
    let out = run_ok(aptune().args([
        "baseline-phy",
        "--n",
        "5",
        "--side",
        "10",
        "--seed",
        "3",
        "--pc",
        "0.5",
    ]));
    assert!(out.contains("relaxed PHY solution"));
    assert!(out.contains("ap,power,row_gain,stationary_target"));

    let out = run_ok(aptune().args([
        "baseline-mac",
        "--n",
        "4",
        "--side",
        "60",
        "--seed",
        "3",
        "--pc",
        "0.5",
        "--snr0",
        "0.5,2",
    ]));
    assert!(out.starts_with("snr0,status,total_order"));
}

#[test]
fn game_subcommands_analyze_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("two.json");
    let mech = dir.path().join("mech.json");
    write_two_ap_topology(&topo);
    write_mechanism(&mech, true);

    let history = dir.path().join("history.csv");
    let out = run_ok(aptune()
        .args(["game-mpm", "--horizon", "12", "--deviate", "0:2:15.0:0.9"])
        .arg("--topology")
        .arg(&topo)
        .arg("--mechanism")
        .arg(&mech)
        .arg("--out")
        .arg(&history));
    assert!(out.contains("enforceable:"));
    assert!(out.contains("minimal workable punishment length"));
    let text = std::fs::read_to_string(&history).unwrap();
    assert!(text.starts_with("period,state,flags,per_ap_utility"));
    assert!(text.contains("S0(1)"), "deviation at period 2 starts AP 0's phase");

    let pairs = dir.path().join("pairs.csv");
    let out = run_ok(aptune()
        .args(["game-mim", "--horizon", "300", "--seeds", "1,2,3"])
        .arg("--topology")
        .arg(&topo)
        .arg("--mechanism")
        .arg(&mech)
        .arg("--out")
        .arg(&pairs));
    assert!(out.contains("discounted social utility"));
    let text = std::fs::read_to_string(&pairs).unwrap();
    assert!(text.starts_with("seed,zero_tolerance,threshold,diff"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn unknown_method_fails_with_message() {
    let output = aptune()
        .args(["optimize", "--n", "3", "--method", "nonsense"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown method"));
}
