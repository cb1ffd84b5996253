use std::process::Command;

use surflab::analysis::{simulate_level1_shots, Basis};
use surflab::circuit::CliffordCircuit;
use surflab::noise::NoiseModel;

fn surflab(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_surflab")).args(args).output().expect("binary runs");
    (out.status.success(), String::from_utf8(out.stdout).expect("utf-8 output"))
}

#[test]
fn encode_check_reports_success() {
    let (ok, out) = surflab(&["encode-check"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["step1_matches"], true);
    assert_eq!(v["step2_matches"], true);
    let (ok, out) = surflab(&["encode-check", "--human"]);
    assert!(ok && out.trim_end().ends_with("PASS"));
}

#[test]
fn decode_table_csv() {
    let (ok, out) = surflab(&["decode-table", "--csv"]);
    assert!(ok);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "s1,s2,s3,s4,correction");
    assert_eq!(lines.len(), 17);
    assert!(lines.contains(&"+1,+1,+1,+1,I"));
    let (ok, out) = surflab(&["decode-table"]);
    assert!(ok);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.len(), 16);
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    let trials = dir.path().join("trials.jsonl");
    let (ok, csv) = surflab(&[
        "simulate", "--p", "0.02,0.04", "--shots", "20000", "--edt", "none", "--decoder", "hard", "--seed", "3",
        "--manifest", manifest.to_str().unwrap(), "--trials", trials.to_str().unwrap(),
    ]);
    assert!(ok);
    assert!(csv.starts_with("p_cnot,trials,failures,p_l,ci_lo,ci_hi,mean_attempts,mean_l1preps\n"));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(std::fs::read_to_string(&trials).unwrap().lines().count(), 20000);
    let path = dir.path().join("rates.csv");
    std::fs::write(&path, &csv).unwrap();
    let (ok, out) = surflab(&["fit", path.to_str().unwrap()]);
    assert!(ok);
    let fit: serde_json::Value = serde_json::from_str(&out).unwrap();
    let e = fit["exponent"].as_f64().unwrap();
    assert!(e > 2.0 && e < 4.0, "exponent {e}");
}

#[test]
fn fault_scans() {
    let (ok, out) = surflab(&["faults", "--level1"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["faults_checked"], 120);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    let (ok, out) = surflab(&["faults", "--k", "1", "--edt", "28"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["scan"]["logical_errors"], 0);
    assert_eq!(v["scan"]["combinations"], 15 * (144 + 2 * 34));
    let (ok, _) = surflab(&["faults", "--k", "3", "--edt", "none", "--samples", "1000"]);
    assert!(ok);
}

#[test]
fn exports_and_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    assert!(surflab(&["export", "--what", "l1", "--out", &p("l1.txt")]).0);
    let l1 = CliffordCircuit::read_from(p("l1.txt")).unwrap();
    assert_eq!(l1.cnot_indices().len(), 8);
    assert!(surflab(&["export", "--what", "l1", "--basis", "x", "--out", &p("l1x.txt")]).0);
    assert!(surflab(&["export", "--what", "l2", "--edt", "28", "--out", &p("l2.txt")]).0);
    assert_eq!(CliffordCircuit::read_from(p("l2.txt")).unwrap().num_qubits(), 117);
    assert!(surflab(&["export", "--what", "dd", "--cycles", "2", "--out", &p("dd.csv")]).0);
    assert_eq!(std::fs::read_to_string(p("dd.csv")).unwrap().lines().count(), 1 + 2 * 8 * 9);

    let model = NoiseModel::new(0.02).unwrap();
    simulate_level1_shots(&model, Basis::Z, 500, 1).unwrap().write_file(p("z.csv")).unwrap();
    simulate_level1_shots(&model, Basis::X, 500, 2).unwrap().write_file(p("x.csv")).unwrap();
    let (ok, out) = surflab(&["analyze", "--z", &p("z.csv"), "--x", &p("x.csv")]);
    assert!(ok);
    let a: serde_json::Value = serde_json::from_str(&out).unwrap();
    let bound = a["fidelity_bound"].as_f64().unwrap();
    assert!((bound - (a["p_z"].as_f64().unwrap() + a["p_x"].as_f64().unwrap() - 1.0)).abs() < 1e-12);
    let (ok, _) = surflab(&["analyze", "--z", &p("x.csv"), "--x", &p("z.csv")]);
    assert!(!ok);
}
