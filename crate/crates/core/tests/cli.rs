//! The command line, end to end.

use std::process::{Command, Output};

use serde_json::Value;

fn qkflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkflow")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn list_scenarios() {
    let out = qkflow(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["torus_conformal", "hh2_conformal", "hh2_rotated", "su3", "euclid_soliton"] {
        assert!(text.contains(name));
    }
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qkflow(&["verify", "exterior", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["tol_profile"], "default");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS exterior.hodge_involution"));
}

#[test]
fn exact_torsion_of_su3_at_zero() {
    let out = qkflow(&["torsion", "su3", "--params", "0", "--exact"]);
    assert!(out.status.success());
    let v = json(&out);
    let p = &v["points"][0];
    assert_eq!(p["energy_density"], "3/2");
    assert!(p["divergence"]["entries"].as_array().unwrap().is_empty());
}

#[test]
fn float_torsion_at_given_points() {
    let out = qkflow(&["torsion", "torus_conformal", "--point", "0.5", "--point", "-1.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
    for p in v["points"].as_array().unwrap() {
        assert_eq!(p["torsion"].as_array().unwrap().len(), 8);
        assert!(p["div_norm2"].as_f64().unwrap() < 1e-18);
    }
}

#[test]
fn flow_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("su3.csv");
    let out = qkflow(&["flow", "--scenario", "su3", "--t-end", "0.25", "--out", csv.to_str().unwrap(), "--check-order"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["rate_over_printed"].as_f64().unwrap() - 1.0 / 32.0).abs() < 1e-8);
    let ratio = v["error_ratio_dt_half"].as_f64().unwrap();
    assert!((12.0..20.0).contains(&ratio), "{ratio}");
    let trace = std::fs::read_to_string(&csv).unwrap();
    assert!(trace.starts_with("t,f,energy_density"));
    assert!(trace.lines().count() > 10);
}

#[test]
fn soliton_check_passes_for_steady_and_fails_for_zero() {
    let ok = qkflow(&["soliton-check", "--points", "3"]);
    assert!(ok.status.success());
    assert_eq!(json(&ok)["passed"], true);
    let bad = qkflow(&["soliton-check", "--soliton", "zero", "--points", "3"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn metric_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("omega.json");
    let omega = qkflow::StructureKind::QK.model_form::<f64>().scale(&16.0);
    std::fs::write(&path, omega.to_json_string()).unwrap();
    let out = qkflow(&["metric", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = &json(&out)["metric"];
    for i in 0..8 {
        for j in 0..8 {
            let expected = if i == j { 4.0 } else { 0.0 };
            assert!((g[i][j].as_f64().unwrap() - expected).abs() < 1e-10);
        }
    }
    let out = qkflow(&["decompose", path.to_str().unwrap(), "--exact"]);
    let v = json(&out);
    let nonzero: Vec<&str> = v["pieces"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["norm"].as_f64().unwrap() > 0.0)
        .map(|p| p["label"].as_str().unwrap())
        .collect();
    assert_eq!(nonzero, vec!["L4p_1"]);
}

#[test]
fn bad_input_exits_with_2() {
    assert_eq!(qkflow(&["torsion", "no_such_scenario"]).status.code(), Some(2));
    assert_eq!(qkflow(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(qkflow(&["--tol-profile", "tight", "list-scenarios"]).status.code(), Some(2));
    assert_eq!(qkflow(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qkflow(&["torsion", "euclid_soliton", "--exact"]).status.code(), Some(2));
}
