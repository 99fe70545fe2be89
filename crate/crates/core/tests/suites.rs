//! Every verification suite passes under the default profile.

use qkflow::verify::{Config, Status, Verifier, SUITES};

fn run(name: &str) {
    let report = Verifier::new(Config::default()).run(Some(name)).unwrap();
    assert!(!report.checks.is_empty());
    for c in &report.checks {
        println!("{}", c.line());
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.id.as_str()).collect();
    assert!(failed.is_empty(), "{name}: {failed:?}");
}

#[test]
fn exterior() {
    run("exterior");
}

#[test]
fn structures() {
    run("structures");
}

#[test]
fn scenarios() {
    run("scenarios");
}

#[test]
fn geometry() {
    run("geometry");
}

#[test]
fn flow() {
    run("flow");
}

#[test]
fn suite_names_and_report_json() {
    assert_eq!(SUITES.len(), 6);
    let v = Verifier::new(Config::default());
    assert!(v.run(Some("bogus")).is_err());
    let report = v.run(Some("exterior")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json_string()).unwrap();
    assert_eq!(json["suite"], "exterior");
    assert_eq!(json["checks"][0]["status"], "pass");
    assert!(json["calibration"]["kappa_conv"].as_f64().unwrap() > 0.0);
    let ids: Vec<&str> = json["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}
