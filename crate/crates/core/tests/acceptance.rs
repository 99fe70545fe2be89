//! The fourteen acceptance criteria, one line each. Runs without the test
//! harness so the lines are always printed.

use std::process::ExitCode;

use qkflow::verify::{Config, Status, Verifier};

fn main() -> ExitCode {
    let checks = Verifier::new(Config::default()).acceptance();
    assert_eq!(checks.len(), 14);
    for c in &checks {
        println!("{}", c.line());
    }
    let failed: Vec<&str> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.id.as_str()).collect();
    println!("acceptance: {}/14 passed", 14 - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
