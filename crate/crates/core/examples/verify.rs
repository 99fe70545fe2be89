//! Run one verification suite and print its lines.

use qkflow::verify::{Config, Verifier};

fn main() {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "structures".into());
    let report = Verifier::new(Config::default()).run(Some(&suite)).unwrap();
    for c in &report.checks {
        println!("{}", c.line());
    }
    println!("κ_conv = {}", report.calibration.kappa_conv);
}
