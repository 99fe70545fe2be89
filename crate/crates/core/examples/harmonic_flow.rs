//! The harmonic flow on the two homogeneous families, against the closed forms.

use qkflow::flow;

fn main() {
    for fam in [flow::hh2_family(), flow::su3_family()] {
        let c0 = fam.initial_rate(fam.p_start).unwrap();
        let (trace, dt) = fam.run(5.0, 0.01).unwrap();
        let fit = flow::fit_rate(&fam, &trace, c0).unwrap();
        println!(
            "{:<12} {} ≈ {}(C t): C = {:.9}, dt = {dt:.3e}, max deviation {:.1e}, C/printed = {:.9}",
            fam.scenario.name,
            fam.observable_name,
            fam.profile_name,
            fit.rate,
            fit.max_deviation,
            fit.rate / fam.paper_rate
        );
    }
    let su3 = flow::su3_family().scenario;
    let (lhs, rhs) = flow::dissipation_check(&su3, &[0.9]).unwrap();
    println!("d/dt|T|² = {lhs:.12}, −2|div T|² = {rhs:.12}");
}
