//! A steady soliton on ℝ⁸ and the monotone Θ functional.

use qkflow::flow::{self, SolitonData};
use qkflow::scenarios;

fn main() {
    let s = scenarios::builtin("euclid_soliton").unwrap().prepared().unwrap();
    let sol = SolitonData::euclid_steady();
    let points: Vec<Vec<f64>> = (0..5).map(|i| vec![-0.5 + 0.25 * i as f64]).collect();
    let r = flow::soliton_residual(&s, &sol, &points).unwrap();
    println!("div T − T(∇f): {:.1e}, (div T)⋄Ω − L_XΩ: {:.1e}", r.gradient.unwrap(), r.lie);

    let ts: Vec<f64> = (0..8).map(|i| -1.0 + 0.25 * i as f64).collect();
    let theta = flow::theta_euclidean(&s, &sol, 1.0, &ts, 40).unwrap();
    for sample in &theta.samples {
        println!("t = {:+.2}  Θ = {:.12} (closed form {:.12})", sample.t, sample.quadrature, sample.closed_form);
    }
    println!("non-increasing: {}", theta.non_increasing);
}
