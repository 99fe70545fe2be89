//! Intrinsic torsion and its divergence on the built-in scenarios.

use qkflow::scenarios;

fn main() {
    for name in scenarios::BUILTIN_NAMES {
        let s = scenarios::builtin(name).unwrap().prepared().unwrap();
        let mut point = vec![0.4; s.n_coords()];
        point.extend(s.default_params());
        let g = s.geometry_jet(&point, false).unwrap();
        let div = g.divergence().map(|j| j.value);
        println!("{name:<16} ½|T|² = {:.6}  div T = {div}", g.energy_density().value);
    }
    let su3 = scenarios::builtin("su3").unwrap();
    let t = su3.geometry::<qkflow::Rational>(&[qkflow::Rational::from_integer(0.into())]).unwrap();
    println!("su3 at f = 0, exactly: T(E5) = {}", t.torsion()[4]);
}
