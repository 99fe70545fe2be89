//! Splitting Λ² and Λ⁴ under Sp(2)Sp(1), and the diamond operator.

use qkflow::structures::{diamond, iota3};
use qkflow::{Form, Rational, StructureKind};

fn main() {
    let s = StructureKind::QK.standard();
    for p in &s.lambda2.pieces {
        println!("*(α∧Ω₀) = {}α on a {}-dimensional piece", p.eigenvalue, p.dim);
    }
    for p in s.lambda4().unwrap() {
        println!("{}: dimension {}", p.label, p.dim);
    }

    let e = |i, j| Form::<Rational>::dx(i).wedge(&Form::dx(j));
    let alpha = e(2, 8) + e(3, 5);
    let psi = diamond(&alpha, &s.xi);
    println!("α = {alpha}\nα⋄Ω₀ = {psi}\nι₃(α⋄Ω₀) = {}", iota3(&psi, &s.xi));
    for (label, part) in s.lambda2_classify(&(e(1, 2) + e(1, 5))).unwrap() {
        println!("dx12 + dx15 ∈ {label}: {part}");
    }
}
