//! Wedge, interior product and Hodge star on exact forms.

use qkflow::{Form, Rational, Scalar, StructureKind, Vector};

fn main() {
    let a: Form<Rational> = Form::dx(1).wedge(&Form::dx(2)) + Form::dx(3).wedge(&Form::dx(4));
    let b = a.wedge(&a);
    println!("a = {a}");
    println!("a∧a = {b}");
    println!("∂₁⌟(a∧a) = {}", b.interior(&Vector::basis(1)));
    println!("*(a∧a) = {}", b.star());

    let omega = StructureKind::QK.model_form::<Rational>();
    let vol = omega.wedge(&omega).coeff_mask(0xff);
    println!("Ω₀∧Ω₀ = {vol} vol, |Ω₀|² = {}", omega.dot(&omega));
    assert_eq!(vol, <Rational as Scalar>::from_i64(30));
}
