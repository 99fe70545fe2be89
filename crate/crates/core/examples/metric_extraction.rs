//! Recovering the metric from a 4-form alone.

use nalgebra::SMatrix;
use qkflow::structures::metric_from_form;
use qkflow::StructureKind;

fn main() {
    // a linear change of basis A acts on the model form; the metric is AᵀA
    let a = SMatrix::<f64, 8, 8>::from_fn(|i, j| if i == j { 1.0 + 0.1 * i as f64 } else if j == i + 1 { 0.3 } else { 0.0 });
    for kind in [StructureKind::QK, StructureKind::Spin7] {
        let xi = kind.model_form::<f64>().substitute(&a);
        let g = metric_from_form(&xi, kind).unwrap();
        let err = (g.matrix() - a.transpose() * a).abs().max();
        println!("{}: |g − AᵀA| = {err:.2e}", kind.name());
    }
}
