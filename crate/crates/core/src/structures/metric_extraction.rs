use nalgebra::{SMatrix, SVector};

use super::StructureKind;
use crate::error::{Error, Result};
use crate::exterior::{Form, Metric, Vector, DIM, VOLUME_MASK};

fn constant(kind: StructureKind) -> f64 {
    match kind {
        StructureKind::QK => 125.0 / (4.0 * 6f64.cbrt()),
        StructureKind::Spin7 => 343.0 / 6f64.powf(7.0 / 3.0),
    }
}

/// Completes `x` to a basis `x, e_1..e_7`: drop the standard basis vector
/// most parallel to `x`, Gram-Schmidt the rest against `x`, and flip `e_7`
/// if needed so that `orientation · det[x, e_1..e_7] > 0`.
fn extend_basis(x: &SVector<f64, 8>, orientation: f64) -> Vec<SVector<f64, 8>> {
    let drop = x.iamax();
    let mut frame: Vec<SVector<f64, 8>> = vec![x.normalize()];
    for i in (0..DIM).filter(|&i| i != drop) {
        let mut v = SVector::<f64, 8>::zeros();
        v[i] = 1.0;
        for u in &frame {
            v -= u * u.dot(&v);
        }
        frame.push(v.normalize());
    }
    let mut basis: Vec<SVector<f64, 8>> = frame[1..].to_vec();
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    m.set_column(0, x);
    for (k, e) in basis.iter().enumerate() {
        m.set_column(k + 1, e);
    }
    if m.determinant() * orientation < 0.0 {
        basis[6] = -basis[6];
    }
    basis
}

fn to_vector(v: &SVector<f64, 8>) -> Vector<f64> {
    Vector::from_fn(|i| v[i])
}

/// `g(X, X)` recovered from the 4-form `a` alone.
pub fn quadratic_form_value(a: &Form<f64>, kind: StructureKind, x: &Vector<f64>) -> Result<f64> {
    if a.degree() != 4 {
        return Err(Error::DegreeMismatch { expected: 4, found: a.degree() });
    }
    let top = a.wedge(a).coeff_mask(VOLUME_MASK);
    if top.abs() < 1e-300 {
        return Err(Error::Degenerate("ξ ∧ ξ = 0".into()));
    }
    let xs = SVector::<f64, 8>::from_fn(|i, _| x.0[i]);
    if xs.norm() == 0.0 {
        return Ok(0.0);
    }
    let es: Vec<Vector<f64>> = extend_basis(&xs, top.signum()).iter().map(to_vector).collect();
    let xa = a.interior(x);
    let denominator = xa.wedge(a).evaluate(&es)?;
    if denominator.abs() < 1e-300 {
        return Err(Error::Degenerate(format!("(X⌟ξ)∧ξ vanishes on the completed basis for X = {:?}", x.0)));
    }
    let contracted: Vec<Form<f64>> = es.iter().map(|e| xa.interior(e)).collect();
    let b = SMatrix::<f64, 7, 7>::from_fn(|i, j| {
        contracted[i].wedge(&contracted[j]).wedge(&xa).evaluate(&es).expect("arity 7")
    });
    let value = constant(kind) * b.determinant().cbrt() / denominator.powi(3);
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Degenerate(format!("g(X,X)² = {value:e} is not positive")));
    }
    Ok(value.sqrt())
}

/// The metric determined by a non-degenerate 4-form of the given kind.
///
/// Diagonal entries come from `X = e_i`; off-diagonal ones by polarization,
/// `g(X,Y) = ¼(g(X+Y, X+Y) − g(X−Y, X−Y))`.
pub fn metric_from_form(a: &Form<f64>, kind: StructureKind) -> Result<Metric> {
    let e = |i: usize| Vector::<f64>::basis(i + 1);
    let mut g = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..DIM {
        g[(i, i)] = quadratic_form_value(a, kind, &e(i))?;
    }
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let plus = quadratic_form_value(a, kind, &(e(i) + e(j)))?;
            let minus = quadratic_form_value(a, kind, &(e(i) - e(j)))?;
            g[(i, j)] = 0.25 * (plus - minus);
            g[(j, i)] = g[(i, j)];
        }
    }
    let metric = Metric::new(g)?;
    if !metric.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(metric)
}
