use nalgebra::SMatrix;

use super::{Form, Vector, DIM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Mat8 = SMatrix<f64, 8, 8>;

/// A symmetric bilinear form on the model space, in the frame basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: Mat8,
}

impl Metric {
    pub fn euclidean() -> Self {
        Metric { g: Mat8::identity() }
    }

    pub fn diagonal(d: &[f64; DIM]) -> Self {
        Metric { g: Mat8::from_diagonal(&nalgebra::SVector::<f64, 8>::from_column_slice(d)) }
    }

    /// Rejects non-symmetric input.
    pub fn new(g: Mat8) -> Result<Self> {
        let asym = (g - g.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + g.abs().max()) {
            return Err(Error::InvalidArgument(format!("metric is not symmetric (defect {asym:.2e})")));
        }
        Ok(Metric { g })
    }

    pub fn matrix(&self) -> &Mat8 {
        &self.g
    }

    pub fn is_euclidean(&self) -> bool {
        self.g == Mat8::identity()
    }

    /// Lower-triangular `L` with `g = L Lᵀ`; fails unless positive definite.
    pub fn cholesky(&self) -> Result<Mat8> {
        nalgebra::Cholesky::new(self.g).map(|c| c.l()).ok_or(Error::NotPositiveDefinite)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    pub fn apply(&self, x: &Vector<f64>, y: &Vector<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                acc += x.0[i] * self.g[(i, j)] * y.0[j];
            }
        }
        acc
    }

    /// `X ↦ g(X, ·)`.
    pub fn flat<S: Scalar>(&self, x: &Vector<S>) -> Form<S> {
        Form::from_terms(
            1,
            (0..DIM).map(|i| {
                let c = (0..DIM)
                    .fold(S::zero(), |acc, j| acc + S::from_f64(self.g[(i, j)]) * x.0[j].clone());
                (1u8 << i, c)
            }),
        )
    }

    /// Inverse of [`Metric::flat`]; fails for singular metrics.
    pub fn sharp<S: Scalar>(&self, a: &Form<S>) -> Result<Vector<S>> {
        if a.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: a.degree() });
        }
        let inv = self.g.try_inverse().ok_or(Error::NotPositiveDefinite)?;
        Ok(Vector::from_fn(|i| {
            (0..DIM).fold(S::zero(), |acc, j| acc + S::from_f64(inv[(i, j)]) * a.coeff_mask(1 << j))
        }))
    }

    /// Pullback `Rᵀ g R` under a linear map of the model space.
    pub fn pullback(&self, r: &Mat8) -> Metric {
        Metric { g: r.transpose() * self.g * r }
    }
}
