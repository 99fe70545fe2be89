//! Exterior algebra of an oriented 8-dimensional inner-product space.
//!
//! A [`Form`] stores its coefficients sparsely, keyed by a bit mask of the
//! multi-index (bit `i - 1` set for `dx_i`). Monomials `dx_I` with increasing
//! `I` are orthonormal for the Euclidean metric, and `dx_1...8` is the positive
//! volume form.

pub mod json;
mod metric;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

pub use json::{FormJson, JsonScalar};
pub use metric::Metric;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DIM: usize = 8;
pub const VOLUME_MASK: u8 = 0xff;

/// Converts a 1-based multi-index into its bit mask, checking monotonicity.
pub fn mask_of(indices: &[u8]) -> Result<u8> {
    let mut mask = 0u8;
    let mut last = 0u8;
    for &i in indices {
        if i <= last || i as usize > DIM {
            return Err(Error::BadIndex(indices.to_vec()));
        }
        mask |= 1 << (i - 1);
        last = i;
    }
    Ok(mask)
}

/// The increasing 1-based multi-index of a mask.
pub fn indices_of(mask: u8) -> Vec<u8> {
    (0..8u8).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

/// Sign of `dx_A ∧ dx_B` relative to `dx_{A∪B}`; zero if they overlap.
pub fn wedge_sign(a: u8, b: u8) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> j).count_ones();
        rest &= rest - 1;
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Masks of degree `k` in lexicographic order of their multi-indices. This is
/// the coordinate order used by [`Form::to_vec`] and all matrices on forms.
pub fn basis(k: usize) -> &'static [u8] {
    static TABLE: OnceLock<Vec<Vec<u8>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..=DIM)
            .map(|k| {
                let mut masks: Vec<u8> =
                    (0..=255u8).filter(|m| m.count_ones() as usize == k).collect();
                masks.sort_by_key(|m| indices_of(*m));
                masks
            })
            .collect()
    });
    &table[k]
}

/// Position of a mask within [`basis`] of its degree.
pub fn basis_position(mask: u8) -> usize {
    static POS: OnceLock<[usize; 256]> = OnceLock::new();
    let pos = POS.get_or_init(|| {
        let mut p = [0usize; 256];
        for k in 0..=DIM {
            for (i, m) in basis(k).iter().enumerate() {
                p[*m as usize] = i;
            }
        }
        p
    });
    pos[mask as usize]
}

/// A vector, given by its components in the frame dual to the coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector<S>(pub [S; DIM]);

impl<S: Scalar> Vector<S> {
    pub fn zero() -> Self {
        Vector(std::array::from_fn(|_| S::zero()))
    }

    /// The frame vector `E_i` (1-based).
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i - 1] = S::one();
        v
    }

    pub fn from_fn(f: impl FnMut(usize) -> S) -> Self {
        Vector(std::array::from_fn(f))
    }

    pub fn map<T>(&self, mut f: impl FnMut(&S) -> T) -> Vector<T> {
        Vector(std::array::from_fn(|i| f(&self.0[i])))
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }
}

impl<S: Scalar> Add for Vector<S> {
    type Output = Vector<S>;
    fn add(self, rhs: Self) -> Self {
        Vector::from_fn(|i| self.0[i].clone() + rhs.0[i].clone())
    }
}

impl<S: Scalar> Sub for Vector<S> {
    type Output = Vector<S>;
    fn sub(self, rhs: Self) -> Self {
        Vector::from_fn(|i| self.0[i].clone() - rhs.0[i].clone())
    }
}

impl Vector<f64> {
    pub fn from_slice(v: &[f64]) -> Self {
        Vector::from_fn(|i| v.get(i).copied().unwrap_or(0.0))
    }
}

/// A homogeneous exterior form of fixed degree.
#[derive(Clone, PartialEq)]
pub struct Form<S> {
    degree: usize,
    entries: BTreeMap<u8, S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "degree {degree} exceeds 8");
        Form { degree, entries: BTreeMap::new() }
    }

    pub fn scalar(c: S) -> Self {
        Form::from_terms(0, [(0u8, c)])
    }

    /// `c * dx_I` for a 1-based increasing multi-index.
    pub fn monomial(indices: &[u8], c: S) -> Result<Self> {
        let mask = mask_of(indices)?;
        Ok(Form::from_terms(indices.len(), [(mask, c)]))
    }

    /// `dx_i` (1-based).
    pub fn dx(i: usize) -> Self {
        Form::from_terms(1, [(1u8 << (i - 1), S::one())])
    }

    pub fn volume() -> Self {
        Form::from_terms(DIM, [(VOLUME_MASK, S::one())])
    }

    /// Builds a form from `(mask, coefficient)` pairs; repeated masks add up.
    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (u8, S)>) -> Self {
        let mut f = Form::zero(degree);
        for (m, c) in terms {
            debug_assert_eq!(m.count_ones() as usize, degree);
            f.add_term(m, c);
        }
        f
    }

    /// Builds a form from coefficients in [`basis`] order.
    pub fn from_vec(degree: usize, coeffs: &[S]) -> Self {
        Form::from_terms(degree, basis(degree).iter().copied().zip(coeffs.iter().cloned()))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entries(&self) -> impl Iterator<Item = (u8, &S)> {
        self.entries.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|c| c.is_zero())
    }

    pub fn coeff_mask(&self, mask: u8) -> S {
        self.entries.get(&mask).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeff(&self, indices: &[u8]) -> Result<S> {
        Ok(self.coeff_mask(mask_of(indices)?))
    }

    pub fn add_term(&mut self, mask: u8, c: S) {
        if c.is_zero() {
            return;
        }
        match self.entries.remove(&mask) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.entries.insert(mask, sum);
                }
            }
            None => {
                self.entries.insert(mask, c);
            }
        }
    }

    /// Coefficients in [`basis`] order.
    pub fn to_vec(&self) -> Vec<S> {
        basis(self.degree).iter().map(|m| self.coeff_mask(*m)).collect()
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> Form<T> {
        Form::from_terms(self.degree, self.entries.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        self.map(|x| x.scale_i64(n))
    }

    /// Sum of squared moduli of the coefficients (value parts).
    pub fn norm2(&self) -> f64 {
        self.entries.values().map(|c| c.magnitude().powi(2)).fold(0.0, |a, b| a + b)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Exterior product; errors if the degrees add up to more than 8.
    pub fn try_wedge(&self, other: &Form<S>) -> Result<Form<S>> {
        let degree = self.degree + other.degree;
        if degree > DIM {
            return Err(Error::DegreeOverflow(degree));
        }
        let mut out = Form::zero(degree);
        for (&a, ca) in &self.entries {
            for (&b, cb) in &other.entries {
                match wedge_sign(a, b) {
                    0 => {}
                    1 => out.add_term(a | b, ca.clone() * cb.clone()),
                    _ => out.add_term(a | b, -(ca.clone() * cb.clone())),
                }
            }
        }
        Ok(out)
    }

    /// Exterior product.
    ///
    /// # Panics
    /// If the degrees add up to more than 8; use [`Form::try_wedge`] to
    /// handle that case.
    pub fn wedge(&self, other: &Form<S>) -> Form<S> {
        self.try_wedge(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Contraction `E_i ⌟ self` with a frame vector (1-based).
    pub fn interior_basis(&self, i: usize) -> Form<S> {
        if self.degree == 0 {
            return Form::zero(0);
        }
        let bit = 1u8 << (i - 1);
        let below = bit - 1;
        let mut out = Form::zero(self.degree - 1);
        for (&m, c) in &self.entries {
            if m & bit == 0 {
                continue;
            }
            let c = if (m & below).count_ones().is_multiple_of(2) { c.clone() } else { -c.clone() };
            out.add_term(m & !bit, c);
        }
        out
    }

    /// Contraction `v ⌟ self`.
    pub fn interior(&self, v: &Vector<S>) -> Form<S> {
        if self.degree == 0 {
            return Form::zero(0);
        }
        let mut out = Form::zero(self.degree - 1);
        for (i, vi) in v.0.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (m, c) in self.interior_basis(i + 1).entries {
                out.add_term(m, vi.clone() * c);
            }
        }
        out
    }

    /// Hodge star for the Euclidean metric and standard orientation.
    pub fn star(&self) -> Form<S> {
        let mut out = Form::zero(DIM - self.degree);
        for (&m, c) in &self.entries {
            let comp = !m;
            let c = if wedge_sign(m, comp) > 0 { c.clone() } else { -c.clone() };
            out.add_term(comp, c);
        }
        out
    }

    /// Hodge star for a general metric and orientation `±1`.
    pub fn hodge(&self, g: &Metric, orientation: i32) -> Result<Form<S>> {
        let starred = if g.is_euclidean() {
            self.star()
        } else {
            // Write the form in an orthonormal coframe θ = Lᵀ dx, star there,
            // and substitute back.
            let l = g.cholesky()?;
            let l_inv_t = l.try_inverse().ok_or(Error::NotPositiveDefinite)?.transpose();
            let in_theta = self.substitute(&l_inv_t);
            in_theta.star().substitute(&l.transpose())
        };
        Ok(if orientation >= 0 { starred } else { starred.scale_i64(-1) })
    }

    /// Linear substitution `dx_i ↦ Σ_j m[(i, j)] dx_j` extended multiplicatively.
    pub fn substitute(&self, m: &nalgebra::SMatrix<f64, 8, 8>) -> Form<S> {
        let images: Vec<Form<S>> = (0..DIM)
            .map(|i| {
                Form::from_terms(1, (0..DIM).map(|j| (1u8 << j, S::from_f64(m[(i, j)]))))
            })
            .collect();
        let mut out = Form::zero(self.degree);
        for (&mask, c) in &self.entries {
            let mut term = Form::scalar(c.clone());
            for i in indices_of(mask) {
                term = term.wedge(&images[i as usize - 1]);
            }
            out = out + term;
        }
        out
    }

    /// Bilinear pairing `⟨a, b⟩` defined by `a ∧ *b = ⟨a, b⟩ vol`.
    pub fn try_inner(&self, other: &Form<S>, g: &Metric) -> Result<S> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        if g.is_euclidean() {
            return Ok(self.dot(other));
        }
        Ok(self.wedge(&other.hodge(g, 1)?).coeff_mask(VOLUME_MASK))
    }

    /// Euclidean pairing of coefficient vectors, ignoring degrees.
    pub fn dot(&self, other: &Form<S>) -> S {
        let mut acc = S::zero();
        for (m, c) in &self.entries {
            if let Some(d) = other.entries.get(m) {
                acc = acc + c.clone() * d.clone();
            }
        }
        acc
    }

    /// Evaluates the form on `k = degree` vectors.
    pub fn evaluate(&self, vs: &[Vector<S>]) -> Result<S> {
        if vs.len() != self.degree {
            return Err(Error::Arity { expected: self.degree, found: vs.len() });
        }
        let minors = minors(vs);
        let mut acc = S::zero();
        for (&m, c) in &self.entries {
            acc = acc + c.clone() * minors[m as usize].clone();
        }
        Ok(acc)
    }

    /// Applies the derivation of Λ* induced by `e^m ↦ Σ_i a[i][m] e^i`.
    pub fn derivation(&self, a: &[[S; DIM]; DIM]) -> Form<S> {
        let mut out = Form::zero(self.degree);
        for (&mask, c) in &self.entries {
            for m in 0..DIM {
                let bit = 1u8 << m;
                if mask & bit == 0 {
                    continue;
                }
                let rest = mask & !bit;
                let s_out = if (mask & (bit - 1)).count_ones().is_multiple_of(2) { 1 } else { -1 };
                for (i, row) in a.iter().enumerate() {
                    let aim = &row[m];
                    if aim.is_zero() {
                        continue;
                    }
                    let s_in = wedge_sign(1 << i, rest);
                    if s_in == 0 {
                        continue;
                    }
                    let t = aim.clone() * c.clone();
                    out.add_term(rest | (1 << i), if s_in * s_out > 0 { t } else { -t });
                }
            }
        }
        out
    }
}

/// For vectors `v_1..v_k`, entry `I` (|I| = k) is `det[v_p(I_q)]`, i.e.
/// `dx_I(v_1, ..., v_k)`. Computed by Laplace expansion along the last row.
fn minors<S: Scalar>(vs: &[Vector<S>]) -> Vec<S> {
    let mut table: Vec<S> = vec![S::zero(); 256];
    table[0] = S::one();
    for r in 1..=vs.len() {
        let row = &vs[r - 1];
        let mut next = vec![S::zero(); 256];
        for &mask in basis(r) {
            let mut acc = S::zero();
            let mut q = 0usize;
            for j in 0..DIM {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let minor = &table[(mask & !(1 << j)) as usize];
                if !minor.is_zero() && !row.0[j].is_zero() {
                    let t = row.0[j].clone() * minor.clone();
                    acc = if (r - 1 + q).is_multiple_of(2) { acc + t } else { acc - t };
                }
                q += 1;
            }
            next[mask as usize] = acc;
        }
        table = next;
    }
    table
}

impl Form<f64> {
    /// Dense `f64` coefficient vector in [`basis`] order.
    pub fn to_dvector(&self) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_vec(self.to_vec())
    }

    pub fn approx_eq(&self, other: &Form<f64>, tol: f64) -> bool {
        (self.clone() - other.clone()).max_abs() <= tol
    }
}

impl<S: Scalar> Add for Form<S> {
    type Output = Form<S>;
    fn add(mut self, rhs: Form<S>) -> Form<S> {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        for (m, c) in rhs.entries {
            self.add_term(m, c);
        }
        self
    }
}

impl<S: Scalar> Sub for Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: Form<S>) -> Form<S> {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        Form { degree: self.degree, entries: self.entries.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<S: Scalar> Mul<&Form<S>> for &Form<S> {
    type Output = Form<S>;
    fn mul(self, rhs: &Form<S>) -> Form<S> {
        self.wedge(rhs)
    }
}

impl<S: Scalar> std::iter::Sum for Form<S> {
    /// Panics on an empty iterator (the degree would be unknown).
    fn sum<I: Iterator<Item = Form<S>>>(mut iter: I) -> Form<S> {
        let first = iter.next().expect("sum of an empty sequence of forms");
        iter.fold(first, |a, b| a + b)
    }
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form<{}>{{", self.degree)?;
        for (i, (m, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let idx: String = indices_of(*m).iter().map(|d| d.to_string()).collect();
            write!(f, "dx{idx}: {c:?}")?;
        }
        write!(f, "}}")
    }
}

/// `c₁ dx_I + c₂ dx_J + …`, or `0`.
impl<S: Scalar + fmt::Display> fmt::Display for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(Vec<u8>, &S)> = self.entries.iter().map(|(m, c)| (indices_of(*m), c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        for (i, (idx, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let idx: String = idx.iter().map(|d| d.to_string()).collect();
            if idx.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c}) dx{idx}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn basis_sizes_and_order() {
        let sizes: Vec<usize> = (0..=8).map(|k| basis(k).len()).collect();
        assert_eq!(sizes, vec![1, 8, 28, 56, 70, 56, 28, 8, 1]);
        assert_eq!(indices_of(basis(2)[0]), vec![1, 2]);
        assert_eq!(indices_of(basis(2)[7]), vec![2, 3]);
        assert_eq!(basis_position(mask_of(&[7, 8]).unwrap()), 27);
    }

    #[test]
    fn wedge_and_interior_signs() {
        let dx1 = Form::<Rational>::dx(1);
        let dx2 = Form::<Rational>::dx(2);
        assert_eq!(dx1.wedge(&dx2), Form::monomial(&[1, 2], q(1)).unwrap());
        assert_eq!(dx2.wedge(&dx1), Form::monomial(&[1, 2], q(-1)).unwrap());
        let dx12 = dx1.wedge(&dx2);
        assert_eq!(dx12.interior_basis(1), dx2);
        assert_eq!(dx12.interior_basis(2), -dx1);
        assert!(Form::<f64>::volume().try_wedge(&Form::dx(1)).is_err());
        assert!(Form::<f64>::monomial(&[2, 1], 1.0).is_err());
    }

    #[test]
    fn star_of_basis() {
        let a = Form::<Rational>::monomial(&[1, 2, 3, 4], q(1)).unwrap();
        assert_eq!(a.star(), Form::monomial(&[5, 6, 7, 8], q(1)).unwrap());
        for k in 0..=8 {
            for &m in basis(k) {
                let f = Form::from_terms(k, [(m, q(1))]);
                // ** = (-1)^{k(8-k)}, which is -1 on odd degrees.
                let sign = if k % 2 == 0 { 1 } else { -1 };
                assert_eq!(f.star().star(), f.scale_i64(sign));
                assert_eq!(f.wedge(&f.star()), Form::volume());
            }
        }
    }

    #[test]
    fn evaluation() {
        let dx12 = Form::<f64>::monomial(&[1, 2], 1.0).unwrap();
        let (e1, e2) = (Vector::basis(1), Vector::basis(2));
        assert_eq!(dx12.evaluate(&[e1.clone(), e2.clone()]).unwrap(), 1.0);
        assert_eq!(dx12.evaluate(&[e2, e1]).unwrap(), -1.0);
        let all: Vec<Vector<f64>> = (1..=8).map(Vector::basis).collect();
        assert_eq!(Form::<f64>::volume().evaluate(&all).unwrap(), 1.0);
        assert!(dx12.evaluate(&all[..1]).is_err());
    }

    #[test]
    fn star_then_evaluate_matches_permutation_signs() {
        for &m in basis(4) {
            let f = Form::<f64>::from_terms(4, [(m, 1.0)]);
            let comp: Vec<Vector<f64>> =
                indices_of(!m).iter().map(|&i| Vector::basis(i as usize)).collect();
            let expected = wedge_sign(m, !m) as f64;
            assert_eq!(f.star().evaluate(&comp).unwrap(), expected);
        }
    }

    #[test]
    fn hodge_with_diagonal_metric() {
        let mut d = [1.0; 8];
        d[0] = 4.0;
        let g = Metric::diagonal(&d);
        // θ1 = 2 dx1 is unit, so *dx1 = ½ *θ1 = ½ dx2...8.
        let s = Form::<f64>::dx(1).hodge(&g, 1).unwrap();
        let expected = Form::dx(1).star().scale(&0.5);
        assert!(s.approx_eq(&expected, 1e-12), "{s:?}");
        assert!(Form::<f64>::dx(1).hodge(&Metric::diagonal(&[-1.0; 8]), 1).is_err());
        let neg = Form::<f64>::dx(1).hodge(&Metric::euclidean(), -1).unwrap();
        assert!(neg.approx_eq(&Form::dx(1).star().scale(&-1.0), 0.0));
    }

    #[test]
    fn derivation_with_identity_scales_by_degree() {
        let a: [[f64; 8]; 8] = std::array::from_fn(|i| std::array::from_fn(|j| (i == j) as i32 as f64));
        let f = Form::<f64>::monomial(&[1, 3, 6], 2.0).unwrap();
        assert!(f.derivation(&a).approx_eq(&f.scale(&3.0), 0.0));
    }
}
