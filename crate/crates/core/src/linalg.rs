//! Exact linear algebra over the rationals: row reduction, kernels, inverses,
//! minimal polynomials and spectral projectors.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

pub type QMatrix = DMatrix<Rational>;

pub fn identity(n: usize) -> QMatrix {
    QMatrix::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
}

pub fn zeros(r: usize, c: usize) -> QMatrix {
    QMatrix::from_element(r, c, Rational::zero())
}

pub fn to_f64(m: &QMatrix) -> DMatrix<f64> {
    m.map(|q| q.to_f64().unwrap_or(f64::NAN))
}

pub fn is_zero(m: &QMatrix) -> bool {
    m.iter().all(Zero::is_zero)
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &QMatrix) -> (QMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else { continue };
        a.swap_rows(r, p);
        let inv = a[(r, c)].recip();
        for j in c..cols {
            let v = &a[(r, j)] * &inv;
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                if a[(r, j)].is_zero() {
                    continue;
                }
                let v = &a[(i, j)] - &f * &a[(r, j)];
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &QMatrix) -> usize {
    rref(m).1.len()
}

/// Columns form a basis of the kernel.
pub fn nullspace(m: &QMatrix) -> QMatrix {
    let (r, pivots) = rref(m);
    let cols = m.ncols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = Rational::one();
        for (row, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -r[(row, f)].clone();
        }
    }
    basis
}

/// A maximal independent subset of the columns.
pub fn column_basis(m: &QMatrix) -> QMatrix {
    let (_, pivots) = rref(m);
    let mut out = zeros(m.nrows(), pivots.len());
    for (k, &p) in pivots.iter().enumerate() {
        out.set_column(k, &m.column(p));
    }
    out
}

pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let mut aug = zeros(n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(m);
    aug.view_mut((0, n), (n, n)).copy_from(&identity(n));
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.view((0, n), (n, n)).into_owned())
}

/// Orthogonal projector `B (BᵀB)⁻¹ Bᵀ` onto the column span of `b`.
pub fn orthogonal_projector(b: &QMatrix) -> QMatrix {
    let b = column_basis(b);
    let n = b.nrows();
    if b.ncols() == 0 {
        return zeros(n, n);
    }
    let bt = b.transpose();
    let gram_inv = inverse(&(&bt * &b)).expect("Gram matrix of independent columns is invertible");
    &b * gram_inv * bt
}

/// Projector onto the intersection of the images of two orthogonal projectors.
pub fn intersect_projectors(p: &QMatrix, q: &QMatrix) -> QMatrix {
    let n = p.nrows();
    let id = identity(n);
    let mut stacked = zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&(&id - p));
    stacked.view_mut((n, 0), (n, n)).copy_from(&(&id - q));
    orthogonal_projector(&nullspace(&stacked))
}

/// Monic minimal polynomial, coefficients from the constant term upwards.
pub fn minimal_polynomial(m: &QMatrix) -> Vec<Rational> {
    let n = m.nrows();
    let mut powers = vec![identity(n)];
    loop {
        let next = powers.last().expect("non-empty") * m;
        powers.push(next);
        let k = powers.len();
        let mut stacked = zeros(n * n, k);
        for (j, p) in powers.iter().enumerate() {
            for (i, x) in p.iter().enumerate() {
                stacked[(i, j)] = x.clone();
            }
        }
        let kernel = nullspace(&stacked);
        if kernel.ncols() > 0 {
            let lead = kernel[(k - 1, 0)].clone();
            return (0..k).map(|i| &kernel[(i, 0)] / &lead).collect();
        }
    }
}

pub fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let n = n.abs().to_u64().ok_or_else(|| Error::NotDiagonalizable("coefficients too large".into()))?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            out.push(BigInt::from(n / d));
        }
        d += 1;
    }
    Ok(out)
}

/// All rational roots of a polynomial (with multiplicity).
pub fn rational_roots(coeffs: &[Rational]) -> Result<Vec<Rational>> {
    let mut poly: Vec<Rational> = coeffs.to_vec();
    while poly.last().is_some_and(Zero::is_zero) {
        poly.pop();
    }
    let mut roots = Vec::new();
    while poly.len() > 1 && poly[0].is_zero() {
        roots.push(Rational::zero());
        poly.remove(0);
    }
    if poly.len() <= 1 {
        return Ok(roots);
    }
    let lcm = poly.iter().fold(BigInt::one(), |l, c| {
        let d = c.denom();
        num_integer::Integer::lcm(&l, d)
    });
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut candidates = Vec::new();
    for p in divisors(&ints[0])? {
        for q in divisors(ints.last().expect("non-constant"))? {
            let r = Rational::new(p.clone(), q);
            candidates.push(r.clone());
            candidates.push(-r);
        }
    }
    candidates.sort();
    candidates.dedup();
    for r in candidates {
        // Deflate repeatedly to pick up multiplicities.
        while poly.len() > 1 && eval_poly(&poly, &r).is_zero() {
            roots.push(r.clone());
            poly = deflate(&poly, &r);
        }
    }
    Ok(roots)
}

fn deflate(poly: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = poly.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (0..n).rev() {
        carry = &poly[i + 1] + &carry * r;
        out[i] = carry.clone();
    }
    out
}

/// Eigenvalues and spectral projectors of a matrix diagonalizable over Q.
/// The projectors are the Lagrange polynomials `Π (M − μ)/(λ − μ)`.
pub fn spectral_projectors(m: &QMatrix) -> Result<Vec<(Rational, QMatrix)>> {
    let minpoly = minimal_polynomial(m);
    let roots = rational_roots(&minpoly)?;
    let degree = minpoly.len() - 1;
    if roots.len() != degree {
        return Err(Error::NotDiagonalizable(format!(
            "minimal polynomial of degree {degree} has only {} rational roots",
            roots.len()
        )));
    }
    let mut distinct = roots.clone();
    distinct.dedup();
    if distinct.len() != roots.len() {
        return Err(Error::NotDiagonalizable("repeated root in the minimal polynomial".into()));
    }
    let n = m.nrows();
    let id = identity(n);
    let mut out = Vec::new();
    for lambda in &roots {
        let mut p = id.clone();
        for mu in roots.iter().filter(|mu| *mu != lambda) {
            let factor = (m - &id * mu.clone()) * (lambda - mu).recip();
            p *= factor;
        }
        out.push((lambda.clone(), p));
    }
    Ok(out)
}

/// Rational matrix from integer entries.
pub fn from_i64(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> QMatrix {
    QMatrix::from_fn(rows, cols, |i, j| Rational::from_integer(BigInt::from(f(i, j))))
}

pub fn trace(m: &QMatrix) -> Rational {
    (0..m.nrows()).fold(Rational::zero(), |acc, i| acc + &m[(i, i)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn kernel_and_inverse() {
        let m = from_i64(2, 3, |i, j| [[1, 2, 3], [2, 4, 7]][i][j]);
        assert_eq!(rank(&m), 2);
        let k = nullspace(&m);
        assert_eq!(k.ncols(), 1);
        assert!(is_zero(&(&m * &k)));
        let a = from_i64(2, 2, |i, j| [[2, 1], [1, 1]][i][j]);
        assert_eq!(&a * inverse(&a).unwrap(), identity(2));
        assert!(inverse(&from_i64(2, 2, |_, _| 1)).is_none());
    }

    #[test]
    fn projectors_of_a_reflection() {
        let m = from_i64(2, 2, |i, j| [[0, 1], [1, 0]][i][j]);
        assert_eq!(minimal_polynomial(&m), vec![ratio(-1, 1), ratio(0, 1), ratio(1, 1)]);
        let ps = spectral_projectors(&m).unwrap();
        assert_eq!(ps.len(), 2);
        let sum = &ps[0].1 + &ps[1].1;
        assert_eq!(sum, identity(2));
        for (l, p) in &ps {
            assert_eq!(&m * p, p * l.clone());
            assert_eq!(trace(p), Rational::one());
        }
    }

    #[test]
    fn jordan_block_rejected() {
        let m = from_i64(2, 2, |i, j| [[1, 1], [0, 1]][i][j]);
        assert!(matches!(spectral_projectors(&m), Err(Error::NotDiagonalizable(_))));
    }

    #[test]
    fn roots_with_fractions() {
        // (2x - 1)(x + 3) x = 2x^3 + 5x^2 - 3x
        let roots = rational_roots(&[ratio(0, 1), ratio(-3, 1), ratio(5, 1), ratio(2, 1)]).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(roots.contains(&ratio(1, 2)) && roots.contains(&ratio(-3, 1)));
    }

    #[test]
    fn projector_intersection() {
        let p = orthogonal_projector(&from_i64(3, 2, |i, j| [[1, 0], [0, 1], [0, 0]][i][j]));
        let q = orthogonal_projector(&from_i64(3, 2, |i, j| [[0, 0], [1, 0], [0, 1]][i][j]));
        let r = intersect_projectors(&p, &q);
        assert_eq!(rank(&r), 1);
        assert_eq!(r[(1, 1)], Rational::one());
    }
}
