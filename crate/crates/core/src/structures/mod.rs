//! The model 4-forms Ω (Sp(2)Sp(1)) and Φ (Spin(7)) and the algebra attached
//! to them: Λ² and Λ⁴ module projectors, the diamond operator, the triple
//! contraction, and recovery of the metric from the 4-form.
//!
//! Module data for the standard forms is computed once, in exact arithmetic,
//! and cached. Operations that only need the spectrum (for instance the
//! m-projection of a form in a rotated frame) work for any 4-form of the
//! given kind and any scalar type.

mod metric_extraction;

use std::sync::OnceLock;

use nalgebra::DMatrix;

pub use metric_extraction::{metric_from_form, quadratic_form_value};

use crate::error::{Error, Result};
use crate::exterior::{basis, Form, Metric, Vector, DIM};
use crate::linalg::{self, QMatrix};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    /// Sp(2)Sp(1), modelled on Ω.
    QK,
    /// Spin(7), modelled on Φ.
    Spin7,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::QK => "qk",
            StructureKind::Spin7 => "spin7",
        }
    }

    /// `ξ ∧ ξ = normalization · vol`.
    pub fn normalization(self) -> i64 {
        match self {
            StructureKind::QK => 30,
            StructureKind::Spin7 => 14,
        }
    }

    /// The model form with integer coefficients.
    pub fn model_form<S: Scalar>(self) -> Form<S> {
        let [w1, w2, w3] = model_triple::<S>();
        let sq = |w: &Form<S>| w.wedge(w);
        let sum = match self {
            StructureKind::QK => sq(&w1) + sq(&w2) + sq(&w3),
            StructureKind::Spin7 => -sq(&w1) + sq(&w2) + sq(&w3),
        };
        // Every coefficient of ω∧ω is even, so halving is exact.
        sum.map(|c| c.clone() / S::from_i64(2))
    }

    pub fn standard(self) -> &'static StructureForm {
        static QK: OnceLock<StructureForm> = OnceLock::new();
        static SPIN7: OnceLock<StructureForm> = OnceLock::new();
        let cell = match self {
            StructureKind::QK => &QK,
            StructureKind::Spin7 => &SPIN7,
        };
        cell.get_or_init(|| StructureForm::build(self).expect("standard structure is well formed"))
    }
}

impl std::str::FromStr for StructureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qk" | "sp2sp1" => Ok(StructureKind::QK),
            "spin7" => Ok(StructureKind::Spin7),
            _ => Err(Error::InvalidArgument(format!("unknown structure kind '{s}' (expected qk or spin7)"))),
        }
    }
}

fn form2<S: Scalar>(terms: &[(i64, [u8; 2])]) -> Form<S> {
    terms
        .iter()
        .map(|(c, idx)| Form::monomial(idx, S::from_i64(*c)).expect("valid index"))
        .sum()
}

/// ω₁, ω₂, ω₃ on ℝ⁸.
pub fn model_triple<S: Scalar>() -> [Form<S>; 3] {
    [
        form2(&[(1, [1, 2]), (1, [3, 4]), (1, [5, 6]), (1, [7, 8])]),
        form2(&[(1, [1, 3]), (-1, [2, 4]), (1, [5, 7]), (-1, [6, 8])]),
        form2(&[(1, [1, 4]), (1, [2, 3]), (1, [5, 8]), (1, [6, 7])]),
    ]
}

/// One eigenspace of `α ↦ *(α ∧ ξ)` on Λ².
#[derive(Clone, Debug)]
pub struct Lambda2Piece {
    pub eigenvalue: Rational,
    pub dim: usize,
    pub projector: QMatrix,
}

#[derive(Clone, Debug)]
pub struct Lambda2Splitting {
    pub pieces: Vec<Lambda2Piece>,
    /// Index of the piece complementary to the stabilizer algebra.
    pub m_index: usize,
}

impl Lambda2Splitting {
    pub fn m(&self) -> &Lambda2Piece {
        &self.pieces[self.m_index]
    }

    pub fn eigenvalues(&self) -> Vec<Rational> {
        self.pieces.iter().map(|p| p.eigenvalue.clone()).collect()
    }

    /// Label `L2_<dim>` of a piece.
    pub fn label(&self, i: usize) -> String {
        format!("L2_{}", self.pieces[i].dim)
    }
}

/// A labelled submodule of Λ⁴.
#[derive(Clone, Debug)]
pub struct Lambda4Piece {
    pub label: &'static str,
    pub dim: usize,
    pub projector: QMatrix,
}

/// A standard model form together with its cached module data.
#[derive(Debug)]
pub struct StructureForm {
    pub kind: StructureKind,
    pub xi: Form<Rational>,
    pub metric: Metric,
    pub volume: Form<Rational>,
    pub lambda2: Lambda2Splitting,
    pub m_dim: usize,
    /// The constant `c` with `ι₃(κ ⋄ ξ) = c κ` on the m-module.
    pub contraction: Rational,
    lambda4: OnceLock<Vec<Lambda4Piece>>,
}

impl StructureForm {
    fn build(kind: StructureKind) -> Result<Self> {
        let xi = kind.model_form::<Rational>();
        let volume = Form::volume();
        let lambda2 = lambda2_split(&xi)?;
        let m = lambda2.m();
        let kappa = first_nonzero_column(&m.projector);
        let image = triple_contract(&diamond(&kappa, &xi), &xi);
        let contraction = ratio_of(&image, &kappa)
            .ok_or_else(|| Error::NotDiagonalizable("ι₃∘⋄ is not a multiple of the identity on m".into()))?;
        Ok(StructureForm {
            kind,
            m_dim: m.dim,
            xi,
            metric: Metric::euclidean(),
            volume,
            lambda2,
            contraction,
            lambda4: OnceLock::new(),
        })
    }

    pub fn xi_as<S: Scalar>(&self) -> Form<S> {
        self.xi.map(S::from_rational)
    }

    /// Submodules of Λ⁴ (Sp(2)Sp(1) only), computed on first use.
    pub fn lambda4(&self) -> Result<&[Lambda4Piece]> {
        if self.kind != StructureKind::QK {
            return Err(Error::Unsupported("Λ⁴ classification is implemented for Sp(2)Sp(1) only".into()));
        }
        Ok(self.lambda4.get_or_init(|| lambda4_split(self)))
    }

    /// Splits a 4-form into its labelled Λ⁴ components; the components sum
    /// to the input.
    pub fn lambda4_classify<S: Scalar>(&self, a: &Form<S>) -> Result<Vec<(&'static str, Form<S>)>> {
        if a.degree() != 4 {
            return Err(Error::DegreeMismatch { expected: 4, found: a.degree() });
        }
        Ok(self.lambda4()?.iter().map(|p| (p.label, apply(&p.projector, a))).collect())
    }

    /// Splits a 2-form into its Λ² components.
    pub fn lambda2_classify<S: Scalar>(&self, a: &Form<S>) -> Result<Vec<(String, Form<S>)>> {
        if a.degree() != 2 {
            return Err(Error::DegreeMismatch { expected: 2, found: a.degree() });
        }
        Ok((0..self.lambda2.pieces.len())
            .map(|i| (self.lambda2.label(i), apply(&self.lambda2.pieces[i].projector, a)))
            .collect())
    }

    /// `π_m` through the cached exact projector (standard frame only).
    pub fn project_m<S: Scalar>(&self, a: &Form<S>) -> Form<S> {
        apply(&self.lambda2.m().projector, a)
    }

    pub fn eigenvalue_m(&self) -> &Rational {
        &self.lambda2.m().eigenvalue
    }
}

fn first_nonzero_column(p: &QMatrix) -> Form<Rational> {
    (0..p.ncols())
        .map(|j| Form::from_vec(2, p.column(j).iter().cloned().collect::<Vec<_>>().as_slice()))
        .find(|f| !f.is_zero())
        .expect("non-zero projector")
}

/// `c` with `a = c b`, if it exists.
fn ratio_of(a: &Form<Rational>, b: &Form<Rational>) -> Option<Rational> {
    let (m, bc) = b.entries().next()?;
    let c = a.coeff_mask(m) / bc.clone();
    (a.clone() - b.scale(&c)).is_zero().then_some(c)
}

/// Applies a matrix acting on coefficient vectors in [`basis`] order.
pub fn apply<S: Scalar>(p: &QMatrix, a: &Form<S>) -> Form<S> {
    let k = a.degree();
    let cols = basis(k);
    debug_assert_eq!(p.ncols(), cols.len());
    let v = a.to_vec();
    let mut out = Vec::with_capacity(p.nrows());
    for i in 0..p.nrows() {
        let mut acc = S::zero();
        for (j, x) in v.iter().enumerate() {
            let pij = &p[(i, j)];
            if num_traits::Zero::is_zero(pij) || x.is_zero() {
                continue;
            }
            acc = acc + S::from_rational(pij) * x.clone();
        }
        out.push(acc);
    }
    Form::from_vec(k, &out)
}

/// Matrix of a linear map between forms, columns indexed by [`basis`] of
/// `from_degree`.
pub fn operator_matrix(from_degree: usize, to_degree: usize, f: impl Fn(&Form<Rational>) -> Form<Rational>) -> QMatrix {
    let cols = basis(from_degree);
    let mut m = linalg::zeros(basis(to_degree).len(), cols.len());
    for (j, &mask) in cols.iter().enumerate() {
        let image = f(&Form::from_terms(from_degree, [(mask, Rational::from_i64(1))]));
        assert_eq!(image.degree(), to_degree);
        for (i, c) in image.to_vec().into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    m
}

/// `α ↦ *(α ∧ ξ)`.
pub fn star_wedge<S: Scalar>(alpha: &Form<S>, xi: &Form<S>) -> Form<S> {
    alpha.wedge(xi).star()
}

/// Eigen-decomposition of `α ↦ *(α ∧ ξ)` on Λ², with exact projectors.
pub fn lambda2_split(xi: &Form<Rational>) -> Result<Lambda2Splitting> {
    let l = operator_matrix(2, 2, |a| star_wedge(a, xi));
    let spectral = linalg::spectral_projectors(&l)?;
    if spectral.len() > 3 {
        return Err(Error::NotDiagonalizable(format!("{} eigenvalues, expected at most 3", spectral.len())));
    }
    let mut pieces: Vec<Lambda2Piece> = spectral
        .into_iter()
        .map(|(eigenvalue, projector)| Lambda2Piece { dim: linalg::rank(&projector), eigenvalue, projector })
        .collect();
    pieces.sort_by_key(|p| p.dim);
    // The m-module is the unique piece on which ⋄ does not vanish.
    let moving: Vec<usize> = pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            (0..p.projector.ncols()).any(|j| {
                let col: Vec<Rational> = p.projector.column(j).iter().cloned().collect();
                !diamond(&Form::from_vec(2, &col), xi).is_zero()
            })
        })
        .map(|(i, _)| i)
        .collect();
    match moving.as_slice() {
        [m] => Ok(Lambda2Splitting { pieces, m_index: *m }),
        _ => Err(Error::NotDiagonalizable(format!("{} eigenspaces move ξ, expected exactly one", moving.len()))),
    }
}

/// `±1`: the sign of `ξ ∧ ξ` against `dx_{1…8}`, for a form of the given
/// kind in an orthonormal coframe.
pub fn orientation<S: Scalar>(xi: &Form<S>, kind: StructureKind) -> S {
    xi.wedge(xi).coeff_mask(crate::exterior::VOLUME_MASK) / S::from_i64(kind.normalization())
}

/// Projection onto the `eigenvalue`-eigenspace of `α ↦ *(α ∧ ξ)` for any
/// 4-form `ξ` of the given kind, via the Lagrange polynomial in that map.
/// The Hodge star is taken in the orientation induced by `ξ`.
pub fn project_eigen<S: Scalar>(alpha: &Form<S>, xi: &Form<S>, kind: StructureKind, eigenvalue: &Rational) -> Form<S> {
    let sign = orientation(xi, kind);
    let mut out = alpha.clone();
    for mu in kind.standard().lambda2.eigenvalues() {
        if &mu == eigenvalue {
            continue;
        }
        let shifted = star_wedge(&out, xi).scale(&sign) - out.scale(&S::from_rational(&mu));
        out = shifted.scale(&S::from_rational(&(eigenvalue - &mu).recip()));
    }
    out
}

/// `π_m` for any 4-form `ξ` of the given kind.
pub fn project_m<S: Scalar>(alpha: &Form<S>, xi: &Form<S>, kind: StructureKind) -> Form<S> {
    project_eigen(alpha, xi, kind, kind.standard().eigenvalue_m())
}

/// Antisymmetric matrix `A` with `A[a][b] = α_ab` (0-based), so that the
/// induced derivation is `α ⋄ ·`.
pub fn two_form_matrix<S: Scalar>(alpha: &Form<S>) -> [[S; DIM]; DIM] {
    let mut a: [[S; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    for (m, c) in alpha.entries() {
        let i = m.trailing_zeros() as usize;
        let j = 7 - m.leading_zeros() as usize;
        a[i][j] = c.clone();
        a[j][i] = -c.clone();
    }
    a
}

/// `α ⋄ ξ`, the infinitesimal action of a 2-form.
pub fn diamond<S: Scalar>(alpha: &Form<S>, xi: &Form<S>) -> Form<S> {
    assert_eq!(alpha.degree(), 2, "diamond takes a 2-form");
    xi.derivation(&two_form_matrix(alpha))
}

/// `A ⋄ ξ` for an endomorphism with `(e^i ⊗ e^m) ⋄ ξ = e^i ∧ (E_m ⌟ ξ)`
/// stored as `a[i][m]`.
pub fn diamond_endo<S: Scalar>(a: &[[S; DIM]; DIM], xi: &Form<S>) -> Form<S> {
    xi.derivation(a)
}

/// `ψ ⌟₃ κ`, extended linearly from simple 4-forms.
pub fn triple_contract<S: Scalar>(psi: &Form<S>, kappa: &Form<S>) -> Form<S> {
    assert_eq!(psi.degree(), 4, "triple contraction takes a 4-form");
    let mut out = Form::zero(kappa.degree().saturating_sub(2));
    if kappa.degree() < 3 {
        return out;
    }
    for (m, c) in psi.entries() {
        let idx: Vec<usize> = crate::exterior::indices_of(m).iter().map(|&i| i as usize).collect();
        for p in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&q| q != p).map(|q| idx[q]).collect();
            let contracted =
                kappa.interior_basis(others[2]).interior_basis(others[1]).interior_basis(others[0]);
            let term = Form::<S>::dx(idx[p]).wedge(&contracted).scale(c);
            out = if p % 2 == 0 { out + term } else { out - term };
        }
    }
    out
}

/// `c Σ_{i<j} Σ_k (α_ik β_jk − α_jk β_ik) dx_ij`: the closed form of
/// `(α⋄ξ) ⌟₃ (β⋄ξ)` for `α, β` in the m-module, `c` the contraction constant.
pub fn pairing_components<S: Scalar>(alpha: &Form<S>, beta: &Form<S>, kind: StructureKind) -> Form<S> {
    let (a, b) = (two_form_matrix(alpha), two_form_matrix(beta));
    let c = S::from_rational(&kind.standard().contraction);
    let mut out = Form::zero(2);
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let mut v = S::zero();
            for k in 0..DIM {
                v = v + a[i][k].clone() * b[j][k].clone() - a[j][k].clone() * b[i][k].clone();
            }
            out.add_term((1u8 << i) | (1u8 << j), v * c.clone());
        }
    }
    out
}

/// `ι₃ ψ = ψ ⌟₃ ξ`.
pub fn iota3<S: Scalar>(psi: &Form<S>, xi: &Form<S>) -> Form<S> {
    triple_contract(psi, xi)
}

/// Inverse of `⋄` on the m-module: `ι₃(ψ) / c`.
pub fn invert_diamond<S: Scalar>(psi: &Form<S>, xi: &Form<S>, kind: StructureKind) -> Form<S> {
    let c = S::from_rational(&kind.standard().contraction.recip());
    iota3(psi, xi).scale(&c)
}

/// [`invert_diamond`] with a check that `ψ` lies in the image of `⋄` on m.
pub fn invert_diamond_checked(psi: &Form<f64>, xi: &Form<f64>, kind: StructureKind, tol: f64) -> Result<Form<f64>> {
    let kappa = invert_diamond(psi, xi, kind);
    let residual = (diamond(&kappa, xi) - psi.clone()).norm();
    let scale = psi.norm().max(1.0);
    if residual > tol * scale {
        return Err(Error::Residual { what: "ψ outside the image of ⋄".into(), residual, tol });
    }
    Ok(kappa)
}

/// Coefficient of vol in `(V⌟W⌟Ω) ∧ (V⌟U⌟Ω) ∧ Ω`.
pub fn quaternionic_pairing<S: Scalar>(v: &Vector<S>, w: &Vector<S>, u: &Vector<S>, xi: &Form<S>) -> S {
    let a = xi.interior(w).interior(v);
    let b = xi.interior(u).interior(v);
    a.wedge(&b).wedge(xi).coeff_mask(crate::exterior::VOLUME_MASK)
}

fn lambda4_split(s: &StructureForm) -> Vec<Lambda4Piece> {
    let id = linalg::identity(70);
    let star = operator_matrix(4, 4, |a| a.star());
    let half = Rational::new(1.into(), 2.into());
    let plus = (&id + &star) * half.clone();
    let minus = (&id - &star) * half;
    let triple = model_triple::<Rational>();
    let wedges: Vec<QMatrix> = triple.iter().map(|w| operator_matrix(4, 2, |a| a.wedge(w).star())).collect();

    let stack = |blocks: &[QMatrix]| {
        let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut m = linalg::zeros(rows, 70);
        let mut r = 0;
        for b in blocks {
            m.view_mut((r, 0), (b.nrows(), 70)).copy_from(b);
            r += b.nrows();
        }
        m
    };
    let condition = |eigenvalue: Option<&Rational>| -> QMatrix {
        let blocks: Vec<QMatrix> = wedges
            .iter()
            .map(|w| match eigenvalue {
                None => w.clone(),
                Some(l) => {
                    let p = &s.lambda2.pieces.iter().find(|p| &p.eigenvalue == l).expect("eigenvalue").projector;
                    (linalg::identity(28) - p) * w
                }
            })
            .collect();
        linalg::orthogonal_projector(&linalg::nullspace(&stack(&blocks)))
    };

    let k0 = condition(None);
    let c = |l: i64| condition(Some(&Rational::from_i64(l)));
    let omega_col = QMatrix::from_column_slice(70, 1, &s.xi.to_vec());
    let p1 = linalg::orthogonal_projector(&omega_col);
    let p14 = linalg::intersect_projectors(&k0, &plus);
    let p15 = linalg::intersect_projectors(&c(1), &plus) - &p14;
    let p5 = linalg::intersect_projectors(&c(5), &plus) - &p14 - &p1;
    let m_k0 = linalg::intersect_projectors(&k0, &minus);
    let m5 = linalg::intersect_projectors(&c(1), &minus) - &m_k0;
    let m30 = linalg::intersect_projectors(&c(-3), &minus) - &m_k0;
    [("L4p_1", p1), ("L4p_5", p5), ("L4p_15", p15), ("L4p_14", p14), ("L4m_5", m5), ("L4m_30", m30)]
        .into_iter()
        .map(|(label, projector)| Lambda4Piece { label, dim: linalg::rank(&projector), projector })
        .collect()
}

/// `f64` copy of an exact projector.
pub fn projector_f64(p: &QMatrix) -> DMatrix<f64> {
    linalg::to_f64(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn f2(terms: &[(i64, [u8; 2])]) -> Form<Rational> {
        form2(terms)
    }

    #[test]
    fn normalizations() {
        for kind in [StructureKind::QK, StructureKind::Spin7] {
            let xi = kind.model_form::<Rational>();
            assert_eq!(xi.wedge(&xi), Form::volume().scale_i64(kind.normalization()));
        }
        let omega = StructureKind::QK.model_form::<Rational>();
        assert_eq!(omega.star(), omega);
    }

    #[test]
    fn qk_spectrum() {
        let s = StructureKind::QK.standard();
        let spec: Vec<(Rational, usize)> = s.lambda2.pieces.iter().map(|p| (p.eigenvalue.clone(), p.dim)).collect();
        assert_eq!(spec, vec![(q(5), 3), (q(-3), 10), (q(1), 15)]);
        assert_eq!(s.m_dim, 15);
        assert_eq!(s.contraction, q(32));
    }

    #[test]
    fn spin7_spectrum() {
        let s = StructureKind::Spin7.standard();
        let dims: Vec<usize> = s.lambda2.pieces.iter().map(|p| p.dim).collect();
        assert_eq!(dims, vec![7, 21]);
        assert_eq!(s.m_dim, 7);
    }

    #[test]
    fn diamond_examples() {
        let omega = StructureKind::QK.model_form::<Rational>();
        let [w1, _, _] = model_triple::<Rational>();
        assert!(diamond(&w1, &omega).is_zero());
        let alpha = f2(&[(1, [2, 8]), (1, [3, 5])]);
        let expected: Form<Rational> = [([1, 2, 4, 5], 4), ([1, 3, 4, 8], -4), ([2, 5, 6, 7], -4), ([3, 6, 7, 8], 4)]
            .iter()
            .map(|(i, c)| Form::monomial(i, q(*c)).unwrap())
            .sum();
        assert_eq!(diamond(&alpha, &omega), expected);
        let id: [[Rational; 8]; 8] = std::array::from_fn(|i| std::array::from_fn(|j| q((i == j) as i64)));
        assert_eq!(diamond_endo(&id, &omega), omega.scale_i64(4));
    }

    #[test]
    fn pairing_worked_example() {
        let omega = StructureKind::QK.model_form::<Rational>();
        let alpha = f2(&[(1, [2, 8]), (1, [3, 5])]);
        let beta = f2(&[(1, [1, 5]), (-1, [2, 6])]);
        let pairing = triple_contract(&diamond(&alpha, &omega), &diamond(&beta, &omega));
        assert_eq!(pairing, f2(&[(-32, [1, 3]), (32, [6, 8])]));
    }

    #[test]
    fn quaternionic_pairing_values() {
        let omega = StructureKind::QK.model_form::<Rational>();
        let e = |i| Vector::<Rational>::basis(i);
        assert_eq!(quaternionic_pairing(&e(1), &e(2), &e(2), &omega), q(18));
        assert_eq!(quaternionic_pairing(&e(1), &e(5), &e(5), &omega), q(-6));
        assert_eq!(quaternionic_pairing(&e(1), &e(1), &e(1), &omega), q(0));
    }

    #[test]
    fn lambda4_dimensions() {
        let s = StructureKind::QK.standard();
        let dims: Vec<(&str, usize)> = s.lambda4().unwrap().iter().map(|p| (p.label, p.dim)).collect();
        assert_eq!(
            dims,
            vec![("L4p_1", 1), ("L4p_5", 5), ("L4p_15", 15), ("L4p_14", 14), ("L4m_5", 5), ("L4m_30", 30)]
        );
        assert!(StructureKind::Spin7.standard().lambda4().is_err());
    }

    #[test]
    fn metric_recovered_from_model_forms() {
        for kind in [StructureKind::QK, StructureKind::Spin7] {
            let xi = kind.model_form::<f64>();
            for c in [1.0f64, 0.5, 2.0, 3.0] {
                let g = metric_from_form(&xi.scale(&c.powi(4)), kind).unwrap();
                let err = (g.matrix() - nalgebra::SMatrix::<f64, 8, 8>::identity() * c * c).abs().max();
                assert!(err <= 1e-10 * c * c, "{kind:?} c={c}: {err:e}");
            }
        }
    }
}
