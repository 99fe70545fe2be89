//! Moving-frame Riemannian geometry.
//!
//! A [`Frame`] is an orthonormal coframe `e¹..e⁸` described by its structure
//! functions `c^i_{jk}`, with `[E_j, E_k] = c^i_{jk} E_i` and
//! `de^i = −Σ_{j<k} c^i_{jk} e^{jk}`, together with the action of each frame
//! vector on the active variables. Everything else — connection, curvature,
//! intrinsic torsion, its divergence — is computed from these data.
//!
//! All indices in this module are 0-based; forms use the frame basis.

use std::sync::OnceLock;

use crate::exterior::{indices_of, Form, Vector, DIM};
use crate::scalar::Scalar;
use crate::structures::{diamond, invert_diamond, project_m, triple_contract, StructureKind};

type Cube<S> = [[[S; DIM]; DIM]; DIM];

fn cube<S: Scalar>(f: impl Fn(usize, usize, usize) -> S) -> Box<Cube<S>> {
    Box::new(std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k)))))
}

fn square<S: Scalar>(f: impl Fn(usize, usize) -> S) -> [[S; DIM]; DIM] {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

/// An orthonormal coframe and its structure functions.
pub struct Frame<S> {
    /// `c[i][j][k] = c^i_{jk}`, antisymmetric in `j, k`.
    c: Box<Cube<S>>,
    /// `action[k][a] = E_k(x_a)`.
    action: Vec<Vec<S>>,
    de: Vec<Form<S>>,
    d_basis: Vec<OnceLock<Form<S>>>,
}

impl<S: Scalar> Frame<S> {
    /// `c` is indexed `c[i][j][k] = c^i_{jk}` and must be antisymmetric in the
    /// last two slots; `action[k]` lists `E_k(x_a)` over the active variables.
    pub fn new(c: Box<Cube<S>>, action: Vec<Vec<S>>) -> Self {
        assert_eq!(action.len(), DIM, "one action row per frame vector");
        let de = (0..DIM)
            .map(|i| {
                let mut f = Form::zero(2);
                for j in 0..DIM {
                    for k in (j + 1)..DIM {
                        if !c[i][j][k].is_zero() {
                            f.add_term((1 << j) | (1 << k), -c[i][j][k].clone());
                        }
                    }
                }
                f
            })
            .collect();
        Frame { c, action, de, d_basis: (0..256).map(|_| OnceLock::new()).collect() }
    }

    /// The flat coframe `dx_1..dx_8` with `n` (ignored) active variables.
    pub fn flat(n: usize) -> Self {
        Frame::new(cube(|_, _, _| S::zero()), vec![vec![S::zero(); n]; DIM])
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &S {
        &self.c[i][j][k]
    }

    pub fn action(&self, k: usize) -> &[S] {
        &self.action[k]
    }

    pub fn n_vars(&self) -> usize {
        self.action[0].len()
    }

    /// `de^i`.
    pub fn de(&self, i: usize) -> &Form<S> {
        &self.de[i]
    }

    /// `E_k(h)`.
    pub fn derive(&self, h: &S, k: usize) -> S {
        h.derive(&self.action[k])
    }

    /// `dh = Σ_k E_k(h) e^k`.
    pub fn d_function(&self, h: &S) -> Form<S> {
        Form::from_terms(1, (0..DIM).map(|k| (1u8 << k, self.derive(h, k))))
    }

    /// Applies `E_k` to every coefficient.
    pub fn directional(&self, a: &Form<S>, k: usize) -> Form<S> {
        Form::from_terms(a.degree(), a.entries().map(|(m, c)| (m, self.derive(c, k))))
    }

    /// `d(e^I)` by the Leibniz rule, cached per multi-index.
    fn d_monomial(&self, mask: u8) -> &Form<S> {
        self.d_basis[mask as usize].get_or_init(|| {
            let idx = indices_of(mask);
            let mut out = Form::zero(idx.len() + 1);
            for (r, &i) in idx.iter().enumerate() {
                let before = idx[..r].iter().fold(0u8, |m, &j| m | 1 << (j - 1));
                let after = idx[r + 1..].iter().fold(0u8, |m, &j| m | 1 << (j - 1));
                let term = Form::from_terms(r, [(before, S::one())])
                    .wedge(&self.de[i as usize - 1])
                    .wedge(&Form::from_terms(idx.len() - r - 1, [(after, S::one())]));
                out = if r % 2 == 0 { out + term } else { out - term };
            }
            out
        })
    }

    /// Exterior derivative of a form written in the coframe.
    pub fn d(&self, a: &Form<S>) -> Form<S> {
        let mut out = Form::zero(a.degree() + 1);
        for (m, h) in a.entries() {
            let mono = Form::from_terms(a.degree(), [(m, S::one())]);
            out = out + self.d_function(h).wedge(&mono) + self.d_monomial(m).scale(h);
        }
        out
    }

    /// Lie derivative by Cartan's formula `L_X a = X⌟da + d(X⌟a)`.
    pub fn lie_derivative(&self, a: &Form<S>, x: &Vector<S>) -> Form<S> {
        let first = self.d(a).interior(x);
        if a.degree() == 0 {
            return first;
        }
        first + self.d(&a.interior(x))
    }

    /// `(L_X g)_{ab} = (L_X e^a)(E_b) + (L_X e^b)(E_a)`.
    pub fn lie_metric(&self, x: &Vector<S>) -> [[S; DIM]; DIM] {
        let l: Vec<Form<S>> = (0..DIM).map(|a| self.lie_derivative(&Form::dx(a + 1), x)).collect();
        square(|a, b| l[a].coeff_mask(1 << b) + l[b].coeff_mask(1 << a))
    }
}

/// Levi-Civita connection coefficients `∇_{E_a} E_b = Γ_{abj} E_j`.
pub struct Connection<S> {
    gamma: Box<Cube<S>>,
}

impl<S: Scalar> Connection<S> {
    /// Koszul formula for an orthonormal frame:
    /// `2Γ_{abj} = c^j_{ab} − c^a_{bj} + c^b_{ja}`.
    pub fn levi_civita(frame: &Frame<S>) -> Self {
        let half = S::one() / S::from_i64(2);
        let c = &frame.c;
        Connection {
            gamma: cube(|a, b, j| {
                let sum = c[j][a][b].clone() - c[a][b][j].clone() + c[b][j][a].clone();
                if sum.is_zero() {
                    S::zero()
                } else {
                    sum * half.clone()
                }
            }),
        }
    }

    pub fn gamma(&self, a: usize, b: usize, j: usize) -> &S {
        &self.gamma[a][b][j]
    }

    /// `Γ(E_k) = Σ_{i<m} Γ_{kim} e^{im}`, so that `∇_{E_k} α = E_k(α) − Γ(E_k) ⋄ α`.
    pub fn gamma_form(&self, k: usize) -> Form<S> {
        let mut f = Form::zero(2);
        for i in 0..DIM {
            for m in (i + 1)..DIM {
                f.add_term((1 << i) | (1 << m), self.gamma[k][i][m].clone());
            }
        }
        f
    }

    /// Connection 1-form `ω^m_j = Σ_k Γ_{kjm} e^k`.
    pub fn connection_form(&self, m: usize, j: usize) -> Form<S> {
        Form::from_terms(1, (0..DIM).map(|k| (1u8 << k, self.gamma[k][j][m].clone())))
    }

    /// `∇_{E_k} E_k`.
    pub fn self_derivative(&self, k: usize) -> Vector<S> {
        Vector::from_fn(|j| self.gamma[k][k][j].clone())
    }
}

/// Curvature 2-forms `Ω^l_j = dω^l_j + ω^l_m ∧ ω^m_j`.
pub struct Curvature<S> {
    omega: Vec<Vec<Form<S>>>,
}

impl<S: Scalar> Curvature<S> {
    pub fn new(frame: &Frame<S>, conn: &Connection<S>) -> Self {
        let w: Vec<Vec<Form<S>>> = (0..DIM).map(|l| (0..DIM).map(|j| conn.connection_form(l, j)).collect()).collect();
        let omega = (0..DIM)
            .map(|l| {
                (0..DIM)
                    .map(|j| {
                        let mut f = frame.d(&w[l][j]);
                        for m in 0..DIM {
                            f = f + w[l][m].wedge(&w[m][j]);
                        }
                        f
                    })
                    .collect()
            })
            .collect();
        Curvature { omega }
    }

    pub fn form(&self, l: usize, j: usize) -> &Form<S> {
        &self.omega[l][j]
    }

    /// `R_{abj}^m = Ω^m_j(E_a, E_b)`.
    pub fn r(&self, a: usize, b: usize, j: usize, m: usize) -> S {
        two_form_entry(&self.omega[m][j], a, b)
    }

    /// `R(E_a, E_b)` as a 2-form `ρ`, normalized so that it acts on forms
    /// as `ρ ⋄ ·`: `ρ_{jm} = −R_{abj}^m`.
    pub fn as_two_form(&self, a: usize, b: usize) -> Form<S> {
        let mut f = Form::zero(2);
        for j in 0..DIM {
            for m in (j + 1)..DIM {
                f.add_term((1 << j) | (1 << m), -self.r(a, b, j, m));
            }
        }
        f
    }

    /// `Ric_{bc} = Σ_a R_{abc}^a`.
    pub fn ricci(&self) -> [[S; DIM]; DIM] {
        square(|b, c| (0..DIM).fold(S::zero(), |acc, a| acc + self.r(a, b, c, a)))
    }

    pub fn scalar(&self) -> S {
        let ric = self.ricci();
        (0..DIM).fold(S::zero(), |acc, a| acc + ric[a][a].clone())
    }
}

/// `α(E_a, E_b)` for a 2-form.
pub fn two_form_entry<S: Scalar>(alpha: &Form<S>, a: usize, b: usize) -> S {
    use std::cmp::Ordering;
    match a.cmp(&b) {
        Ordering::Less => alpha.coeff_mask((1 << a) | (1 << b)),
        Ordering::Greater => -alpha.coeff_mask((1 << a) | (1 << b)),
        Ordering::Equal => S::zero(),
    }
}

/// A frame together with a 4-form of a given kind, written in the coframe.
pub struct Geometry<S> {
    pub frame: Frame<S>,
    pub conn: Connection<S>,
    pub xi: Form<S>,
    pub kind: StructureKind,
    torsion: OnceLock<Vec<Form<S>>>,
}

/// The two sides of the Bianchi-type identity for one pair of directions.
#[derive(Clone)]
pub struct Bianchi<S> {
    /// `(∇_X T)(Y) − (∇_Y T)(X)`.
    pub lhs: Form<S>,
    /// `R(X, Y)` as a 2-form.
    pub curvature: Form<S>,
    /// `π_m R(X, Y)`.
    pub curvature_m: Form<S>,
    /// `(1/c)((∇_Y ξ)⌟₃(∇_X ξ) − (∇_X ξ)⌟₃(∇_Y ξ))`.
    pub quadratic: Form<S>,
}

impl<S: Scalar> Bianchi<S> {
    /// `lhs − π_m R − quadratic`.
    pub fn full_residual(&self) -> Form<S> {
        self.lhs.clone() - self.curvature_m.clone() - self.quadratic.clone()
    }
}

impl<S: Scalar> Geometry<S> {
    pub fn new(frame: Frame<S>, xi: Form<S>, kind: StructureKind) -> Self {
        assert_eq!(xi.degree(), 4, "the structure form has degree 4");
        let conn = Connection::levi_civita(&frame);
        Geometry { frame, conn, xi, kind, torsion: OnceLock::new() }
    }

    /// Covariant derivative `∇_{E_k} α`.
    pub fn covariant(&self, a: &Form<S>, k: usize) -> Form<S> {
        self.frame.directional(a, k) - diamond(&self.conn.gamma_form(k), a)
    }

    /// `∇_{E_k} ξ`.
    pub fn nabla_xi(&self, k: usize) -> Form<S> {
        self.covariant(&self.xi, k)
    }

    /// `π_m` with respect to ξ.
    pub fn project_m(&self, a: &Form<S>) -> Form<S> {
        project_m(a, &self.xi, self.kind)
    }

    /// `T(E_k) = ι₃(∇_{E_k} ξ) / c`.
    pub fn torsion(&self) -> &[Form<S>] {
        self.torsion.get_or_init(|| (0..DIM).map(|k| invert_diamond(&self.nabla_xi(k), &self.xi, self.kind)).collect())
    }

    /// Independent route for constant-coefficient ξ: `T(E_k) = −π_m Γ(E_k)`.
    pub fn torsion_from_connection(&self) -> Vec<Form<S>> {
        (0..DIM).map(|k| -self.project_m(&self.conn.gamma_form(k))).collect()
    }

    /// `T(X)` for a vector field.
    pub fn torsion_at(&self, x: &Vector<S>) -> Form<S> {
        let t = self.torsion();
        (0..DIM).fold(Form::zero(2), |acc, k| acc + t[k].scale(&x.0[k]))
    }

    /// `(∇_{E_a} T)(E_b) = ∇_{E_a}(T(E_b)) − T(∇_{E_a} E_b)`.
    pub fn nabla_torsion(&self, a: usize, b: usize) -> Form<S> {
        let t = self.torsion();
        let mut out = self.covariant(&t[b], a);
        for (j, tj) in t.iter().enumerate() {
            let g = self.conn.gamma(a, b, j);
            if !g.is_zero() {
                out = out - tj.scale(g);
            }
        }
        out
    }

    /// `div T = Σ_i (∇_{E_i} T)(E_i)`.
    pub fn divergence(&self) -> Form<S> {
        (0..DIM).fold(Form::zero(2), |acc, i| acc + self.nabla_torsion(i, i))
    }

    /// `½|T|²` with `|T|² = Σ_k |T(E_k)|²` in the tensor norm on 2-forms
    /// (twice the sum of squared monomial coefficients).
    pub fn energy_density(&self) -> S {
        self.torsion().iter().fold(S::zero(), |acc, t| acc + t.dot(t))
    }

    /// `|div T|²` in the tensor norm.
    pub fn div_norm2(&self) -> S {
        let d = self.divergence();
        d.dot(&d).scale_i64(2)
    }

    pub fn curvature(&self) -> Curvature<S> {
        Curvature::new(&self.frame, &self.conn)
    }

    /// Both sides of the Bianchi-type identity for `X = E_a`, `Y = E_b`.
    pub fn bianchi(&self, curvature: &Curvature<S>, a: usize, b: usize) -> Bianchi<S> {
        let lhs = self.nabla_torsion(a, b) - self.nabla_torsion(b, a);
        let rho = curvature.as_two_form(a, b);
        let na = self.nabla_xi(a);
        let nb = self.nabla_xi(b);
        let c = S::from_rational(&self.kind.standard().contraction);
        let quadratic = (triple_contract(&nb, &na) - triple_contract(&na, &nb)).scale(&(S::one() / c));
        Bianchi { lhs, curvature_m: self.project_m(&rho), curvature: rho, quadratic }
    }

    /// `T̃(E_k) = π_m(e^k ∧ df)` for a conformal change by `e^f`.
    pub fn conformal_torsion(&self, df: &Form<S>) -> Vec<Form<S>> {
        conformal_torsion(&self.xi, self.kind, df)
    }
}

/// `T̃(E_k) = π_m(e^k ∧ df)`.
pub fn conformal_torsion<S: Scalar>(xi: &Form<S>, kind: StructureKind, df: &Form<S>) -> Vec<Form<S>> {
    (0..DIM).map(|k| project_m(&Form::dx(k + 1).wedge(df), xi, kind)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;
    use crate::scalar::Rational;

    #[test]
    fn flat_frame_is_flat() {
        let g = Geometry::new(Frame::<Rational>::flat(0), StructureKind::QK.model_form(), StructureKind::QK);
        assert!((0..DIM).all(|k| g.conn.gamma_form(k).is_zero()));
        assert!(g.torsion().iter().all(Form::is_zero));
        assert!(g.divergence().is_zero());
        let curv = g.curvature();
        assert!((0..DIM).all(|a| (0..DIM).all(|b| curv.as_two_form(a, b).is_zero())));
    }

    /// e^1 = dx_1, e^2 = x_1 dx_2: `de^2 = (1/x_1) e^{12}`, `E_1 = ∂_1`.
    fn polar_like(x1: f64) -> Frame<Jet> {
        let x = Jet::variable(x1, 0, 1);
        let inv = Jet::constant(1.0) / x.clone();
        let c = cube(|i, j, k| match (i, j, k) {
            (1, 0, 1) => -inv.clone(),
            (1, 1, 0) => inv.clone(),
            _ => Jet::zero(),
        });
        let mut action = vec![vec![Jet::zero()]; DIM];
        action[0][0] = Jet::constant(1.0);
        Frame::new(c, action)
    }

    #[test]
    fn structure_equation_reconstruction_and_flat_curvature() {
        let frame = polar_like(1.7);
        let conn = Connection::levi_civita(&frame);
        for m in 0..DIM {
            let mut rec = frame.de(m).clone();
            for j in 0..DIM {
                rec = rec + conn.connection_form(m, j).wedge(&Form::dx(j + 1));
            }
            assert!(rec.max_abs() < 1e-14);
        }
        // The plane in polar-like coordinates is flat.
        let curv = Curvature::new(&frame, &conn);
        for a in 0..DIM {
            for b in 0..DIM {
                assert!(curv.as_two_form(a, b).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let frame = polar_like(0.9);
        let x = Jet::variable(0.9, 0, 1);
        let a = Form::from_terms(2, [(0b0000_0011u8, x.sin()), (0b0000_0110, x.clone() * x.clone())]);
        assert!(frame.d(&frame.d(&a)).max_abs() < 1e-13);
        assert!(frame.d(&frame.d_function(&x.exp())).max_abs() < 1e-13);
    }
}
