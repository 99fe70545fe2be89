//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value, its gradient and its Hessian with respect to a
//! fixed list of active variables. Constants store empty derivative vectors.
//! Differentiating along a vector field ([`Scalar::derive`]) consumes one order
//! of accuracy; `order` records how many derivative levels are still exact.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::ToPrimitive;

use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    /// Empty for constants.
    pub grad: Vec<f64>,
    /// Row-major `n x n`, empty for constants or when `order < 2`.
    pub hess: Vec<f64>,
    /// Number of derivative levels that are exact (0, 1 or 2).
    pub order: u8,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.grad.is_empty() {
            write!(f, "Jet({})", self.value)
        } else {
            write!(f, "Jet({}, grad={:?}, order={})", self.value, self.grad, self.order)
        }
    }
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet { value, grad: Vec::new(), hess: Vec::new(), order: 2 }
    }

    /// The `index`-th of `n` active variables, evaluated at `value`.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[index] = 1.0;
        Jet { value, grad, hess: vec![0.0; n * n], order: 2 }
    }

    /// Seeds all variables of a point.
    pub fn seed(point: &[f64]) -> Vec<Jet> {
        let n = point.len();
        point.iter().enumerate().map(|(i, &v)| Jet::variable(v, i, n)).collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }

    pub fn partial(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    pub fn second_partial(&self, i: usize, j: usize) -> f64 {
        let n = self.dim();
        if self.hess.is_empty() {
            0.0
        } else {
            self.hess[i * n + j]
        }
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet {
        if self.grad.is_empty() {
            return Jet::constant(f);
        }
        let n = self.dim();
        let grad: Vec<f64> = self.grad.iter().map(|g| df * g).collect();
        let hess = if self.order >= 2 && !self.hess.is_empty() {
            let mut h = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = df * self.hess[i * n + j] + d2f * self.grad[i] * self.grad[j];
                }
            }
            h
        } else {
            Vec::new()
        };
        Jet { value: f, grad, hess, order: self.order }
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let x = self.value;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sqrt(&self) -> Jet {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }

    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn powi(&self, p: i32) -> Jet {
        let x = self.value;
        let pf = p as f64;
        let d1 = if p == 0 { 0.0 } else { pf * x.powi(p - 1) };
        let d2 = if p == 0 || p == 1 { 0.0 } else { pf * (pf - 1.0) * x.powi(p - 2) };
        self.chain(x.powi(p), d1, d2)
    }

    pub fn recip(&self) -> Jet {
        let x = self.value;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
}

fn combine(a: &[f64], b: &[f64], fa: f64, fb: f64) -> Vec<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => a.iter().map(|x| fa * x).collect(),
        (true, false) => b.iter().map(|x| fb * x).collect(),
        (false, false) => {
            debug_assert_eq!(a.len(), b.len(), "jets over different variable sets");
            a.iter().zip(b).map(|(x, y)| fa * x + fb * y).collect()
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let hess = if order >= 2 { combine(&self.hess, &rhs.hess, 1.0, 1.0) } else { Vec::new() };
        Jet { value: self.value + rhs.value, grad: combine(&self.grad, &rhs.grad, 1.0, 1.0), hess, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let hess = if order >= 2 { combine(&self.hess, &rhs.hess, 1.0, -1.0) } else { Vec::new() };
        Jet { value: self.value - rhs.value, grad: combine(&self.grad, &rhs.grad, 1.0, -1.0), hess, order }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
            order: self.order,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let grad = combine(&self.grad, &rhs.grad, rhs.value, self.value);
        let hess = if order < 2 {
            Vec::new()
        } else {
            let mut h = combine(&self.hess, &rhs.hess, rhs.value, self.value);
            if !self.grad.is_empty() && !rhs.grad.is_empty() {
                let n = self.grad.len();
                if h.is_empty() {
                    h = vec![0.0; n * n];
                }
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] += self.grad[i] * rhs.grad[j] + rhs.grad[i] * self.grad[j];
                    }
                }
            }
            h
        };
        Jet { value: self.value * rhs.value, grad, hess, order }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        if rhs.grad.is_empty() {
            let inv = 1.0 / rhs.value;
            return Jet {
                value: self.value * inv,
                grad: self.grad.iter().map(|g| g * inv).collect(),
                hess: self.hess.iter().map(|h| h * inv).collect(),
                order: self.order.min(rhs.order),
            };
        }
        self * rhs.recip()
    }
}

impl Scalar for Jet {
    fn zero() -> Self {
        Jet::constant(0.0)
    }
    fn one() -> Self {
        Jet::constant(1.0)
    }
    fn from_i64(n: i64) -> Self {
        Jet::constant(n as f64)
    }
    fn from_f64(x: f64) -> Self {
        Jet::constant(x)
    }
    fn from_rational(q: &Rational) -> Self {
        Jet::constant(q.to_f64().unwrap_or(f64::NAN))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.is_constant()
    }
    fn magnitude(&self) -> f64 {
        self.value.abs()
    }

    /// `sum_a action[a] * d/dx_a`. The result is exact to one order less than
    /// the inputs; differentiating an order-0 jet yields NaN.
    fn derive(&self, action: &[Self]) -> Self {
        if self.grad.is_empty() || action.iter().all(|a| a.value == 0.0 && a.grad.is_empty()) {
            return Jet::zero();
        }
        let action_order = action.iter().map(|a| a.order).min().unwrap_or(2);
        let base_order = self.order.min(action_order);
        if base_order == 0 {
            return Jet { value: f64::NAN, grad: Vec::new(), hess: Vec::new(), order: 0 };
        }
        let n = self.dim();
        let mut value = 0.0;
        for (a, act) in action.iter().enumerate().take(n) {
            value += act.value * self.grad[a];
        }
        let mut grad = vec![0.0; n];
        let have_hess = !self.hess.is_empty();
        for (a, act) in action.iter().enumerate().take(n) {
            if act.value == 0.0 && act.grad.is_empty() {
                continue;
            }
            for (b, gb) in grad.iter_mut().enumerate() {
                let mut term = act.partial(b) * self.grad[a];
                if have_hess {
                    term += act.value * self.hess[a * n + b];
                }
                *gb += term;
            }
        }
        let order = base_order - 1;
        let grad = if order == 0 && !have_hess && grad.iter().any(|g| *g != 0.0) {
            // Second derivatives were not available: the gradient is unknown.
            vec![f64::NAN; n]
        } else {
            grad
        };
        Jet { value, grad, hess: Vec::new(), order }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn product_and_chain_rules() {
        let v = Jet::seed(&[0.7, -0.3]);
        let (x, y) = (v[0].clone(), v[1].clone());
        // f = x^2 y + sin(x y)
        let f = x.clone() * x.clone() * y.clone() + (x.clone() * y.clone()).sin();
        let (xv, yv) = (0.7f64, -0.3f64);
        let c = (xv * yv).cos();
        let s = (xv * yv).sin();
        assert!(close(f.value, xv * xv * yv + s));
        assert!(close(f.partial(0), 2.0 * xv * yv + yv * c));
        assert!(close(f.partial(1), xv * xv + xv * c));
        assert!(close(f.second_partial(0, 0), 2.0 * yv - yv * yv * s));
        assert!(close(f.second_partial(0, 1), 2.0 * xv + c - xv * yv * s));
        assert!(close(f.second_partial(1, 0), f.second_partial(0, 1)));
        assert!(close(f.second_partial(1, 1), -xv * xv * s));
    }

    #[test]
    fn quotient_and_powers() {
        let x = Jet::variable(2.0, 0, 1);
        let f = Jet::one() / x.clone();
        assert!(close(f.partial(0), -0.25));
        assert!(close(f.second_partial(0, 0), 0.25));
        let g = x.powf(1.5);
        assert!(close(g.partial(0), 1.5 * 2f64.sqrt()));
        let h = x.powi(3);
        assert!(close(h.second_partial(0, 0), 12.0));
        let e = x.ln().exp();
        assert!(close(e.value, 2.0) && close(e.partial(0), 1.0) && close(e.second_partial(0, 0), 0.0));
    }

    #[test]
    fn derivation_loses_one_order() {
        let x = Jet::variable(0.5, 0, 1);
        let f = x.exp();
        let action = [Jet::constant(2.0)];
        let df = f.derive(&action);
        assert!(close(df.value, 2.0 * 0.5f64.exp()));
        assert!(close(df.partial(0), 2.0 * 0.5f64.exp()));
        assert_eq!(df.order, 1);
        let ddf = df.derive(&action);
        assert!(close(ddf.value, 4.0 * 0.5f64.exp()));
        assert_eq!(ddf.order, 0);
        assert!(ddf.derive(&action).value.is_nan());
    }

    #[test]
    fn derivation_with_variable_action() {
        // X = x d/dx applied to f = x^3 gives 3x^3, whose derivative is 9x^2.
        let x = Jet::variable(1.2, 0, 1);
        let f = x.powi(3);
        let xf = f.derive(std::slice::from_ref(&x));
        assert!(close(xf.value, 3.0 * 1.2f64.powi(3)));
        assert!(close(xf.partial(0), 9.0 * 1.2f64.powi(2)));
    }

    #[test]
    fn constants_are_cheap_and_exact() {
        let c = Jet::constant(3.0);
        assert!(c.grad.is_empty());
        assert!(c.derive(&[Jet::constant(1.0)]).is_zero());
        let x = Jet::variable(1.0, 0, 2);
        let p = c * x;
        assert_eq!(p.grad, vec![3.0, 0.0]);
    }
}
