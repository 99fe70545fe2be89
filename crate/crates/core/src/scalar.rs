//! Coefficient fields.
//!
//! Every algebraic operation in the crate is generic over [`Scalar`]. The
//! instantiations are exact rationals (identity certificates), doubles and
//! complex doubles (numerics), exact complex rationals, and [`crate::Jet`]
//! (forward-mode derivatives through the geometry pipeline).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;
pub type C64 = Complex<f64>;
pub type CRational = Complex<BigRational>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    /// Exact for rational types (the binary expansion of `x`).
    fn from_f64(x: f64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Modulus of the value part, used for norms and tolerances.
    fn magnitude(&self) -> f64;
    /// Directional derivative along a vector field whose components on the
    /// active variables are `action`. Constants differentiate to zero.
    fn derive(&self, _action: &[Self]) -> Self {
        Self::zero()
    }

    fn scale_i64(&self, n: i64) -> Self {
        self.clone() * Self::from_i64(n)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn conj(&self) -> Self {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(n as f64, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
    fn from_rational(q: &Rational) -> Self {
        Complex::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for CRational {
    fn zero() -> Self {
        Complex::new(<Rational as Zero>::zero(), <Rational as Zero>::zero())
    }
    fn one() -> Self {
        Complex::new(<Rational as One>::one(), <Rational as Zero>::zero())
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(<Rational as Scalar>::from_i64(n), <Rational as Zero>::zero())
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(<Rational as Scalar>::from_f64(x), <Rational as Zero>::zero())
    }
    fn from_rational(q: &Rational) -> Self {
        Complex::new(q.clone(), <Rational as Zero>::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn magnitude(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
}

/// `p/q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats a rational as `p/q` (or `p` for integers).
pub fn rational_to_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `p/q` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    let digits = format!("{int_digits}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        for _ in 0..scale {
            value *= ten.clone();
        }
    } else {
        for _ in 0..(-scale) {
            value /= ten.clone();
        }
    }
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("3/4"), Some(ratio(3, 4)));
        assert_eq!(parse_rational("-0.25"), Some(ratio(-1, 4)));
        assert_eq!(parse_rational("1.5e2"), Some(ratio(150, 1)));
        assert_eq!(parse_rational("2e-1"), Some(ratio(1, 5)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(rational_to_string(&ratio(-6, 4)), "-3/2");
        assert_eq!(rational_to_string(&ratio(8, 4)), "2");
    }

    #[test]
    fn complex_rational_field_ops() {
        let i = CRational::new(<Rational as Scalar>::zero(), <Rational as Scalar>::one());
        let minus_one = i.clone() * i.clone();
        assert_eq!(minus_one, -<CRational as Scalar>::one());
        assert_eq!(Scalar::conj(&i), -i.clone());
        assert_eq!(i.clone() / i, <CRational as Scalar>::one());
    }
}
