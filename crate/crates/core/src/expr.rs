//! A small expression language for structure functions.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'pi' | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp`, `ln`, `sin`, `cos`, `sqrt`, and `diff(e, x)`, which is
//! differentiated symbolically at parse time. Expressions evaluate over any
//! [`Analytic`] scalar: doubles, jets, or exact rationals where the value is
//! rational (`sin(0)`, `cos(0)`, integer powers, ...).

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{parse_rational, rational_to_string, CRational, Rational, Scalar, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Scalars on which expressions can be evaluated. Transcendental functions
/// return `None` when the result is not representable (exact types).
pub trait Analytic: Scalar {
    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    fn powq(&self, p: &Rational) -> Option<Self>;
    fn pi() -> Option<Self>;
    fn real_value(&self) -> f64;
}

fn q_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Analytic for f64 {
    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
    fn ln(&self) -> Option<Self> {
        Some(f64::ln(*self))
    }
    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }
    fn cos(&self) -> Option<Self> {
        Some(f64::cos(*self))
    }
    fn sqrt(&self) -> Option<Self> {
        Some(f64::sqrt(*self))
    }
    fn powq(&self, p: &Rational) -> Option<Self> {
        Some(match p.to_i32() {
            Some(n) if p.is_integer() => self.powi(n),
            _ => self.powf(q_to_f64(p)),
        })
    }
    fn pi() -> Option<Self> {
        Some(std::f64::consts::PI)
    }
    fn real_value(&self) -> f64 {
        *self
    }
}

impl Analytic for C64 {
    fn exp(&self) -> Option<Self> {
        Some(C64::exp(*self))
    }
    fn ln(&self) -> Option<Self> {
        Some(C64::ln(*self))
    }
    fn sin(&self) -> Option<Self> {
        Some(C64::sin(*self))
    }
    fn cos(&self) -> Option<Self> {
        Some(C64::cos(*self))
    }
    fn sqrt(&self) -> Option<Self> {
        Some(C64::sqrt(*self))
    }
    fn powq(&self, p: &Rational) -> Option<Self> {
        Some(match p.to_i32() {
            Some(n) if p.is_integer() => self.powi(n),
            _ => self.powf(q_to_f64(p)),
        })
    }
    fn pi() -> Option<Self> {
        Some(C64::new(std::f64::consts::PI, 0.0))
    }
    fn real_value(&self) -> f64 {
        self.re
    }
}

impl Analytic for Jet {
    fn exp(&self) -> Option<Self> {
        Some(Jet::exp(self))
    }
    fn ln(&self) -> Option<Self> {
        Some(Jet::ln(self))
    }
    fn sin(&self) -> Option<Self> {
        Some(Jet::sin(self))
    }
    fn cos(&self) -> Option<Self> {
        Some(Jet::cos(self))
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Jet::sqrt(self))
    }
    fn powq(&self, p: &Rational) -> Option<Self> {
        Some(match p.to_i32() {
            Some(n) if p.is_integer() => self.powi(n),
            _ => self.powf(q_to_f64(p)),
        })
    }
    fn pi() -> Option<Self> {
        Some(Jet::constant(std::f64::consts::PI))
    }
    fn real_value(&self) -> f64 {
        self.value
    }
}

/// Exact square root of a non-negative integer, if it is a perfect square.
fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Analytic for Rational {
    fn exp(&self) -> Option<Self> {
        Zero::is_zero(self).then(<Rational as One>::one)
    }
    fn ln(&self) -> Option<Self> {
        One::is_one(self).then(<Rational as Zero>::zero)
    }
    fn sin(&self) -> Option<Self> {
        Zero::is_zero(self).then(<Rational as Zero>::zero)
    }
    fn cos(&self) -> Option<Self> {
        Zero::is_zero(self).then(<Rational as One>::one)
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Rational::new(isqrt_exact(self.numer())?, isqrt_exact(self.denom())?))
    }
    fn powq(&self, p: &Rational) -> Option<Self> {
        if !p.is_integer() {
            // Only square roots of perfect squares are supported exactly.
            if p.denom() == &BigInt::from(2) {
                let root = Analytic::sqrt(self)?;
                return root.powq(&Rational::from_integer(p.numer().clone()));
            }
            return None;
        }
        let n = p.to_i32()?;
        if n < 0 && Zero::is_zero(self) {
            return None;
        }
        Some(num_traits::Pow::pow(self, n))
    }
    fn pi() -> Option<Self> {
        None
    }
    fn real_value(&self) -> f64 {
        q_to_f64(self)
    }
}

impl Analytic for CRational {
    fn exp(&self) -> Option<Self> {
        real_only(self, Analytic::exp)
    }
    fn ln(&self) -> Option<Self> {
        real_only(self, Analytic::ln)
    }
    fn sin(&self) -> Option<Self> {
        real_only(self, Analytic::sin)
    }
    fn cos(&self) -> Option<Self> {
        real_only(self, Analytic::cos)
    }
    fn sqrt(&self) -> Option<Self> {
        real_only(self, Analytic::sqrt)
    }
    fn powq(&self, p: &Rational) -> Option<Self> {
        if p.is_integer() {
            let n = p.to_i32()?;
            if n < 0 && Scalar::is_zero(self) {
                return None;
            }
            return Some(num_traits::Pow::pow(self, n));
        }
        real_only(self, |x| x.powq(p))
    }
    fn pi() -> Option<Self> {
        None
    }
    fn real_value(&self) -> f64 {
        q_to_f64(&self.re)
    }
}

fn real_only(z: &CRational, f: impl Fn(&Rational) -> Option<Rational>) -> Option<CRational> {
    if !Zero::is_zero(&z.im) {
        return None;
    }
    Some(CRational::new(f(&z.re)?, <Rational as Zero>::zero()))
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Num(crate::scalar::ratio(p, q))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::call(Func::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::call(Func::Cos, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::call(Func::Exp, a)
    }

    pub fn pow(a: Expr, p: Expr) -> Expr {
        match (&a, &p) {
            (_, Expr::Num(q)) if q.is_one() => a,
            (_, Expr::Num(q)) if Zero::is_zero(q) => Expr::num(1),
            (Expr::Num(b), Expr::Num(q)) if q.is_integer() && q.abs() <= Rational::from_integer(64.into()) => {
                match b.powq(q) {
                    Some(v) => Expr::Num(v),
                    None => Expr::Pow(Box::new(a), Box::new(p)),
                }
            }
            _ => Expr::Pow(Box::new(a), Box::new(p)),
        }
    }

    /// Value of a variable-free rational expression.
    pub fn const_rational(&self) -> Option<Rational> {
        Some(match self {
            Expr::Num(q) => q.clone(),
            Expr::Neg(a) => -a.const_rational()?,
            Expr::Add(a, b) => a.const_rational()? + b.const_rational()?,
            Expr::Sub(a, b) => a.const_rational()? - b.const_rational()?,
            Expr::Mul(a, b) => a.const_rational()? * b.const_rational()?,
            Expr::Div(a, b) => {
                let d = b.const_rational()?;
                if Zero::is_zero(&d) {
                    return None;
                }
                a.const_rational()? / d
            }
            Expr::Pow(a, b) => a.const_rational()?.powq(&b.const_rational()?)?,
            Expr::Call(f, a) => {
                let x = a.const_rational()?;
                match f {
                    Func::Exp => Analytic::exp(&x)?,
                    Func::Ln => Analytic::ln(&x)?,
                    Func::Sin => Analytic::sin(&x)?,
                    Func::Cos => Analytic::cos(&x)?,
                    Func::Sqrt => Analytic::sqrt(&x)?,
                }
            }
            Expr::Pi | Expr::Var(_) => return None,
        })
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Expr::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(Zero::is_zero)
    }

    fn is_one(&self) -> bool {
        self.as_num().is_some_and(One::is_one)
    }

    /// Variables referenced by the expression.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) | Expr::Pi => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces variables by expressions.
    pub fn substitute(&self, defs: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => defs.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => -a.substitute(defs),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(defs)),
            Expr::Add(a, b) => a.substitute(defs) + b.substitute(defs),
            Expr::Sub(a, b) => a.substitute(defs) - b.substitute(defs),
            Expr::Mul(a, b) => a.substitute(defs) * b.substitute(defs),
            Expr::Div(a, b) => a.substitute(defs) / b.substitute(defs),
            Expr::Pow(a, b) => Expr::pow(a.substitute(defs), b.substitute(defs)),
        }
    }

    /// Symbolic derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => Expr::num(0),
            Expr::Var(v) => Expr::num(i64::from(v == var)),
            Expr::Neg(a) => -a.diff(var),
            Expr::Add(a, b) => a.diff(var) + b.diff(var),
            Expr::Sub(a, b) => a.diff(var) - b.diff(var),
            Expr::Mul(a, b) => a.diff(var) * (**b).clone() + (**a).clone() * b.diff(var),
            Expr::Div(a, b) => {
                (a.diff(var) * (**b).clone() - (**a).clone() * b.diff(var)) / Expr::pow((**b).clone(), Expr::num(2))
            }
            Expr::Pow(a, p) => {
                if let Some(q) = p.const_rational() {
                    let lowered = Expr::pow((**a).clone(), Expr::Num(&q - <Rational as One>::one()));
                    Expr::Num(q) * lowered * a.diff(var)
                } else {
                    // a^p (p' ln a + p a'/a)
                    let ln_a = Expr::call(Func::Ln, (**a).clone());
                    self.clone() * (p.diff(var) * ln_a + (**p).clone() * a.diff(var) / (**a).clone())
                }
            }
            Expr::Call(f, a) => {
                let inner = a.diff(var);
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::num(1) / a,
                    Func::Sin => Expr::cos(a),
                    Func::Cos => -Expr::sin(a),
                    Func::Sqrt => Expr::ratio(1, 2) / self.clone(),
                };
                outer * inner
            }
        }
    }

    /// Evaluates with `vars[i]` bound to `names[i]`.
    pub fn eval<S: Analytic>(&self, names: &[String], vars: &[S]) -> Result<S> {
        let undefined = |what: &str| Error::InvalidArgument(format!("{what} is not representable in this scalar type"));
        Ok(match self {
            Expr::Num(q) => S::from_rational(q),
            Expr::Pi => S::pi().ok_or_else(|| undefined("pi"))?,
            Expr::Var(v) => {
                let i = names
                    .iter()
                    .position(|n| n == v)
                    .ok_or_else(|| Error::InvalidArgument(format!("unbound variable '{v}'")))?;
                vars[i].clone()
            }
            Expr::Neg(a) => -a.eval(names, vars)?,
            Expr::Add(a, b) => a.eval(names, vars)? + b.eval(names, vars)?,
            Expr::Sub(a, b) => a.eval(names, vars)? - b.eval(names, vars)?,
            Expr::Mul(a, b) => a.eval(names, vars)? * b.eval(names, vars)?,
            Expr::Div(a, b) => {
                let d = b.eval(names, vars)?;
                if Scalar::is_zero(&d) {
                    return Err(Error::NonFinite(format!("division by zero in '{self}'")));
                }
                a.eval(names, vars)? / d
            }
            Expr::Pow(a, p) => {
                let base = a.eval(names, vars)?;
                match p.const_rational() {
                    Some(q) => base.powq(&q).ok_or_else(|| undefined(&self.to_string()))?,
                    None => {
                        let e = p.eval(names, vars)?;
                        let l = base.ln().ok_or_else(|| undefined(&self.to_string()))?;
                        (e * l).exp().ok_or_else(|| undefined(&self.to_string()))?
                    }
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(names, vars)?;
                let y = match f {
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => x.sqrt(),
                };
                y.ok_or_else(|| undefined(&self.to_string()))?
            }
        })
    }

    /// Evaluates in doubles with a name → value map.
    pub fn eval_f64(&self, env: &[(&str, f64)]) -> Result<f64> {
        let names: Vec<String> = env.iter().map(|(n, _)| n.to_string()).collect();
        let vals: Vec<f64> = env.iter().map(|(_, v)| *v).collect();
        self.eval(&names, &vals)
    }

    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src)?.parse_all()
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(q) => Expr::Num(-q),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a + b),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => b,
            (a, Expr::Neg(b)) => Expr::Sub(Box::new(a), b),
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a - b),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => -b,
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a * b),
            (a, b) if a.is_zero() || b.is_zero() => Expr::num(0),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (a, b) if a.as_num().is_some_and(|q| (-q).is_one()) => -b,
            (a, b) if b.as_num().is_some_and(|q| (-q).is_one()) => -a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Num(a), Expr::Num(b)) if !Zero::is_zero(&b) => Expr::Num(a / b),
            (a, b) if a.is_zero() && !b.is_zero() => Expr::num(0),
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::num(n)
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(q) if q.is_negative() || !q.is_integer() => 2,
        _ => 5,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write!(f, "{}", rational_to_string(q)),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "/")?;
                write_operand(f, b, 3)
            }
            Expr::Pow(a, b) => {
                write_operand(f, a, 5)?;
                write!(f, "^")?;
                write_operand(f, b, 4)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Op(char),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        let chars: Vec<char> = src.chars().collect();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent part, e.g. 1e-3.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let q = parse_rational(&text)
                    .ok_or_else(|| Error::parse(format!("column {}", start + 1), format!("bad number '{text}'")))?;
                tokens.push((start, Token::Num(q)));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push((start, Token::Ident(chars[start..i].iter().collect())));
            } else if "+-*/^(),".contains(c) {
                tokens.push((i, Token::Op(c)));
                i += 1;
            } else {
                return Err(Error::parse(format!("column {}", i + 1), format!("unexpected character '{c}'")));
            }
        }
        Ok(Parser { tokens, pos: 0, len: chars.len() })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> String {
        format!("column {}", self.tokens.get(self.pos).map_or(self.len, |(c, _)| *c) + 1)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.column(), msg)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Expr::Num(q) => Expr::Num(-q),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Token::Num(q) => Ok(Expr::Num(q)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                if !self.eat('(') {
                    return Ok(if name == "pi" { Expr::Pi } else { Expr::Var(name) });
                }
                if name == "diff" {
                    let e = self.expr()?;
                    self.expect(',')?;
                    let var = match self.peek().cloned() {
                        Some(Token::Ident(v)) => v,
                        _ => return Err(self.error("diff expects a variable name as second argument")),
                    };
                    self.pos += 1;
                    self.expect(')')?;
                    return Ok(e.diff(&var));
                }
                let f = Func::from_name(&name).ok_or_else(|| {
                    Error::parse(self.column(), format!("unknown function '{name}' (exp, ln, sin, cos, sqrt, diff)"))
                })?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(Expr::call(f, e))
            }
            Token::Op(c) => {
                self.pos -= 1;
                Err(self.error(format!("unexpected '{c}'")))
            }
        }
    }
}

impl serde::Serialize for Expr {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Expr::parse(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => parse_rational(&n.to_string())
                .map(Expr::Num)
                .ok_or_else(|| serde::de::Error::custom(format!("bad number {n}"))),
            other => Err(serde::de::Error::custom(format!("expected an expression string, found {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_and_evaluate() {
        let e = Expr::parse("2 + sin(x)^2 * 3 - x/4").unwrap();
        let x = 0.3f64;
        let want = 2.0 + x.sin().powi(2) * 3.0 - x / 4.0;
        assert!((e.eval_f64(&[("x", x)]).unwrap() - want).abs() < 1e-15);
        assert_eq!(Expr::parse("-2^2").unwrap().eval_f64(&[]).unwrap(), -4.0);
        assert_eq!(Expr::parse("2^3^2").unwrap().eval_f64(&[]).unwrap(), 512.0);
        assert_eq!(Expr::parse("1.5e1").unwrap(), Expr::num(15));
    }

    #[test]
    fn display_round_trips() {
        for src in ["(1 - s)^(-1/4)*F", "-(a + b)", "a - (b - c)", "a/(b*c)", "exp(-x^2)", "(-2)^3", "a^b^c", "-x^2"] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            let env = [("s", 0.3), ("F", 1.7), ("a", 0.4), ("b", 1.3), ("c", 2.1), ("x", 0.9)];
            assert_eq!(e.eval_f64(&env).unwrap(), again.eval_f64(&env).unwrap(), "{src} -> {e}");
        }
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        let e = Expr::parse("exp(x) * cos(x^2) / (2 + sin(x)) + sqrt(1 + x^2) + (1 - x)^(-1/4)").unwrap();
        let d = e.diff("x");
        let x = 0.37;
        let jet = e.eval(&names(&["x"]), &[Jet::variable(x, 0, 1)]).unwrap();
        let sym = d.eval_f64(&[("x", x)]).unwrap();
        assert!((jet.grad[0] - sym).abs() < 1e-12, "{} vs {}", jet.grad[0], sym);
        let dd = d.diff("x").eval_f64(&[("x", x)]).unwrap();
        assert!((jet.hess[0] - dd).abs() < 1e-10);
    }

    #[test]
    fn exact_evaluation() {
        let e = Expr::parse("cos(f)^2 + 3*sin(f) - 1/2").unwrap();
        let v: Rational = e.eval(&names(&["f"]), &[ratio(0, 1)]).unwrap();
        assert_eq!(v, ratio(1, 2));
        assert!(e.eval(&names(&["f"]), &[ratio(1, 3)]).is_err());
        let r: Rational = Expr::parse("(9/4)^(1/2)").unwrap().eval(&[], &[]).unwrap();
        assert_eq!(r, ratio(3, 2));
    }

    #[test]
    fn parse_errors_locate_the_problem() {
        for bad in ["1 +", "sin x", "foo(1)", "2 $ 3", "(1", "diff(x, 2)"] {
            assert!(matches!(Expr::parse(bad), Err(Error::Parse { .. })), "{bad}");
        }
        let e = Expr::parse("x + y").unwrap();
        assert!(e.eval_f64(&[("x", 1.0)]).is_err());
    }

    #[test]
    fn parse_time_diff() {
        let e = Expr::parse("diff(x^3 + 2*x, x)").unwrap();
        assert_eq!(e.eval_f64(&[("x", 2.0)]).unwrap(), 14.0);
    }
}
