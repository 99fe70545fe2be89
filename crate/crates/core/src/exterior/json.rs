//! JSON exchange format for forms:
//! `{"degree": k, "entries": [{"idx": [i1, ..., ik], "re": x, "im": y}]}`.
//! Exact scalars write `re`/`im` as `"p/q"` strings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{indices_of, mask_of, Form};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rational_to_string, CRational, Rational, Scalar, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryJson {
    pub idx: Vec<u8>,
    pub re: Value,
    #[serde(default = "zero_value")]
    pub im: Value,
}

fn zero_value() -> Value {
    Value::from(0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormJson {
    pub degree: usize,
    pub entries: Vec<EntryJson>,
}

/// Scalars that can be written to and read from the form JSON format.
pub trait JsonScalar: Scalar {
    fn to_parts(&self) -> (Value, Value);
    fn from_parts(re: &Value, im: &Value, at: &str) -> Result<Self>;
}

fn number(v: &Value, at: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::parse(at, "number out of range")),
        Value::String(s) => parse_rational(s)
            .and_then(|q| num_traits::ToPrimitive::to_f64(&q))
            .ok_or_else(|| Error::parse(at, format!("invalid number '{s}'"))),
        _ => Err(Error::parse(at, "expected a number or a \"p/q\" string")),
    }
}

fn rational(v: &Value, at: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| Error::parse(at, format!("invalid rational '{s}'"))),
        Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| Error::parse(at, "number out of range"))?;
            // Decimal text round-trips better than the binary expansion.
            parse_rational(&n.to_string()).or_else(|| Rational::from_float(x)).ok_or_else(|| Error::parse(at, "non-finite"))
        }
        _ => Err(Error::parse(at, "expected a number or a \"p/q\" string")),
    }
}

impl JsonScalar for f64 {
    fn to_parts(&self) -> (Value, Value) {
        (Value::from(*self), Value::from(0.0))
    }
    fn from_parts(re: &Value, im: &Value, at: &str) -> Result<Self> {
        let im = number(im, at)?;
        if im != 0.0 {
            return Err(Error::parse(at, "imaginary part in a real form"));
        }
        number(re, at)
    }
}

impl JsonScalar for C64 {
    fn to_parts(&self) -> (Value, Value) {
        (Value::from(self.re), Value::from(self.im))
    }
    fn from_parts(re: &Value, im: &Value, at: &str) -> Result<Self> {
        Ok(C64::new(number(re, at)?, number(im, at)?))
    }
}

impl JsonScalar for Rational {
    fn to_parts(&self) -> (Value, Value) {
        (Value::from(rational_to_string(self)), Value::from("0"))
    }
    fn from_parts(re: &Value, im: &Value, at: &str) -> Result<Self> {
        if !Scalar::is_zero(&rational(im, at)?) {
            return Err(Error::parse(at, "imaginary part in a real form"));
        }
        rational(re, at)
    }
}

impl JsonScalar for CRational {
    fn to_parts(&self) -> (Value, Value) {
        (Value::from(rational_to_string(&self.re)), Value::from(rational_to_string(&self.im)))
    }
    fn from_parts(re: &Value, im: &Value, at: &str) -> Result<Self> {
        Ok(CRational::new(rational(re, at)?, rational(im, at)?))
    }
}

impl<S: JsonScalar> Form<S> {
    pub fn to_json(&self) -> FormJson {
        FormJson {
            degree: self.degree(),
            entries: self
                .entries()
                .map(|(m, c)| {
                    let (re, im) = c.to_parts();
                    EntryJson { idx: indices_of(m), re, im }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &FormJson) -> Result<Self> {
        if j.degree > super::DIM {
            return Err(Error::DegreeOverflow(j.degree));
        }
        let mut f = Form::zero(j.degree);
        for (n, e) in j.entries.iter().enumerate() {
            let at = format!("entries[{n}]");
            if e.idx.len() != j.degree {
                return Err(Error::parse(&at, format!("index length {} != degree {}", e.idx.len(), j.degree)));
            }
            let mask = mask_of(&e.idx).map_err(|err| Error::parse(&at, err.to_string()))?;
            f.add_term(mask, S::from_parts(&e.re, &e.im, &at)?);
        }
        Ok(f)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("form JSON is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: FormJson = serde_json::from_str(s)?;
        Form::from_json(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn rational_round_trip() {
        let f = Form::<Rational>::monomial(&[1, 5], ratio(-3, 7)).unwrap()
            + Form::monomial(&[2, 6], ratio(1, 2)).unwrap();
        let s = f.to_json_string();
        assert!(s.contains("\"-3/7\""), "{s}");
        assert_eq!(Form::<Rational>::from_json_str(&s).unwrap(), f);
    }

    #[test]
    fn complex_round_trip_and_errors() {
        let f = Form::<C64>::monomial(&[1, 2, 3], C64::new(0.5, -2.0)).unwrap();
        assert_eq!(Form::<C64>::from_json_str(&f.to_json_string()).unwrap(), f);
        let bad = r#"{"degree": 2, "entries": [{"idx": [2, 1], "re": 1.0, "im": 0.0}]}"#;
        assert!(matches!(Form::<f64>::from_json_str(bad), Err(Error::Parse { .. })));
        let wrong_len = r#"{"degree": 2, "entries": [{"idx": [1], "re": 1.0}]}"#;
        assert!(Form::<f64>::from_json_str(wrong_len).is_err());
        let complex = r#"{"degree": 1, "entries": [{"idx": [1], "re": 1.0, "im": 2.0}]}"#;
        assert!(Form::<f64>::from_json_str(complex).is_err());
    }
}
