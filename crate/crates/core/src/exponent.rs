//! Lebesgue exponents in `[1, ∞]` and their conjugates.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// An exponent `p ∈ [1, ∞]`.
///
/// Exponents read from text as integers or fractions (`"3/2"`) keep an exact
/// rational form, so the conjugate `q = p / (p - 1)` is computed without
/// rounding before it is converted to the scalar type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent<T> {
    Finite { value: T, exact: Option<Ratio<i64>> },
    Infinity,
}

impl<T: Scalar> Exponent<T> {
    pub fn finite(value: T) -> Result<Self> {
        if !(value >= T::one()) || !value.is_finite() {
            return Err(invalid("exponent", format!("{value} is not in [1, ∞)")));
        }
        let exact = exact_ratio(value.as_f64());
        Ok(Exponent::Finite { value, exact })
    }

    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || num < den {
            return Err(invalid("exponent", format!("{num}/{den} is not in [1, ∞)")));
        }
        let r = Ratio::new(num, den);
        Ok(Exponent::Finite {
            value: T::lit(*r.numer() as f64 / *r.denom() as f64),
            exact: Some(r),
        })
    }

    pub fn infinity() -> Self {
        Exponent::Infinity
    }

    pub fn one() -> Self {
        Exponent::rational(1, 1).expect("1 is a valid exponent")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Finite numeric value, `None` for `∞`.
    pub fn value(&self) -> Option<T> {
        match *self {
            Exponent::Finite { value, .. } => Some(value),
            Exponent::Infinity => None,
        }
    }

    /// Value with `∞` mapped to `T::infinity()`.
    pub fn as_scalar(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }

    /// `true` for `p ∈ (1, ∞)`.
    pub fn is_reflexive_range(&self) -> bool {
        matches!(self.value(), Some(v) if v > T::one())
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> Self {
        match *self {
            Exponent::Infinity => Exponent::one(),
            Exponent::Finite { value, exact } => match exact {
                Some(r) if r == Ratio::from_integer(1) => Exponent::Infinity,
                Some(r) => {
                    let q = r / (r - Ratio::from_integer(1));
                    Exponent::Finite {
                        value: T::lit(*q.numer() as f64 / *q.denom() as f64),
                        exact: Some(q),
                    }
                }
                None if value == T::one() => Exponent::Infinity,
                None => {
                    let q = value / (value - T::one());
                    Exponent::Finite {
                        value: q,
                        exact: None,
                    }
                }
            },
        }
    }

    /// Exponent required to lie in `(1, ∞)`.
    pub fn require_reflexive_range(&self) -> Result<T> {
        match self.value() {
            Some(v) if v > T::one() => Ok(v),
            _ => Err(Error::Domain(format!(
                "exponent must lie in (1,∞), got {self}"
            ))),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Exponent<U> {
        match *self {
            Exponent::Infinity => Exponent::Infinity,
            Exponent::Finite { value, exact } => Exponent::Finite {
                value: U::lit(value.as_f64()),
                exact,
            },
        }
    }
}

/// Rational form of `x` when it is exactly a fraction with a small denominator.
fn exact_ratio(x: f64) -> Option<Ratio<i64>> {
    for den in [1_i64, 2, 3, 4, 5, 6, 8, 10, 16, 100, 1000] {
        let num = (x * den as f64).round();
        if num.abs() < 1e12 && num / den as f64 == x {
            return Some(Ratio::new(num as i64, den));
        }
    }
    None
}

impl<T: Scalar> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite {
                exact: Some(r), ..
            } if *r.denom() != 1 => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Finite { value, .. } => write!(f, "{value}"),
        }
    }
}

impl<T: Scalar> FromStr for Exponent<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "inf" | "infinity" | "∞" | "Inf" | "INF" => return Ok(Exponent::Infinity),
            _ => {}
        }
        if let Some((n, d)) = s.split_once('/') {
            let num: i64 = n
                .trim()
                .parse()
                .map_err(|_| invalid("exponent", format!("cannot parse {s:?}")))?;
            let den: i64 = d
                .trim()
                .parse()
                .map_err(|_| invalid("exponent", format!("cannot parse {s:?}")))?;
            return Exponent::rational(num, den);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| invalid("exponent", format!("cannot parse {s:?}")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Exponent::Infinity);
        }
        Exponent::finite(T::lit(v))
    }
}

impl<T: Scalar> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite { exact: Some(r), .. } if *r.denom() == 1 => {
                s.serialize_f64(*r.numer() as f64)
            }
            Exponent::Finite { exact: None, value } => s.serialize_f64(value.as_f64()),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Exponent<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(i) => Exponent::rational(i, 1),
            Raw::Num(x) if x.is_infinite() && x > 0.0 => Ok(Exponent::Infinity),
            Raw::Num(x) => Exponent::finite(T::lit(x)),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        let p: Exponent<f64> = "3/2".parse().unwrap();
        assert_eq!(p.conjugate().value(), Some(3.0));
        assert_eq!(p.conjugate().conjugate(), p);
        let two = Exponent::<f64>::finite(2.0).unwrap();
        assert_eq!(two.conjugate().value(), Some(2.0));
        assert!(Exponent::<f64>::one().conjugate().is_infinite());
        assert_eq!(Exponent::<f64>::Infinity.conjugate().value(), Some(1.0));
    }

    #[test]
    fn inexact_conjugate_satisfies_identity() {
        let p = Exponent::<f64>::finite(std::f64::consts::E).unwrap();
        let q = p.conjugate().value().unwrap();
        let e = std::f64::consts::E;
        assert!((1.0 / e + 1.0 / q - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn rejects_below_one() {
        assert!(Exponent::<f64>::finite(0.5).is_err());
        assert!("1/2".parse::<Exponent<f64>>().is_err());
        assert!(Exponent::<f64>::finite(1.0)
            .unwrap()
            .require_reflexive_range()
            .is_err());
    }
}
