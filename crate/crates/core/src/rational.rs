//! Exact rational helpers shared by every module.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for payoffs, weights and probability mass.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.05"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let num = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    Rational::from_str(s).map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

/// Canonical fraction string (`"1/3"`, `"0"`, `"1"`).
pub fn format(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators and denominators: divide in log space.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Nearest rational with a power-of-two denominator; used when a float
/// parameter has to enter an exact computation.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::BadParameter(format!("non-finite value {x}")))
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && r <= &one()
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Serde adapter that stores a rational as its fraction string.
pub mod as_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Like [`as_string`] but the field may be absent.
pub mod as_opt_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&super::format(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| super::parse(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Serde adapter for a list of fraction strings.
pub mod as_string_vec {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(r.iter().map(super::format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| super::parse(s).map_err(serde::de::Error::custom)).collect()
    }
}
