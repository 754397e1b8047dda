//! Exact rational rewards and their text form.
//!
//! Dyadic values print as `"num/2^exp"`; any other rational prints as
//! `"num/den"`. Both forms, plain integers and decimal literals parse back
//! exactly.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

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

/// `1 / 2^exp`.
pub fn dyadic(num: i64, exp: u32) -> Rational {
    Rational::new(BigInt::from(num), BigInt::one() << exp)
}

/// Exact value of a finite `f64` (every finite float is dyadic).
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::domain(format!("{x} is not a finite number")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a ratio of floats.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Returns the exponent `e` when the denominator equals `2^e`.
pub fn dyadic_exponent(r: &Rational) -> Option<u64> {
    let den = r.denom();
    let bits = den.bits();
    if bits == 0 {
        return None;
    }
    let e = bits - 1;
    if *den == BigInt::one() << e {
        Some(e)
    } else {
        None
    }
}

pub fn format(r: &Rational) -> String {
    match dyadic_exponent(r) {
        Some(e) => format!("{}/2^{}", r.numer(), e),
        None => format!("{}/{}", r.numer(), r.denom()),
    }
}

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse {s:?} as an exact rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den = den.trim();
        let den: BigInt = if let Some(exp) = den.strip_prefix("2^") {
            let exp: u32 = exp.parse().map_err(|_| bad())?;
            BigInt::one() << exp
        } else {
            den.parse().map_err(|_| bad())?
        };
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mut value = Rational::from_integer(whole.abs()) + Rational::new(frac_num, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `true` when `r` is a non-negative integer multiple of `1/den`, returning the multiple.
pub fn as_multiple_of(r: &Rational, den: &BigInt) -> Option<BigInt> {
    let scaled = r * Rational::from_integer(den.clone());
    if scaled.is_integer() {
        Some(scaled.to_integer())
    } else {
        None
    }
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= one()
}

/// Smallest gap between consecutive values of a sorted, deduplicated slice.
pub fn min_spacing(sorted: &[Rational]) -> Option<Rational> {
    sorted.windows(2).map(|w| &w[1] - &w[0]).min()
}

/// Exact value accepted from JSON either as a number or as a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let value = match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(int(n)),
            Repr::Float(x) => from_f64(x),
            Repr::Text(s) => parse(&s),
        };
        value.map(Exact).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(&self.0))
    }
}
