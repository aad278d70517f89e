//! Exact rational values at the I/O boundary.
//!
//! Rationals are written as `"p/q"` strings. Input additionally accepts
//! integers and finite decimals (`"0.51"`), which are converted exactly.

use std::fmt;
use std::str::FromStr;

use harmbounds::Exact;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Significant digits shown in decimal renderings.
pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub Exact);

impl Rational {
    pub fn new(value: Exact) -> Self {
        Rational(value)
    }

    pub fn into_inner(self) -> Exact {
        self.0
    }

    /// Always `p/q`, with `q = 1` for integers.
    pub fn to_fraction(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Terminating decimal with at most [`SIGNIFICANT_DIGITS`] significant
    /// digits, if one exists.
    pub fn exact_decimal(&self) -> Option<String> {
        exact_decimal(&self.0)
    }

    /// Exact decimal when available, otherwise a rounded one.
    pub fn decimal(&self) -> (String, bool) {
        match self.exact_decimal() {
            Some(s) => (s, true),
            None => (approximate_decimal(&self.0), false),
        }
    }

    /// Exact decimal when available, otherwise the fraction.
    pub fn display(&self) -> String {
        self.exact_decimal().unwrap_or_else(|| self.0.to_string())
    }
}

impl From<Exact> for Rational {
    fn from(value: Exact) -> Self {
        Rational(value)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("'{0}' is not a rational number (expected p/q, an integer or a decimal)")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rational(Exact::new(n, d)));
        }
        let (negative, digits) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| err())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32 + 1);
        let value = Exact::new(mantissa, scale);
        Ok(Rational(if negative { -value } else { value }))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn exact_decimal(x: &Exact) -> Option<String> {
    let mut denom = x.denom().clone();
    let (two, five) = (BigInt::from(2u32), BigInt::from(5u32));
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = (x.numer().abs() * BigInt::from(10u32).pow(places)) / x.denom();
    let digits = scaled.to_string();
    let significant = digits.trim_start_matches('0').len();
    if significant > SIGNIFICANT_DIGITS {
        return None;
    }
    let places = places as usize;
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        format!("{int}.{frac}")
    };
    Some(if x.is_negative() { format!("-{body}") } else { body })
}

fn approximate_decimal(x: &Exact) -> String {
    let f = x.to_f64().unwrap_or(f64::NAN);
    if f == 0.0 || !f.is_finite() {
        return format!("{f}");
    }
    let magnitude = f.abs().log10().floor() as i32;
    let places = (SIGNIFICANT_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    format!("{f:.places$}")
}
