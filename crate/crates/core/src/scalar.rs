//! Exact/float scalar abstraction shared by the solvers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rational(r: &Rational) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(&Rational::new(n as i128, d as i128))
    }
    fn to_f64(&self) -> f64;
    /// `Some` when the value is carried exactly.
    fn as_rational(&self) -> Option<Rational>;
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn as_rational(&self) -> Option<Rational> {
        None
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        *r
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn as_rational(&self) -> Option<Rational> {
        Some(*self)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Split off the integer part so large numerators keep their precision.
    let n = *r.numer();
    let d = *r.denom();
    let q = n / d;
    let rem = n % d;
    q as f64 + rem.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, integers and decimal literals (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::BadLiteral(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: i128 = if all.is_empty() { 0 } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i32;
    if scale.unsigned_abs() > 36 {
        return Err(bad());
    }
    let pow = 10i128.checked_pow(scale.unsigned_abs()).ok_or_else(bad)?;
    let mut r = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow).ok_or_else(bad)?)
    } else {
        Rational::new(numer, pow)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Reduction into `[0, 1)`, guarding against `rem_euclid` rounding up to 1.
pub fn frac_f64(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn frac_rational(x: &Rational) -> Rational {
    let f = x - x.floor();
    debug_assert!(!f.is_negative());
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational("0.3").unwrap(), Rational::new(3, 10));
        assert_eq!(parse_rational("-2").unwrap(), Rational::from_integer(-2));
        assert_eq!(parse_rational("2.5e-1").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-0.5/2").unwrap(), Rational::new(-1, 4));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn frac_never_returns_one() {
        assert_eq!(frac_f64(-1e-18), 0.0);
        assert_eq!(frac_f64(2.25), 0.25);
        assert_eq!(frac_rational(&Rational::new(-1, 4)), Rational::new(3, 4));
    }
}
