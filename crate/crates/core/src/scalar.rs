//! The exact scalar type and its text forms.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type ExactScalar = BigRational;

pub fn rat(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn from_bigint(n: BigInt) -> ExactScalar {
    BigRational::from_integer(n)
}

pub fn to_f64(x: &ExactScalar) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// `num` when the denominator is one, `num/den` otherwise.
pub fn format_scalar(x: &ExactScalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Always `num/den`.
pub fn format_fraction(x: &ExactScalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `a/b`, an integer, or a decimal such as `-0.125`. Anything else
/// that parses as a finite `f64` (e.g. `1e-3`) is converted exactly from its
/// binary value.
pub fn parse_scalar(text: &str) -> Result<ExactScalar> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::input("empty number"));
    }
    let bad = || Error::input(format!("cannot parse number `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::input(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    if let Some(v) = parse_decimal(s) {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| bad())?;
    BigRational::from_float(f).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<ExactScalar> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.')?;
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num::pow(BigInt::from(10u32), frac.len());
    let v = BigRational::new(n, d);
    Some(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_scalar("27/2").unwrap(), rat(27, 2));
        assert_eq!(parse_scalar("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
        assert_eq!(parse_scalar("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_scalar(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_scalar("1e-1").unwrap(), BigRational::from_float(0.1).unwrap());
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("abc").is_err());
    }

    #[test]
    fn formats() {
        assert_eq!(format_scalar(&rat(27, 2)), "27/2");
        assert_eq!(format_scalar(&int(1)), "1");
        assert_eq!(format_fraction(&int(1)), "1/1");
    }
}
