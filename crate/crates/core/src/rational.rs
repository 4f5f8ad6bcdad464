//! Exact rational helpers shared by every module.
//!
//! All model data is stored as [`Rat`] (arbitrary precision). Hot loops clear
//! denominators once and work on machine integers instead.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `a/b`, `a`, or a finite decimal such as `-1.25` without rounding.
pub fn parse_rational(text: &str) -> Result<Rat, ParseRationalError> {
    let s = text.trim();
    let err = || ParseRationalError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() && whole_digits.is_empty() {
            return Err(err());
        }
        if !whole_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err())?
        };
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rat::new(numer, denom));
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(n))
}

/// Always renders `numer/denom`, the lossless form used by instance files.
pub fn format_fraction(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Renders integers bare and everything else as `numer/denom`.
pub fn format_compact(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format_fraction(r)
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn positive_part(r: Rat) -> Rat {
    if r.is_negative() {
        Rat::zero()
    } else {
        r
    }
}

/// Least common multiple of the denominators of all values (1 for none).
pub fn common_denominator<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rat>,
{
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// `r * scale` as an `i128`, or `None` if it is not an integer or does not fit.
pub fn scaled_i128(r: &Rat, scale: &BigInt) -> Option<i128> {
    let v = r * Rat::from_integer(scale.clone());
    if !v.is_integer() {
        return None;
    }
    v.to_integer().to_i128()
}

pub fn floor_to_u64(r: &Rat) -> Option<u64> {
    if r.is_negative() {
        return None;
    }
    r.floor().to_integer().to_u64()
}
