//! Exact rational helpers: parsing of `"p/q"` and decimal strings, rounding,
//! and serde adapters that write rationals as strings.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serializer;

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `num / den` as an exact rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.125"` exactly.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::ParseRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if !digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (digits.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let mantissa: BigInt = format!("{digits}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn ceil_u64(x: &Rational) -> Result<u64> {
    x.ceil()
        .to_integer()
        .to_u64()
        .ok_or(Error::Overflow("ceiling does not fit in u64"))
}

pub fn floor_u64(x: &Rational) -> Result<u64> {
    x.floor()
        .to_integer()
        .to_u64()
        .ok_or(Error::Overflow("floor does not fit in u64"))
}

/// Reduced `(numerator, denominator)` of a positive rational as `i128`s.
pub fn to_i128_pair(x: &Rational) -> Result<(i128, i128)> {
    let num = x.numer().to_i128().ok_or(Error::Overflow("numerator exceeds i128"))?;
    let den = x.denom().to_i128().ok_or(Error::Overflow("denominator exceeds i128"))?;
    Ok((num, den))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Smallest rational on the grid `k / denom` that is `>= x`.
pub fn round_up_to_grid(x: f64, denom: i64) -> Rational {
    let k = (x * denom as f64).ceil() as i64;
    rat(k, denom)
}

pub fn max_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .fold(Rational::zero(), |acc, v| if *v > acc { v.clone() } else { acc })
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn is_unit(x: &Rational) -> bool {
    x.is_one()
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn ser<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_opt<S: Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub fn ser_vec<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

pub fn ser_opt_vec<S: Serializer>(xs: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match xs {
        Some(v) => ser_vec(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_matrix<S: Serializer>(
    rows: &[Vec<Rational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(
        rows.iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
    )
}
