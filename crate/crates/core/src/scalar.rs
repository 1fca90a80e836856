//! Numeric backends. Every computation in the crate is generic over
//! [`Scalar`], which is implemented for `f64` (tolerance-based comparisons)
//! and [`Rational`] (arbitrary precision, exact comparisons).

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used by the exact mode.
pub type Rational = BigRational;

/// Default absolute tolerance for float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when comparisons ignore the tolerance and test equality.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(k: usize) -> Self {
        Self::from_ratio(k as i64, 1)
    }

    /// Converts a finite float. Rationals take the exact binary value.
    fn from_f64(x: f64) -> Option<Self>;

    /// Parses decimal (`1.25`, `-3e-2`) or ratio (`7/3`) notation.
    fn parse(text: &str) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// `|self - other| <= tol` in float mode, exact equality otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// Canonical JSON form: a number for floats, a `"p/q"` (or integer) string
    /// for rationals.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_usize(k: usize) -> Self {
        k as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Number(text.to_string()))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Number(text.to_string()))?;
            if d == 0.0 {
                return Err(Error::Number(text.to_string()));
            }
            return Ok(n / d);
        }
        let x: f64 = text.parse().map_err(|_| Error::Number(text.to_string()))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Number(text.to_string()))
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_usize(k: usize) -> Self {
        Rational::from_integer(BigInt::from(k))
    }

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text.trim()).ok_or_else(|| Error::Number(text.to_string()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn to_json(&self) -> serde_json::Value {
        if self.is_integer() {
            serde_json::Value::String(self.numer().to_string())
        } else {
            serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()))
        }
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_rational(n.trim())?;
        let d = parse_rational(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], i32::from_str(&text[pos + 1..]).ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if negative { -value } else { value })
}

/// Converts a float-mode quantity into any backend; used for tolerances
/// and perturbation grids.
pub fn lift<S: Scalar>(x: f64) -> S {
    S::from_f64(x).unwrap_or_else(S::zero)
}

/// Largest absolute value in a slice, as `f64`.
pub fn max_abs<S: Scalar>(values: &[S]) -> f64 {
    values.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}
