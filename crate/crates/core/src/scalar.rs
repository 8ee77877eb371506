//! Numeric modes.
//!
//! Everything above the amplitude level (Schmidt vectors, tail sums, ratios,
//! breakpoints) is generic over [`Scalar`], which is implemented for exact
//! [`Rational`] and for `f64`. Exact mode ignores tolerances; float mode
//! compares through the configured [`Tolerance`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Comparison tolerance used by float mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// Whether arithmetic in this mode is exact.
    const EXACT: bool;

    fn from_f64(x: f64) -> Option<Self>;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Parses `"a/b"`, a decimal such as `"0.125"` or `"1e-3"`, or an integer.
    fn parse(s: &str) -> Result<Self>;

    /// `self == 0`, or `|self| <= tol` in float mode.
    fn is_zero_within(&self, tol: Tolerance) -> bool;

    /// Human-readable rendering: `"6/13"` or a float with 12 significant digits.
    fn render(&self) -> String;

    /// JSON form: rationals as strings, floats as numbers rounded to 12 significant digits.
    fn to_json(&self) -> serde_json::Value;

    fn eq_within(&self, other: &Self, tol: Tolerance) -> bool {
        (self.clone() - other.clone()).is_zero_within(tol)
    }

    /// `self < other` by more than the tolerance.
    fn lt_beyond(&self, other: &Self, tol: Tolerance) -> bool {
        self < other && !self.eq_within(other, tol)
    }

    /// `self <= other` up to the tolerance.
    fn le_within(&self, other: &Self, tol: Tolerance) -> bool {
        self <= other || self.eq_within(other, tol)
    }

    /// The simplest nearby value: in exact mode the first continued-fraction convergent
    /// within `eps`; unchanged in float mode.
    fn snapped(self, _eps: f64) -> Self {
        self
    }

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

/// Rounds to 12 significant digits; the form every float is reported in.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(Scalar::to_f64(&parse_rational(s)?))
    }

    fn is_zero_within(&self, tol: Tolerance) -> bool {
        self.abs() <= tol.0
    }

    fn render(&self) -> String {
        let r = round_sig12(*self);
        format!("{r}")
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(round_sig12(*self))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        // shortest round-trip decimal, so 0.8 becomes 4/5 rather than its binary expansion
        parse_rational(&format!("{x:e}")).ok()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(num.into(), den.into())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn is_zero_within(&self, _tol: Tolerance) -> bool {
        self.is_zero()
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.render())
    }

    fn snapped(self, eps: f64) -> Self {
        let Some(eps) = Rational::from_f64(eps) else { return self };
        // convergents h/k of the continued fraction of self
        let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
        let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
        let mut rest = self.clone();
        loop {
            let a = rest.floor().to_integer();
            (h0, h1) = (h1.clone(), a.clone() * h1 + h0);
            (k0, k1) = (k1.clone(), a.clone() * k1 + k0);
            let approx = Rational::new(h1.clone(), k1.clone());
            let frac = rest - Rational::from_integer(a);
            if (approx.clone() - self.clone()).abs() <= eps || frac.is_zero() {
                return approx;
            }
            rest = frac.recip();
        }
    }
}

/// Exact parse of a fraction, integer or decimal (with optional exponent).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let num = parse_rational(n)?;
        let den = parse_rational(d)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all).map_err(|_| err())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Reads a scalar from JSON: strings go through [`Scalar::parse`], numbers through their
/// shortest decimal form.
pub fn scalar_from_json<S: Scalar>(v: &serde_json::Value) -> Result<S> {
    match v {
        serde_json::Value::String(s) => S::parse(s),
        serde_json::Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| Error::Parse(n.to_string()))?;
            S::from_f64(x).ok_or_else(|| Error::Parse(n.to_string()))
        }
        other => Err(Error::Parse(other.to_string())),
    }
}

pub(crate) fn abs<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        S::zero() - x
    } else {
        x
    }
}
