//! Scalar abstraction shared by the box, polytope and protocol code.
//!
//! Boxes and polytope membership are meant to run on exact rationals, but the
//! same code also accepts `f32`/`f64` where a caller is happy with rounding.
//! The polytope solver and the exact protocol recursion additionally require
//! [`ExactScalar`], which is only implemented for rational types.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {text:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: &'static str,
}

impl ParseScalarError {
    fn new(text: &str, reason: &'static str) -> Self {
        Self {
            text: text.to_owned(),
            reason,
        }
    }
}

/// A field element usable as a probability.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `numer / denom`; panics when `denom == 0`.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Text form used by the JSON exchange formats: `"p/q"` for rationals,
    /// shortest round-trip decimal for floats.
    fn to_text(&self) -> String;

    /// Accepts `"p/q"`, integers and plain decimals (`"0.75"`).
    fn parse_text(text: &str) -> Result<Self, ParseScalarError>;

    /// Slack allowed in equality and sign checks: zero for exact types.
    fn tolerance() -> Self;

    fn from_usize(value: usize) -> Self {
        Self::from_ratio(value as i64, 1)
    }
}

/// Marker for scalars with exact arithmetic and total order.
pub trait ExactScalar: Scalar + Ord + Eq + Hash {}

/// Parses `"p/q"`, `"-7"` or `"0.125"` into an integer fraction.
pub fn parse_fraction(text: &str) -> Result<(BigInt, BigInt), ParseScalarError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseScalarError::new(text, "empty"));
    }
    if let Some((numer, denom)) = trimmed.split_once('/') {
        let numer: BigInt = numer
            .trim()
            .parse()
            .map_err(|_| ParseScalarError::new(text, "bad numerator"))?;
        let denom: BigInt = denom
            .trim()
            .parse()
            .map_err(|_| ParseScalarError::new(text, "bad denominator"))?;
        if denom.is_zero() {
            return Err(ParseScalarError::new(text, "zero denominator"));
        }
        return Ok((numer, denom));
    }
    let (negative, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseScalarError::new(text, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(ParseScalarError::new(text, "not a decimal or p/q fraction"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits
        .parse()
        .map_err(|_| ParseScalarError::new(text, "bad digits"))?;
    if negative {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok((numer, denom))
}

fn parse_float_text(text: &str) -> Result<f64, ParseScalarError> {
    let trimmed = text.trim();
    if let Ok(value) = trimmed.parse::<f64>() {
        return Ok(value);
    }
    let (numer, denom) = parse_fraction(trimmed)?;
    let ratio = Ratio::new(numer, denom);
    ToPrimitive::to_f64(&ratio).ok_or_else(|| ParseScalarError::new(text, "out of range"))
}

macro_rules! impl_float_scalar {
    ($($t:ty => $tol:expr),*) => {$(
        impl Scalar for $t {
            fn tolerance() -> Self {
                $tol
            }
            fn from_ratio(numer: i64, denom: i64) -> Self {
                assert!(denom != 0, "zero denominator");
                (numer as f64 / denom as f64) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn to_text(&self) -> String {
                format!("{}", self)
            }
            fn parse_text(text: &str) -> Result<Self, ParseScalarError> {
                parse_float_text(text).map(|v| v as $t)
            }
        }
    )*};
}

impl_float_scalar!(f32 => 1e-6, f64 => 1e-12);

macro_rules! impl_ratio_scalar {
    ($($int:ty),*) => {$(
        impl Scalar for Ratio<$int> {
            fn tolerance() -> Self {
                Self::zero()
            }
            fn from_ratio(numer: i64, denom: i64) -> Self {
                assert!(denom != 0, "zero denominator");
                Ratio::new(<$int>::from(numer), <$int>::from(denom))
            }
            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }
            fn to_text(&self) -> String {
                format!("{}/{}", self.numer(), self.denom())
            }
            fn parse_text(text: &str) -> Result<Self, ParseScalarError> {
                let (numer, denom) = parse_fraction(text)?;
                let overflow = || ParseScalarError::new(text, "does not fit the integer type");
                let numer: $int = convert_int(numer).ok_or_else(overflow)?;
                let denom: $int = convert_int(denom).ok_or_else(overflow)?;
                Ok(Ratio::new(numer, denom))
            }
        }
        impl ExactScalar for Ratio<$int> {}
    )*};
}

trait FromBigInt: Sized {
    fn from_big(value: BigInt) -> Option<Self>;
}

impl FromBigInt for i64 {
    fn from_big(value: BigInt) -> Option<Self> {
        value.to_i64()
    }
}

impl FromBigInt for i128 {
    fn from_big(value: BigInt) -> Option<Self> {
        value.to_i128()
    }
}

impl FromBigInt for BigInt {
    fn from_big(value: BigInt) -> Option<Self> {
        Some(value)
    }
}

fn convert_int<T: FromBigInt>(value: BigInt) -> Option<T> {
    T::from_big(value)
}

impl_ratio_scalar!(i64, i128, BigInt);

/// `value^exponent` by repeated squaring.
pub fn powu<T: Scalar>(value: &T, exponent: u32) -> T {
    let mut result = T::one();
    let mut base = value.clone();
    let mut e = exponent;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base.clone();
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * base;
        }
    }
    result
}

/// `2·p − 1`.
pub fn bias_of<T: Scalar>(probability: &T) -> T {
    probability.clone() + probability.clone() - T::one()
}

/// `(1 + E) / 2`.
pub fn probability_of<T: Scalar>(bias: &T) -> T {
    (T::one() + bias.clone()) / (T::one() + T::one())
}
