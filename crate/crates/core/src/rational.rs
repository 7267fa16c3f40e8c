//! Exact rational scalars and their extension with `+∞`.
//!
//! Every quantity in the crate (seconds, bits, bits per second) is carried as
//! an arbitrary-precision [`Rational`]. Quantities that may diverge (suprema,
//! pseudo-inverses of bounded curves) use [`Extended`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn int(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// `max(self, 0)`, written `(x)^+` in the usual notation.
    pub fn pos(&self) -> Self {
        if self.is_negative() {
            Rational::zero()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Rational(self.0.ceil())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Midpoint of `self` and `other`.
    pub fn mid(&self, other: &Self) -> Self {
        (self + other) / Rational::int(2)
    }

    /// Lossy conversion for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `p/q`, or `p` when the denominator is one.
    pub fn to_ratio_string(&self) -> String {
        self.to_string()
    }

    /// Display form used in reports: `137/20 (6.85)`; integers print bare.
    pub fn to_display_string(&self) -> String {
        if self.is_integer() {
            self.to_string()
        } else {
            format!("{} ({})", self, decimal(self.to_f64()))
        }
    }
}

/// Decimal rendering rounded to six places with trailing zeros trimmed.
pub(crate) fn decimal(value: f64) -> String {
    let s = format!("{:.6}", value);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p/q`, an integer `p`, or a plain decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = whole.starts_with('-');
            let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
            let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
            let denom = num_traits::pow(BigInt::from(10), frac.len());
            let value = BigRational::new(numer, denom);
            return Ok(Rational(if negative { -value } else { value }));
        }
        BigInt::from_str(s)
            .map(|p| Rational(BigRational::from_integer(p)))
            .map_err(|_| bad())
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::int(value)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Rational::int(i)),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand constructor used throughout tests and fixtures: `q(3, 4)` is 3/4.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// A rational or `+∞`.
///
/// The derived order places every finite value below `Infinite`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Extended {
    pub fn zero() -> Self {
        Extended::Finite(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Adds a finite offset; `∞ + r = ∞`.
    pub fn plus(&self, offset: &Rational) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(v + offset),
            Extended::Infinite => Extended::Infinite,
        }
    }

    pub fn add(&self, other: &Extended) -> Extended {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }

    pub fn max(self, other: Extended) -> Extended {
        std::cmp::max(self, other)
    }

    pub fn min(self, other: Extended) -> Extended {
        std::cmp::min(self, other)
    }

    pub fn to_display_string(&self) -> String {
        match self {
            Extended::Finite(v) => v.to_display_string(),
            Extended::Infinite => "unbounded".to_string(),
        }
    }
}

impl From<Rational> for Extended {
    fn from(value: Rational) -> Self {
        Extended::Finite(value)
    }
}

impl PartialEq<Rational> for Extended {
    fn eq(&self, other: &Rational) -> bool {
        matches!(self, Extended::Finite(v) if v == other)
    }
}

impl PartialOrd<Rational> for Extended {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(match self {
            Extended::Finite(v) => v.cmp(other),
            Extended::Infinite => Ordering::Greater,
        })
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.trim() {
            "inf" | "infinite" | "unbounded" => Ok(Extended::Infinite),
            other => other
                .parse()
                .map(Extended::Finite)
                .map_err(serde::de::Error::custom),
        }
    }
}
