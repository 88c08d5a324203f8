//! Exact money arithmetic.
//!
//! Every payment, rebate and surplus is an exact rational. Rebates are
//! fractions of block sizes, so decimal or float representations would
//! drift; an IC audit comparing two utilities must never see rounding noise.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Money units used by quantized valuation draws (1/1000).
pub const MILLI: i64 = 1000;

/// Largest power of ten a rendered decimal may use before falling back to
/// `p/q` notation.
const MAX_DECIMAL_DIGITS: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid money literal `{0}`")]
pub struct ParseMoneyError(pub String);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Money(BigRational::from_integer(BigInt::from(v)))
    }

    /// `numer / denom`. Panics if `denom == 0`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Money(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_milli(milli: i64) -> Self {
        Money::ratio(milli, MILLI)
    }

    pub fn from_usize(v: usize) -> Self {
        Money(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn max(self, other: Money) -> Money {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `max(0, self)`.
    pub fn clamp_non_negative(self) -> Money {
        if self.is_negative() {
            Money::zero()
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Whole milli-units if the value is an exact multiple of 1/1000.
    pub fn to_milli(&self) -> Option<i64> {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(MILLI));
        if scaled.is_integer() {
            scaled.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Rounds down to the 1/1000 grid.
    pub fn floor_milli(&self) -> Money {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(MILLI));
        Money(scaled.floor() / BigRational::from_integer(BigInt::from(MILLI)))
    }

    pub fn floor_to_usize(&self) -> Option<usize> {
        self.0.floor().to_integer().to_usize()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

/// Power of ten `k` such that `denom` divides `10^k`, if any `k <= max`.
fn decimal_places(denom: &BigInt, max: u32) -> Option<u32> {
    let ten = BigInt::from(10);
    let mut pow = BigInt::one();
    for k in 0..=max {
        if pow.is_multiple_of(denom) {
            return Some(k);
        }
        pow *= &ten;
    }
    None
}

impl fmt::Display for Money {
    /// Exact rendering: integers as `12`, terminating decimals as `2.4`,
    /// everything else as `2/3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let numer = self.0.numer();
        let denom = self.0.denom();
        if denom.is_one() {
            return write!(f, "{numer}");
        }
        match decimal_places(denom, MAX_DECIMAL_DIGITS) {
            Some(places) => {
                let scale = BigInt::from(10).pow(places);
                let scaled = numer * (&scale / denom);
                let sign = if scaled.is_negative() { "-" } else { "" };
                let abs = scaled.abs();
                let (int, frac) = abs.div_rem(&scale);
                let frac = format!("{:0>width$}", frac.to_string(), width = places as usize);
                let frac = frac.trim_end_matches('0');
                write!(f, "{sign}{int}.{frac}")
            }
            None => write!(f, "{numer}/{denom}"),
        }
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({self})")
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Bound the exponent so adversarial input cannot request huge powers.
    if frac.len() > 18 || int.len() > 30 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = BigInt::from(10).pow(frac.len() as u32);
    let value = BigRational::new(numer, denom);
    Some(if neg { -value } else { value })
}

impl FromStr for Money {
    type Err = ParseMoneyError;

    /// Accepts `12`, `-2.5`, `.5` and `2/3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseMoneyError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_decimal(n.trim()).filter(|r| r.is_integer()).ok_or_else(err)?;
            let d = parse_decimal(d.trim()).filter(|r| r.is_integer()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Money(n / d));
        }
        parse_decimal(t).map(Money).ok_or_else(err)
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Money {
            type Output = Money;
            fn $method(self, rhs: Money) -> Money {
                Money((self.0).$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Money> for Money {
            type Output = Money;
            fn $method(self, rhs: &'a Money) -> Money {
                Money((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $tr<&'a Money> for &'a Money {
            type Output = Money;
            fn $method(self, rhs: &'a Money) -> Money {
                Money((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Money> for Money {
    fn sub_assign(&mut self, rhs: &Money) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

impl From<i64> for Money {
    fn from(v: i64) -> Self {
        Money::from_int(v)
    }
}

impl PartialEq<i64> for Money {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Money {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn renders_exactly() {
        assert_eq!(Money::ratio(5, 2).to_string(), "2.5");
        assert_eq!(Money::ratio(12, 5).to_string(), "2.4");
        assert_eq!(Money::ratio(2, 5).to_string(), "0.4");
        assert_eq!(Money::ratio(2, 3).to_string(), "2/3");
        assert_eq!(Money::ratio(-1, 40).to_string(), "-0.025");
        assert_eq!(Money::from_int(-7).to_string(), "-7");
        assert_eq!(Money::zero().to_string(), "0");
    }

    #[test]
    fn parses_forms() {
        assert_eq!(m("2.5"), Money::ratio(5, 2));
        assert_eq!(m("-0.8"), Money::ratio(-4, 5));
        assert_eq!(m(" 2/3 "), Money::ratio(2, 3));
        assert_eq!(m(".5"), Money::ratio(1, 2));
        assert_eq!(m("7"), 7);
        for bad in ["", "-", ".", "1/0", "1.5/2", "abc", "1e3", "1..2", "--1"] {
            assert!(bad.parse::<Money>().is_err(), "{bad}");
        }
    }

    #[test]
    fn milli_quantization() {
        assert_eq!(m("2.345").to_milli(), Some(2345));
        assert_eq!(Money::ratio(1, 3).to_milli(), None);
        assert_eq!(Money::ratio(1, 3).floor_milli(), Money::from_milli(333));
    }

    proptest::proptest! {
        #[test]
        fn display_parse_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..5000) {
            let v = Money::ratio(n, d);
            let back: Money = v.to_string().parse().unwrap();
            proptest::prop_assert_eq!(back, v);
        }
    }
}
