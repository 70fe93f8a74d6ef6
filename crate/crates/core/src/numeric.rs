//! Scalars shared by the exact and floating code paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

pub type Rational = BigRational;

/// Tolerance used by floating scalars when deciding that two points coincide.
pub const HIT_TOL: f64 = 1e-12;

/// Ordered field used by the interval-exchange and unfolding code.
///
/// `BigRational` gives exact answers, `TwoFloat` roughly 106 bits and `f64`
/// the usual 53 bits. Equality tests on floating scalars are tolerant.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_int(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Sign with a dead zone of width `tol` for floating scalars.
    fn sign_tol(&self, tol: f64) -> i8;

    fn sign(&self) -> i8 {
        self.sign_tol(HIT_TOL)
    }
    fn near(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).sign() == 0
    }
    fn abs(&self) -> Self {
        if self.sign_tol(0.0) < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sign_tol(&self, tol: f64) -> i8 {
        if *self > tol {
            1
        } else if *self < -tol {
            -1
        } else {
            0
        }
    }
}

impl Scalar for TwoFloat {
    const EXACT: bool = false;
    fn zero() -> Self {
        TwoFloat::from(0.0)
    }
    fn one() -> Self {
        TwoFloat::from(1.0)
    }
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn from_rational(r: &Rational) -> Self {
        let num = big_to_twofloat(r.numer());
        let den = big_to_twofloat(r.denom());
        num / den
    }
    fn from_int(n: i64) -> Self {
        TwoFloat::from(n)
    }
    fn to_f64(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn sign_tol(&self, tol: f64) -> i8 {
        Scalar::sign_tol(&Scalar::to_f64(self), tol)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn sign_tol(&self, _tol: f64) -> i8 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

fn big_to_twofloat(x: &BigInt) -> TwoFloat {
    // Split into a high part exactly representable in f64 and a remainder.
    let hi = x.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let hi_big = BigInt::from_f64(hi).unwrap_or_default();
    let lo = (x - hi_big).to_f64().unwrap_or(0.0);
    TwoFloat::from(hi) + TwoFloat::from(lo)
}

/// Correctly scaled conversion of a rational to `f64`, also for huge terms.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let (mn, en) = big_to_scaled(r.numer());
    let (md, ed) = big_to_scaled(r.denom());
    (mn / md) * 2f64.powi((en - ed).clamp(-2000, 2000) as i32)
}

/// Returns `(m, e)` with `x ≈ m · 2^e` and `|m| < 2^64`.
pub fn big_to_scaled(x: &BigInt) -> (f64, i64) {
    let bits = x.bits() as i64;
    if bits <= 64 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 64;
    let top: BigInt = x >> (shift as usize);
    (top.to_f64().unwrap_or(0.0), shift)
}

/// Natural logarithm of `|x|` for an arbitrarily large integer.
pub fn ln_abs_big(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = big_to_scaled(x);
    m.abs().ln() + e as f64 * std::f64::consts::LN_2
}

/// `ln |r|` for a rational with arbitrarily large terms.
pub fn ln_abs_ratio(r: &Rational) -> f64 {
    ln_abs_big(r.numer()) - ln_abs_big(r.denom())
}

/// `ln sinh x` for `x > 0`, without overflow.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `asinh(e^l)` computed without overflow for large `l`.
pub fn asinh_exp(l: f64) -> f64 {
    if l > 30.0 {
        // asinh(X) = ln(2X) + 1/(4X²) - ...
        l + std::f64::consts::LN_2 + 0.25 * (-2.0 * l).exp()
    } else {
        l.exp().asinh()
    }
}

/// Parses `"n/d"`, `"n"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    // Decimal literal: exact base-ten value, not the nearest binary float.
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(n, d);
    Some(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter writing rationals as `"n/d"` strings and reading strings or numbers.
pub mod serde_rational {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        value_to_rational(&v).ok_or_else(|| de::Error::custom(format!("not a rational: {v}")))
    }

    pub fn value_to_rational(v: &serde_json::Value) -> Option<Rational> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Some(BigRational::from_integer(BigInt::from(i)))
                } else {
                    parse_rational(&n.to_string())
                }
            }
            _ => None,
        }
    }
}

/// Option variant of [`serde_rational`].
pub mod serde_rational_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        match v {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(v) => serde_rational::value_to_rational(&v)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom("not a rational")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-7").unwrap(), BigRational::from_integer((-7).into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn big_logs() {
        let x: BigInt = num_traits::pow(BigInt::from(3), 2000);
        let l = ln_abs_big(&x);
        assert!((l - 2000.0 * 3f64.ln()).abs() < 1e-9);
        let r = BigRational::new(x.clone() + 1, x);
        assert!((ratio_to_f64(&r) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn asinh_exp_matches_direct() {
        for l in [-5.0, 0.0, 3.0, 29.0, 31.0] {
            let direct = f64::exp(l).asinh();
            assert!((asinh_exp(l) - direct).abs() < 1e-12 * direct.max(1.0));
        }
        assert!((asinh_exp(800.0) - (800.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn twofloat_from_rational_is_accurate() {
        let r = BigRational::new(1.into(), 3.into());
        let t = <TwoFloat as Scalar>::from_rational(&r);
        let err = t - TwoFloat::from(1.0) / TwoFloat::from(3.0);
        assert!(err.hi().abs() < 1e-30);
    }
}
