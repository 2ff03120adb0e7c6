use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::Matrix;
use super::ops;

/// Arbitrary-precision rational; always stored in canonical form by `num-rational`.
pub type Rational = BigRational;

/// Absolute part of the mixed float tolerance.
pub const TOL_ABS: f64 = 1e-12;
/// Relative part of the mixed float tolerance, scaled by `max |m_ij|`.
pub const TOL_REL: f64 = 1e-9;

/// Mixed tolerance band for a float quantity measured against `scale`.
pub fn float_tolerance(scale: f64) -> f64 {
    TOL_ABS + TOL_REL * scale
}

/// Field element backing a [`Matrix`].
///
/// Two implementations exist: [`Rational`] (exact, the default everywhere) and `f64`.
/// Sign and zero predicates take a `scale` argument, the max-abs entry of the matrix the
/// value came from, which the float backend uses for its tolerance band and the exact
/// backend ignores.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// `self <= 0`, exactly or within the tolerance band.
    fn le_zero(&self, scale: f64) -> bool;
    /// `self == 0`, exactly or within the tolerance band.
    fn near_zero(&self, scale: f64) -> bool;

    fn approx_eq(&self, other: &Self, scale: f64) -> bool {
        (self.clone() - other.clone()).near_zero(scale)
    }

    fn ge_zero(&self, scale: f64) -> bool {
        (-self.clone()).le_zero(scale)
    }

    fn to_json(&self) -> serde_json::Value;

    /// Determinant of a square matrix.
    fn determinant(m: &Matrix<Self>) -> Self;
    /// PSD test of a square symmetric matrix.
    fn psd(m: &Matrix<Self>) -> bool;
    /// Inverse of a square matrix, `None` if singular.
    fn inverse_of(m: &Matrix<Self>) -> Option<Matrix<Self>>;
    /// Index (into `candidates`) of the pivot to use, or `None` if every candidate is zero.
    fn choose_pivot(candidates: &[&Self], scale: f64) -> Option<usize>;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn le_zero(&self, _scale: f64) -> bool {
        !self.is_positive()
    }
    fn near_zero(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
    fn determinant(m: &Matrix<Self>) -> Self {
        ops::bareiss_det(m)
    }
    fn psd(m: &Matrix<Self>) -> bool {
        ops::ldlt_psd(m)
    }
    fn inverse_of(m: &Matrix<Self>) -> Option<Matrix<Self>> {
        ops::bareiss_inverse(m)
    }
    fn choose_pivot(candidates: &[&Self], _scale: f64) -> Option<usize> {
        candidates.iter().position(|c| !Zero::is_zero(*c))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn le_zero(&self, scale: f64) -> bool {
        *self <= float_tolerance(scale)
    }
    fn near_zero(&self, scale: f64) -> bool {
        f64::abs(*self) <= float_tolerance(scale)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(self.to_string()))
    }
    fn determinant(m: &Matrix<Self>) -> Self {
        ops::lu_det(m)
    }
    fn psd(m: &Matrix<Self>) -> bool {
        ops::eigen_psd(m)
    }
    fn inverse_of(m: &Matrix<Self>) -> Option<Matrix<Self>> {
        m.gauss_jordan_inverse()
    }
    fn choose_pivot(candidates: &[&Self], scale: f64) -> Option<usize> {
        let (idx, best) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, f64::abs(**c)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= 1e-14 * scale.max(1.0) {
            None
        } else {
            Some(idx)
        }
    }
}

/// Parses `"3"`, `"-3/2"` or `"0.125"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let r = Rational::new(num, den);
    Some(if negative { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parses_rational_and_decimal_forms() {
        assert_eq!(parse_rational("3/2"), Some(q(3, 2)));
        assert_eq!(parse_rational("0.5"), Some(q(1, 2)));
        assert_eq!(parse_rational("-1.25"), Some(q(-5, 4)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("4/8"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn float_sign_predicates_use_mixed_tolerance() {
        assert!(1e-13.le_zero(0.0));
        assert!(!1e-11.le_zero(0.0));
        assert!(5e-7.le_zero(1000.0));
        assert!(!Scalar::le_zero(&q(1, 1_000_000_000), 0.0));
        assert!(Scalar::le_zero(&q(0, 1), 0.0));
    }
}
