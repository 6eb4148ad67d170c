//! Coefficient fields.
//!
//! Every series, nonlinearity and solver in the crate is generic over
//! [`Scalar`]. Two fields are provided: `f64` for production runs and
//! [`Rational`] (arbitrary precision) for exact identity checks.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

pub use num_rational::BigRational as Rational;

/// Arithmetic used by the series machinery.
///
/// The by-reference methods exist because `BigRational` is not `Copy` and
/// the inner loops would otherwise clone on every multiply.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static
{
    /// True for exact fields; tolerance checks collapse to `== 0`.
    const EXACT: bool;
    /// Arithmetic tag written to artifacts.
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact conversion for rationals (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Panics on exact zero division for rationals; callers check first.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    /// `self += a * b`
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    /// `|self| <= tol` in float mode, `self == 0` in exact mode.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Square root when it exists in the field.
    fn sqrt(&self) -> Option<Self>;

    /// Parse a decimal (`"-1.25e-3"`), fraction (`"1/6"`) or integer string.
    fn parse(text: &str) -> Option<Self>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).div(&Self::from_i64(den))
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
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
    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            return (d != 0.0).then_some(n / d);
        }
        text.parse().ok().filter(|v: &f64| v.is_finite())
    }
    fn to_json(&self) -> Value {
        // Rust's Display for f64 is the shortest round-trip representation.
        Value::String(format!("{}", self))
    }
    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => Self::parse(s),
            Value::Array(pair) if pair.len() == 2 => {
                let n = f64::from_json(&pair[0])?;
                let d = f64::from_json(&pair[1])?;
                Some(n / d)
            }
            _ => None,
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Option<Self> {
        <Rational as FromPrimitive>::from_f64(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        if Zero::is_zero(a) || Zero::is_zero(b) {
            return;
        }
        *self += a * b;
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        Zero::is_zero(self)
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }
    fn parse(text: &str) -> Option<Self> {
        parse_rational(text)
    }
    fn to_json(&self) -> Value {
        Value::Array(vec![
            Value::String(self.numer().to_string()),
            Value::String(self.denom().to_string()),
        ])
    }
    fn from_json(v: &Value) -> Option<Self> {
        match v {
            // serde_json prints the shortest representation, which we read back as a decimal.
            Value::Number(n) => parse_rational(&n.to_string()),
            Value::String(s) => parse_rational(s),
            Value::Array(pair) if pair.len() == 2 => {
                let n = Rational::from_json(&pair[0])?;
                let d = Rational::from_json(&pair[1])?;
                (!Zero::is_zero(&d)).then(|| n / d)
            }
            _ => None,
        }
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        return (!Zero::is_zero(&d)).then(|| n / d);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
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
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{}{}", int_part, frac_part);
    let mut numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if negative {
        numer = -numer;
    }
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Some(if shift >= 0 {
        Rational::from_integer(numer * scale)
    } else {
        Rational::new(numer, scale)
    })
}
