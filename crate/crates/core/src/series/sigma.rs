use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::xseries::{XFrame, XSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which transverse variable a [`SigmaSeries`] is expanded in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    /// `sigma = T`
    T,
    /// `sigma = T^(1/m)` with `m >= 2`
    Root(u32),
}

impl SigmaKind {
    /// The `m` in `sigma = T^(1/m)`; 1 for `T`.
    pub fn denominator(self) -> u32 {
        match self {
            SigmaKind::T => 1,
            SigmaKind::Root(m) => m,
        }
    }

    pub fn for_denominator(m: u32) -> Self {
        if m <= 1 {
            SigmaKind::T
        } else {
            SigmaKind::Root(m)
        }
    }
}

fn exact_zero<S: Scalar>(c: &XSeries<S>) -> bool {
    c.is_exact() && c.is_zero()
}

fn order_add(k: i32, v: i32) -> i32 {
    if k >= EXACT_ORDER {
        EXACT_ORDER
    } else {
        k + v
    }
}

/// Order sentinel for series that are exact polynomials in sigma.
pub const EXACT_ORDER: i32 = i32::MAX / 4;

/// Truncated series in sigma with [`XSeries`] coefficients.
///
/// `coeffs[i]` is the coefficient of `sigma^(valuation + i)`. Negative
/// valuations give a bounded pole window. `max_order` is the last order
/// that is known; products track it the usual way for Laurent series,
/// `min(Ka + vb, Kb + va)`.
#[derive(Clone)]
pub struct SigmaSeries<S> {
    kind: SigmaKind,
    frame: XFrame,
    valuation: i32,
    max_order: i32,
    coeffs: Vec<XSeries<S>>,
}

impl<S: Scalar> SigmaSeries<S> {
    pub fn new(
        kind: SigmaKind,
        frame: &XFrame,
        valuation: i32,
        max_order: i32,
        coeffs: Vec<XSeries<S>>,
    ) -> Result<Self> {
        for c in &coeffs {
            frame.check(c.frame())?;
        }
        let mut s = SigmaSeries {
            kind,
            frame: frame.clone(),
            valuation,
            max_order,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    /// `sum_k coeffs[k] sigma^k`, known through `max_order`.
    pub fn from_coeffs(kind: SigmaKind, frame: &XFrame, coeffs: Vec<XSeries<S>>, max_order: i32) -> Result<Self> {
        Self::new(kind, frame, 0, max_order, coeffs)
    }

    pub fn zero(kind: SigmaKind, frame: &XFrame) -> Self {
        SigmaSeries {
            kind,
            frame: frame.clone(),
            valuation: 0,
            max_order: EXACT_ORDER,
            coeffs: Vec::new(),
        }
    }

    /// A sigma-independent series (exact in sigma).
    pub fn constant(kind: SigmaKind, c: XSeries<S>) -> Self {
        let frame = c.frame().clone();
        let mut s = SigmaSeries {
            kind,
            frame,
            valuation: 0,
            max_order: EXACT_ORDER,
            coeffs: vec![c],
        };
        s.normalize();
        s
    }

    pub fn scalar(kind: SigmaKind, frame: &XFrame, c: S) -> Self {
        Self::constant(kind, XSeries::constant(frame, c))
    }

    /// The monomial `sigma`.
    pub fn sigma(kind: SigmaKind, frame: &XFrame) -> Self {
        Self::constant(kind, XSeries::one(frame)).shift(1)
    }

    /// `T` expressed in sigma: `sigma^m`.
    pub fn t_var(kind: SigmaKind, frame: &XFrame) -> Self {
        Self::constant(kind, XSeries::one(frame)).shift(kind.denominator() as i32)
    }

    fn normalize(&mut self) {
        if self.max_order < EXACT_ORDER {
            let keep = (self.max_order - self.valuation + 1).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        // Only exact zeros may be dropped; a zero slice that is known only
        // through some degree still carries that information.
        while self.coeffs.last().is_some_and(exact_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| exact_zero(c)).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.valuation += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.valuation = 0;
        }
    }

    pub fn kind(&self) -> SigmaKind {
        self.kind
    }

    pub fn frame(&self) -> &XFrame {
        &self.frame
    }

    /// Lowest stored order (0 for the zero series).
    pub fn valuation(&self) -> i32 {
        self.valuation
    }

    pub fn max_order(&self) -> i32 {
        self.max_order
    }

    pub fn is_exact(&self) -> bool {
        self.max_order >= EXACT_ORDER
    }

    /// Highest order with a stored coefficient.
    pub fn top_order(&self) -> i32 {
        self.valuation + self.coeffs.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `sigma^k` (zero when not stored).
    pub fn coeff(&self, k: i32) -> XSeries<S> {
        let i = k - self.valuation;
        if i >= 0 && (i as usize) < self.coeffs.len() {
            self.coeffs[i as usize].clone()
        } else {
            XSeries::zero(&self.frame)
        }
    }

    /// Orders and coefficients from `valuation` to `top_order`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &XSeries<S>)> {
        let v = self.valuation;
        self.coeffs.iter().enumerate().map(move |(i, c)| (v + i as i32, c))
    }

    pub fn truncate(&self, max_order: i32) -> Self {
        let mut s = self.clone();
        s.max_order = s.max_order.min(max_order);
        s.normalize();
        s
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::Config(format!(
                "cannot mix sigma kinds {:?} and {:?}",
                self.kind, other.kind
            )));
        }
        self.frame.check(&other.frame)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.combine(other, |a, b| a - b))
    }

    fn combine(&self, other: &Self, op: impl Fn(&XSeries<S>, &XSeries<S>) -> XSeries<S>) -> Self {
        let max_order = self.max_order.min(other.max_order);
        let lo = self.valuation.min(other.valuation);
        let hi = self.top_order().max(other.top_order()).min(max_order);
        let coeffs = (lo..=hi).map(|k| op(&self.coeff(k), &other.coeff(k))).collect();
        let mut s = SigmaSeries {
            kind: self.kind,
            frame: self.frame.clone(),
            valuation: lo,
            max_order,
            coeffs,
        };
        s.normalize();
        s
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            let mut z = Self::zero(self.kind, &self.frame);
            z.max_order = order_add(self.max_order, other.valuation).min(order_add(other.max_order, self.valuation));
            return Ok(z);
        }
        let va = self.valuation;
        let vb = other.valuation;
        let max_order = order_add(self.max_order, vb).min(order_add(other.max_order, va));
        let lo = va + vb;
        let hi = (self.top_order() + other.top_order()).min(max_order);
        if hi < lo {
            let mut z = Self::zero(self.kind, &self.frame);
            z.max_order = max_order;
            return Ok(z);
        }
        let mut coeffs: Vec<XSeries<S>> = (lo..=hi).map(|_| XSeries::zero(&self.frame)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if exact_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if lo + k as i32 > hi {
                    break;
                }
                if exact_zero(b) {
                    continue;
                }
                coeffs[k] = &coeffs[k] + &(a * b);
            }
        }
        let mut s = SigmaSeries {
            kind: self.kind,
            frame: self.frame.clone(),
            valuation: lo,
            max_order,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    /// Multiply by `sigma^j` (j may be negative).
    pub fn shift(&self, j: i32) -> Self {
        let mut s = self.clone();
        if !s.coeffs.is_empty() {
            s.valuation += j;
        }
        if s.max_order < EXACT_ORDER {
            s.max_order += j;
        }
        s
    }

    /// `sigma d/dsigma`: scales the order-k coefficient by k.
    pub fn euler(&self) -> Self {
        let mut s = self.clone();
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            let k = self.valuation + i as i32;
            *c = c.scale(&S::from_i64(k as i64));
        }
        s.normalize();
        s
    }

    /// `T d/dT = (1/m) sigma d/dsigma`.
    pub fn t_euler(&self) -> Self {
        let m = self.kind.denominator() as i64;
        if m == 1 {
            self.euler()
        } else {
            self.euler().scale(&S::from_ratio(1, m))
        }
    }

    /// `d/dT = T^{-1} (T d/dT)`.
    pub fn d_dt(&self) -> Self {
        self.t_euler().shift(-(self.kind.denominator() as i32))
    }

    /// Coefficientwise spatial derivative.
    pub fn partial(&self, i: usize) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.partial(i)).collect::<Result<Vec<_>>>()?;
        let mut s = SigmaSeries {
            coeffs,
            ..self.clone()
        };
        s.normalize();
        Ok(s)
    }

    pub fn laplacian(&self) -> Self {
        let mut s = SigmaSeries {
            coeffs: self.coeffs.iter().map(XSeries::laplacian).collect(),
            ..self.clone()
        };
        s.normalize();
        s
    }

    /// Multiply every coefficient by a sigma-independent series.
    pub fn mul_x(&self, x: &XSeries<S>) -> Self {
        let mut s = SigmaSeries {
            coeffs: self.coeffs.iter().map(|c| c * x).collect(),
            ..self.clone()
        };
        s.normalize();
        s
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut s = SigmaSeries {
            coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(),
            ..self.clone()
        };
        s.normalize();
        s
    }

    /// Evaluate at `sigma` and the absolute point `x`.
    pub fn eval_at_sigma(&self, sigma: &S, x: &[S]) -> S {
        let mut acc = S::zero();
        // Horner from the top, then the valuation factor.
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(sigma).add(&c.eval(x));
        }
        let v = self.valuation;
        if v >= 0 {
            acc.mul(&sigma.powi(v as u32))
        } else {
            acc.div(&sigma.powi((-v) as u32))
        }
    }

    /// Evaluate at transverse value `T > 0`; `sigma = T^(1/m)` with the positive real root.
    pub fn eval(&self, t_value: f64, x_point: &[f64]) -> Result<f64> {
        if !(t_value > 0.0) {
            return Err(Error::Domain(format!(
                "sigma series evaluated at T = {t_value}; the solution lives on T > 0"
            )));
        }
        if x_point.len() != self.frame.n() {
            return Err(Error::Config(format!(
                "point has {} coordinates for {} variables",
                x_point.len(),
                self.frame.n()
            )));
        }
        let m = self.kind.denominator();
        let sigma = if m == 1 { t_value } else { t_value.powf(1.0 / m as f64) };
        let sigma = S::from_f64(sigma).expect("finite");
        let x: Vec<S> = x_point.iter().map(|&v| S::from_f64(v).expect("finite")).collect();
        Ok(self.eval_at_sigma(&sigma, &x).to_f64())
    }

    /// Largest coefficient magnitude over all stored slices.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(XSeries::max_abs).fold(0.0, f64::max)
    }
}

impl<'a, S: Scalar> Add for &'a SigmaSeries<S> {
    type Output = SigmaSeries<S>;
    fn add(self, rhs: Self) -> SigmaSeries<S> {
        self.try_add(rhs).expect("compatible sigma series")
    }
}

impl<'a, S: Scalar> Sub for &'a SigmaSeries<S> {
    type Output = SigmaSeries<S>;
    fn sub(self, rhs: Self) -> SigmaSeries<S> {
        self.try_sub(rhs).expect("compatible sigma series")
    }
}

impl<'a, S: Scalar> Mul for &'a SigmaSeries<S> {
    type Output = SigmaSeries<S>;
    fn mul(self, rhs: Self) -> SigmaSeries<S> {
        self.try_mul(rhs).expect("compatible sigma series")
    }
}

impl<'a, S: Scalar> Neg for &'a SigmaSeries<S> {
    type Output = SigmaSeries<S>;
    fn neg(self) -> SigmaSeries<S> {
        self.scale(&S::one().neg())
    }
}

impl<S: Scalar> fmt::Debug for SigmaSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = match self.kind {
            SigmaKind::T => "T".to_string(),
            SigmaKind::Root(m) => format!("s[m={m}]"),
        };
        write!(f, "SigmaSeries(")?;
        for (k, c) in self.iter() {
            if !c.is_zero() {
                write!(f, "({})*{}^{} ", c, var, k)?;
            }
        }
        if self.is_exact() {
            write!(f, "exact)")
        } else {
            write!(f, "+ O({}^{}))", var, self.max_order + 1)
        }
    }
}
