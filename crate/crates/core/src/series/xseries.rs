use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::layout::{Exponent, Layout};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Metadata shared by every series of one problem: variable count, truncation degree, base point.
#[derive(Clone)]
pub struct XFrame {
    layout: Arc<Layout>,
    base: Arc<[f64]>,
}

impl XFrame {
    pub fn new(n: usize, max_degree: u32, base_point: Vec<f64>) -> Result<Self> {
        if base_point.len() != n {
            return Err(Error::Config(format!(
                "base point has {} entries for {} variables",
                base_point.len(),
                n
            )));
        }
        Ok(XFrame {
            layout: Layout::shared(n, max_degree),
            base: base_point.into(),
        })
    }

    /// Frame centred at the origin.
    pub fn origin(n: usize, max_degree: u32) -> Self {
        XFrame {
            layout: Layout::shared(n, max_degree),
            base: vec![0.0; n].into(),
        }
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn max_degree(&self) -> u32 {
        self.layout.max_degree()
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn compatible(&self, other: &XFrame) -> bool {
        (Arc::ptr_eq(&self.layout, &other.layout) || {
            self.n() == other.n() && self.max_degree() == other.max_degree()
        }) && (Arc::ptr_eq(&self.base, &other.base) || self.base == other.base)
    }

    /// Same truncation degree and base point with `var` removed (for tangential data).
    pub fn without_var(&self, var: usize) -> XFrame {
        let mut base = self.base.to_vec();
        base.remove(var);
        XFrame {
            layout: Layout::shared(self.n() - 1, self.max_degree()),
            base: base.into(),
        }
    }

    pub fn check(&self, other: &XFrame) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "incompatible series: (n={}, D={}, base={:?}) vs (n={}, D={}, base={:?})",
                self.n(),
                self.max_degree(),
                self.base,
                other.n(),
                other.max_degree(),
                other.base
            )))
        }
    }
}

impl fmt::Debug for XFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "XFrame(n={}, D={}, base={:?})", self.n(), self.max_degree(), self.base)
    }
}

/// Truncated power series in `y = x - base_point` with total-degree truncation.
///
/// `reliable` records how far the stored coefficients agree with the exact
/// object they approximate: `None` means the series is an exact polynomial
/// of degree `<= D`; `Some(r)` means every coefficient of degree `<= r` is
/// exact and nothing above `r` is stored. Products whose terms exceed `D`
/// are truncated silently and become `Some(D)`; each partial derivative
/// lowers `r` by one.
#[derive(Clone)]
pub struct XSeries<S> {
    frame: XFrame,
    reliable: Option<i32>,
    coeffs: Vec<S>,
}

fn min_reliable(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (None, r) | (r, None) => r,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl<S: Scalar> XSeries<S> {
    pub fn zero(frame: &XFrame) -> Self {
        XSeries {
            frame: frame.clone(),
            reliable: None,
            coeffs: vec![S::zero(); frame.layout.len()],
        }
    }

    pub fn constant(frame: &XFrame, c: S) -> Self {
        let mut s = Self::zero(frame);
        s.coeffs[0] = c;
        s
    }

    pub fn one(frame: &XFrame) -> Self {
        Self::constant(frame, S::one())
    }

    /// The local coordinate `y_i = x_i - base_i`.
    pub fn variable(frame: &XFrame, i: usize) -> Result<Self> {
        let n = frame.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Self::from_terms(frame, [(Exponent::unit(n, i), S::one())])
    }

    /// Build from `(exponent, coefficient)` pairs; repeated exponents accumulate.
    /// Terms above the truncation degree are dropped and the result is marked truncated.
    pub fn from_terms<I>(frame: &XFrame, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, S)>,
    {
        let mut s = Self::zero(frame);
        for (e, c) in terms {
            if e.len() != frame.n() {
                return Err(Error::Config(format!(
                    "exponent {:?} has {} entries for {} variables",
                    e.0,
                    e.len(),
                    frame.n()
                )));
            }
            if e.degree() > frame.max_degree() {
                if !c.is_zero() {
                    s.reliable = Some(frame.max_degree() as i32);
                }
                continue;
            }
            let k = frame.layout.index_of(&e).expect("exponent within degree bound");
            s.coeffs[k] = s.coeffs[k].add(&c);
        }
        Ok(s)
    }

    pub fn frame(&self) -> &XFrame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    pub fn max_degree(&self) -> u32 {
        self.frame.max_degree()
    }

    pub fn base_point(&self) -> &[f64] {
        self.frame.base_point()
    }

    /// `None` for exact polynomials, otherwise the degree through which coefficients are exact.
    pub fn reliable(&self) -> Option<i32> {
        self.reliable
    }

    /// Highest degree actually stored.
    pub fn cap(&self) -> i32 {
        let d = self.max_degree() as i32;
        self.reliable.map_or(d, |r| r.min(d))
    }

    pub fn is_exact(&self) -> bool {
        self.reliable.is_none()
    }

    /// Drop everything above degree `r` and mark the series as known only through `r`.
    pub fn with_reliable(mut self, r: i32) -> Self {
        let r = self.reliable.map_or(r, |old| old.min(r));
        self.reliable = Some(r);
        let len = self.frame.layout.count(r);
        self.coeffs.truncate(len);
        self
    }

    pub fn coeff(&self, e: &[u32]) -> S {
        self.frame
            .layout
            .index_of(&Exponent(e.to_vec()))
            .and_then(|k| self.coeffs.get(k).cloned())
            .unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coeffs.first().cloned().unwrap_or_else(S::zero)
    }

    /// Non-zero stored terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (self.frame.layout.exponent(k), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Largest stored coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    /// First stored coefficient that is not negligible, if any.
    pub fn first_offending(&self, tol: f64) -> Option<(Exponent, S)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_negligible(tol))
            .map(|(k, c)| (self.frame.layout.exponent(k).clone(), c.clone()))
    }

    /// All stored coefficients through degree `d` are negligible.
    pub fn vanishes_through(&self, d: i32, tol: f64) -> bool {
        let len = self.frame.layout.count(d).min(self.coeffs.len());
        self.coeffs[..len].iter().all(|c| c.is_negligible(tol))
    }

    /// Highest total degree with a non-zero coefficient, or -1 for zero.
    pub fn degree(&self) -> i32 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| !c.is_zero())
            .map_or(-1, |(k, _)| self.frame.layout.degree(k) as i32)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.frame.check(&other.frame)?;
        Ok(self.zip_with(other, |a, b| a.add(b)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.frame.check(&other.frame)?;
        Ok(self.zip_with(other, |a, b| a.sub(b)))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Self {
        let reliable = min_reliable(self.reliable, other.reliable);
        let len = self.coeffs.len().min(other.coeffs.len());
        XSeries {
            frame: self.frame.clone(),
            reliable,
            coeffs: self.coeffs[..len]
                .iter()
                .zip(&other.coeffs[..len])
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.frame.check(&other.frame)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let layout = &self.frame.layout;
        let d = layout.max_degree() as i32;
        let mut reliable = min_reliable(self.reliable, other.reliable);
        if reliable.is_none() && self.degree() + other.degree() > d {
            reliable = Some(d);
        }
        let cap = reliable.map_or(d, |r| r.min(d));
        let len = layout.count(cap);
        let mut out = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            let room = cap - layout.degree(i) as i32;
            if room < 0 {
                break;
            }
            if a.is_zero() {
                continue;
            }
            let lim = layout.count(room).min(other.coeffs.len());
            let row = layout.mul_row(i);
            for (j, b) in other.coeffs[..lim].iter().enumerate() {
                out[row[j] as usize].mul_add_assign(a, b);
            }
        }
        XSeries {
            frame: self.frame.clone(),
            reliable,
            coeffs: out,
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        XSeries {
            frame: self.frame.clone(),
            reliable: self.reliable,
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut s = self.clone();
        if let Some(c0) = s.coeffs.first_mut() {
            *c0 = c0.add(c);
        }
        s
    }

    /// Formal partial derivative in `y_i`; the result is reliable one degree less.
    pub fn partial(&self, i: usize) -> Result<Self> {
        let n = self.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let reliable = self.reliable.map(|r| r - 1);
        let layout = &self.frame.layout;
        let cap = reliable.map_or(layout.max_degree() as i32, |r| r.min(layout.max_degree() as i32));
        let len = layout.count(cap);
        let mut out = vec![S::zero(); len];
        for &(src, dst, factor) in layout.deriv_table(i) {
            if src < self.coeffs.len() && dst < len {
                out[dst] = self.coeffs[src].mul(&S::from_i64(factor as i64));
            }
        }
        Ok(XSeries {
            frame: self.frame.clone(),
            reliable,
            coeffs: out,
        })
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n()).map(|i| self.partial(i).expect("index in range")).collect()
    }

    pub fn laplacian(&self) -> Self {
        let mut acc = XSeries::zero(&self.frame);
        for i in 0..self.n() {
            let d2 = self.partial(i).and_then(|d| d.partial(i)).expect("index in range");
            acc = &acc + &d2;
        }
        acc
    }

    /// Multiplicative inverse to the truncation degree.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::SingularDivision);
        }
        let inv0 = S::one().div(&c0);
        if self.degree() <= 0 {
            return Ok(XSeries::constant(&self.frame, inv0).with_reliable_of(self.reliable));
        }
        // 1/a = (1/c0) * sum_k (-h)^k with h = (a - c0)/c0, which has no constant term.
        let h = self.add_constant(&c0.neg()).scale(&inv0.neg());
        let mut term = XSeries::one(&self.frame);
        let mut acc = XSeries::one(&self.frame);
        for _ in 0..self.max_degree() {
            term = term.mul_unchecked(&h);
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        let reliable = min_reliable(self.reliable, Some(self.max_degree() as i32));
        let mut out = acc.scale(&inv0);
        out.reliable = reliable;
        let len = self.frame.layout.count(out.cap());
        out.coeffs.truncate(len);
        Ok(out)
    }

    fn with_reliable_of(self, r: Option<i32>) -> Self {
        match r {
            Some(r) => self.with_reliable(r),
            None => self,
        }
    }

    /// Evaluate at an absolute point `x` (the series is in `x - base_point`).
    pub fn eval(&self, point: &[S]) -> S {
        let n = self.n();
        let layout = &self.frame.layout;
        let d = layout.max_degree() as usize;
        // powers[i][p] = y_i^p
        let powers: Vec<Vec<S>> = (0..n)
            .map(|i| {
                let base = S::from_f64(self.frame.base[i]).expect("finite base point");
                let y = point[i].sub(&base);
                let mut row = Vec::with_capacity(d + 1);
                row.push(S::one());
                for p in 1..=d {
                    let next = row[p - 1].mul(&y);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = S::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (i, &p) in layout.exponent(k).powers().iter().enumerate() {
                if p > 0 {
                    term = term.mul(&powers[i][p as usize]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n() {
            return Err(Error::Config(format!(
                "point has {} coordinates for {} variables",
                point.len(),
                self.n()
            )));
        }
        let p: Vec<S> = point
            .iter()
            .map(|&v| S::from_f64(v).ok_or_else(|| Error::Domain(format!("non-finite coordinate {v}"))))
            .collect::<Result<_>>()?;
        Ok(self.eval(&p).to_f64())
    }

    /// Coefficient of `y_var^power`, as a series in all variables with no `y_var` dependence.
    pub fn var_slice(&self, var: usize, power: u32) -> Self {
        let layout = &self.frame.layout;
        let mut out = XSeries::zero(&self.frame);
        out.reliable = self.reliable.map(|r| r - power as i32);
        out.coeffs.truncate(layout.count(out.cap()));
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = layout.exponent(k);
            if e.0[var] == power && !c.is_zero() {
                let mut lower = e.clone();
                lower.0[var] = 0;
                let dst = layout.index_of(&lower).expect("lower exponent exists");
                if dst < out.coeffs.len() {
                    out.coeffs[dst] = c.clone();
                }
            }
        }
        out
    }

    /// Multiply by `y_var^power` (truncating at D).
    pub fn mul_var_power(&self, var: usize, power: u32) -> Self {
        let mut e = Exponent::zero(self.n());
        e.0[var] = power;
        let mono = XSeries::from_terms(&self.frame, [(e, S::one())]).expect("valid exponent");
        let mut out = &XSeries { reliable: None, ..self.clone() } * &mono;
        if let Some(r) = self.reliable {
            let d = self.max_degree() as i32;
            out = out.with_reliable((r + power as i32).min(d));
        }
        out
    }

    /// Re-embed a series over `frame.without_var(var)` into `frame`, independent of `y_var`.
    pub fn embed(&self, frame: &XFrame, var: usize) -> Result<Self> {
        if frame.n() != self.n() + 1 || frame.max_degree() != self.max_degree() {
            return Err(Error::Config("embedding requires one extra variable".into()));
        }
        let mut out = XSeries::zero(frame);
        out.reliable = self.reliable;
        out.coeffs.truncate(frame.layout.count(out.cap()));
        for (e, c) in self.terms() {
            let mut full = e.0.clone();
            full.insert(var, 0);
            let k = frame.layout.index_of(&Exponent(full)).expect("same degree bound");
            out.coeffs[k] = c.clone();
        }
        Ok(out)
    }

    /// Convert the coefficient field (through `f64`; exact from `f64` into rationals).
    pub fn convert<T: Scalar>(&self) -> XSeries<T> {
        XSeries {
            frame: self.frame.clone(),
            reliable: self.reliable,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| T::from_f64(c.to_f64()).unwrap_or_else(T::zero))
                .collect(),
        }
    }
}

impl<'a, S: Scalar> Add for &'a XSeries<S> {
    type Output = XSeries<S>;
    fn add(self, rhs: Self) -> XSeries<S> {
        self.try_add(rhs).expect("compatible series")
    }
}

impl<'a, S: Scalar> Sub for &'a XSeries<S> {
    type Output = XSeries<S>;
    fn sub(self, rhs: Self) -> XSeries<S> {
        self.try_sub(rhs).expect("compatible series")
    }
}

impl<'a, S: Scalar> Mul for &'a XSeries<S> {
    type Output = XSeries<S>;
    fn mul(self, rhs: Self) -> XSeries<S> {
        self.try_mul(rhs).expect("compatible series")
    }
}

impl<'a, S: Scalar> Neg for &'a XSeries<S> {
    type Output = XSeries<S>;
    fn neg(self) -> XSeries<S> {
        self.scale(&S::one().neg())
    }
}

impl<S: Scalar> PartialEq for XSeries<S> {
    /// Coefficientwise equality of the stored terms (reliability is metadata).
    fn eq(&self, other: &Self) -> bool {
        if !self.frame.compatible(&other.frame) {
            return false;
        }
        let zero = S::zero();
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len).all(|k| self.coeffs.get(k).unwrap_or(&zero) == other.coeffs.get(k).unwrap_or(&zero))
    }
}

impl<S: Scalar> fmt::Display for XSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.degree() == 0 {
                write!(f, "{}", c)?;
            } else {
                write!(f, "{}*{}", c, e)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(r) = self.reliable {
            write!(f, " + O(deg {})", r + 1)?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for XSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "XSeries[{}]", self)
    }
}
