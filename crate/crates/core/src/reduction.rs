//! Coordinate change `T = t - psi(x)` and the reduced equation for the regular part.
//!
//! Every regime is handled through one object, the scaled defect
//!
//! ```text
//! E[v] = m^{m+1} s^{1-m} T^2 (u_tt + lambda Delta u) - sum_l (m s)^{m+1-l} f_l(t; P, Q)
//! ```
//!
//! where `P = m s u_t`, `Q_i = m s u_i`, `s = T^{1/m}` and `u` is the ansatz built
//! from `v`. For the logarithmic regimes `m = 1` and `s = T`. The order-0 slice of
//! `E` is the cancellation certificate; the next slices are triangular in `v`.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{
    check_higher_conditions, check_pseudo_eikonal, require_time_reversal, require_zero, Hypersurface,
};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Scalar;
use crate::series::{SigmaKind, SigmaSeries, XFrame, XSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `u = -a log(t - psi) + v` on `t > psi`.
    Log,
    /// `u = -a log(psi - t) + v` on `t < psi`.
    NegativeSide,
    /// `Delta u = a^{-1} |grad u|^2` with `u = -a log(x_1 - phi(x')) + v`.
    Elliptic,
    /// `u = a (t - psi)^{(m-1)/m} + (t - psi) v(s, x)` with `s = (t - psi)^{1/m}`.
    Fractional(u32),
}

impl Regime {
    /// `m` in the profile; 1 for logarithmic regimes.
    pub fn m(self) -> u32 {
        match self {
            Regime::Fractional(m) => m,
            _ => 1,
        }
    }

    pub fn is_log(self) -> bool {
        !matches!(self, Regime::Fractional(_))
    }

    pub fn kind(self) -> SigmaKind {
        SigmaKind::for_denominator(self.m())
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Log => "log",
            Regime::NegativeSide => "negative_side",
            Regime::Elliptic => "elliptic",
            Regime::Fractional(_) => "fractional",
        }
    }

    /// Sign `epsilon` with `T = epsilon (t - psi)`.
    pub fn side(self) -> i32 {
        match self {
            Regime::NegativeSide => -1,
            _ => 1,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Fractional(m) => write!(f, "fractional(m={m})"),
            r => write!(f, "{}", r.name()),
        }
    }
}

/// `u_tt + lambda Delta u` in the coordinates `(T, X)`:
/// `c_TT d_T^2 + sum_i c_iT d_i d_T + c_T d_T + lambda Delta_X`.
#[derive(Clone, Debug)]
pub struct TransformedOperator<S: Scalar> {
    pub coeff_tt: XSeries<S>,
    pub coeff_it: Vec<XSeries<S>>,
    pub coeff_t: XSeries<S>,
    pub lambda: i64,
}

impl<S: Scalar> TransformedOperator<S> {
    pub fn new(h: &Hypersurface<S>) -> Self {
        let lambda = h.signature().lambda();
        let lam = S::from_i64(lambda);
        TransformedOperator {
            coeff_tt: h.principal().clone(),
            coeff_it: h.grad().iter().map(|g| g.scale(&lam.mul(&S::from_i64(-2)))).collect(),
            coeff_t: h.lap().scale(&lam.neg()),
            lambda,
        }
    }

    /// `T^2 (u_tt + lambda Delta u)` given `theta(theta-1) u`, `theta u` and the
    /// `X`-dependent part `w` of `u` (`theta = T d/dT`).
    pub fn apply_scaled(&self, tt: &SigmaSeries<S>, th: &SigmaSeries<S>, w: &SigmaSeries<S>) -> Result<SigmaSeries<S>> {
        let kind = tt.kind();
        let m = kind.denominator() as i32;
        let mut acc = tt.mul_x(&self.coeff_tt);
        let mut first = th.mul_x(&self.coeff_t);
        for (i, c) in self.coeff_it.iter().enumerate() {
            first = first.try_add(&th.partial(i)?.mul_x(c))?;
        }
        acc = acc.try_add(&first.shift(m))?;
        let lap = w.laplacian().scale(&S::from_i64(self.lambda));
        acc.try_add(&lap.shift(2 * m))
    }
}

/// Coefficients `v_0 .. v_{k-1}` visible to the order-`k` slice evaluator.
pub struct LowerJet<'a, S> {
    order: usize,
    coeffs: &'a [XSeries<S>],
}

impl<'a, S: Scalar> LowerJet<'a, S> {
    /// `coeffs` must hold at least `order` entries; entries at or above `order` are hidden.
    pub fn new(order: usize, coeffs: &'a [XSeries<S>]) -> Self {
        LowerJet { order, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `v_j`; reading `j >= order` is a triangularity violation.
    pub fn get(&self, j: usize) -> Result<&XSeries<S>> {
        if j >= self.order {
            return Err(Error::Triangularity {
                order: self.order,
                requested: j,
            });
        }
        self.coeffs.get(j).ok_or_else(|| {
            Error::Internal(format!("lower jet for order {} holds only {} coefficients", self.order, self.coeffs.len()))
        })
    }
}

/// Slice-evaluator form of the reduced equation.
#[derive(Clone, Debug)]
pub struct ReducedEquation<S: Scalar> {
    regime: Regime,
    a: S,
    surface: Hypersurface<S>,
    f: Nonlinearity<S>,
    op: TransformedOperator<S>,
    inv_principal: XSeries<S>,
    trace_shift: Option<XSeries<S>>,
}

impl<S: Scalar> ReducedEquation<S> {
    fn assemble(regime: Regime, a: &S, surface: Hypersurface<S>, f: Nonlinearity<S>) -> Result<Self> {
        surface.frame().check(f.frame())?;
        let op = TransformedOperator::new(&surface);
        let inv_principal = surface.principal().reciprocal()?;
        Ok(ReducedEquation {
            regime,
            a: a.clone(),
            surface,
            f,
            op,
            inv_principal,
            trace_shift: None,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn m(&self) -> u32 {
        self.regime.m()
    }

    pub fn kind(&self) -> SigmaKind {
        self.regime.kind()
    }

    /// Surface in the reduced coordinates (`-psi` for the negative side).
    pub fn surface(&self) -> &Hypersurface<S> {
        &self.surface
    }

    /// Nonlinearity in the reduced coordinates.
    pub fn nonlinearity(&self) -> &Nonlinearity<S> {
        &self.f
    }

    pub fn operator(&self) -> &TransformedOperator<S> {
        &self.op
    }

    pub fn frame(&self) -> &XFrame {
        self.surface.frame()
    }

    pub fn trace_shift(&self) -> Option<&XSeries<S>> {
        self.trace_shift.as_ref()
    }

    /// Equivalent equation for `w = v - v0`; its evaluator adds `v0` back internally.
    pub fn with_trace_shift(&self, v0: XSeries<S>) -> Result<Self> {
        if !self.regime.is_log() {
            return Err(Error::Input("only logarithmic regimes carry a trace".into()));
        }
        self.frame().check(v0.frame())?;
        let mut eq = self.clone();
        let shift = match &self.trace_shift {
            Some(old) => old + &v0,
            None => v0,
        };
        eq.trace_shift = Some(shift);
        Ok(eq)
    }

    /// First order determined by the recursion: 1 with a free trace, 0 in the fractional regime.
    pub fn first_order(&self) -> usize {
        if self.regime.is_log() {
            1
        } else {
            0
        }
    }

    /// Indicial multiplier: `k(k+1)` or `(k+m)(k+m+1)`.
    pub fn divisor(&self, k: usize) -> S {
        let k = k as i64;
        if self.regime.is_log() {
            S::from_i64(k * (k + 1))
        } else {
            let m = self.m() as i64;
            S::from_i64((k + m) * (k + m + 1))
        }
    }

    /// Offset between the order of `v_k` and the defect slice that determines it.
    fn slice_offset(&self) -> i32 {
        if self.regime.is_log() {
            0
        } else {
            1
        }
    }

    /// The scaled defect `E[v]` of the ansatz built from `v`.
    pub fn defect(&self, v: &SigmaSeries<S>) -> Result<SigmaSeries<S>> {
        let kind = self.kind();
        let frame = self.frame();
        let m = self.m();
        let mi = m as i32;
        let a = &self.a;
        let v = match &self.trace_shift {
            Some(v0) => v.try_add(&SigmaSeries::constant(kind, v0.clone()))?,
            None => v.clone(),
        };
        let (tt, th, w) = if self.regime.is_log() {
            let th_v = v.euler();
            let tt_v = th_v.euler().try_sub(&th_v)?;
            let th = th_v.try_add(&SigmaSeries::scalar(kind, frame, a.neg()))?;
            let tt = tt_v.try_add(&SigmaSeries::scalar(kind, frame, a.clone()))?;
            (tt, th, v)
        } else {
            let u = SigmaSeries::scalar(kind, frame, a.clone())
                .shift(mi - 1)
                .try_add(&v.shift(mi))?;
            let th = u.t_euler();
            let tt = th.t_euler().try_sub(&th)?;
            (tt, th, u)
        };
        let scaled_op = self.op.apply_scaled(&tt, &th, &w)?;
        let mm = S::from_i64(m as i64);
        let p = th.shift(1 - mi).scale(&mm);
        let mut q = Vec::with_capacity(frame.n());
        for (i, g) in self.surface.grad().iter().enumerate() {
            q.push(w.partial(i)?.shift(1).scale(&mm).try_sub(&p.mul_x(g))?);
        }
        let t = SigmaSeries::constant(kind, self.surface.psi().clone()).try_add(&SigmaSeries::t_var(kind, frame))?;
        let mut e = scaled_op.shift(1 - mi).scale(&mm.powi(m + 1));
        for part in self.f.parts() {
            if part.is_zero() {
                continue;
            }
            let l = part.degree;
            let value = part.eval(&t, &p, &q)?;
            let power = m as i32 + 1 - l as i32;
            e = e.try_sub(&value.shift(power).scale(&mm.powi(power.max(0) as u32)))?;
        }
        Ok(e)
    }

    /// Order-0 slice of the defect with `v = 0`: `a Psi - a^2 f_2(Sigma)` for the logarithmic
    /// regimes, a multiple of the top-degree condition residual in the fractional regime.
    pub fn certificate(&self) -> Result<XSeries<S>> {
        let v = SigmaSeries::zero(self.kind(), self.frame()).truncate(0);
        Ok(self.defect(&v)?.coeff(0))
    }

    /// The slice `r_k` with `divisor(k) v_k = r_k`, computed from `v_0 .. v_{k-1}` only.
    pub fn rhs_slice(&self, k: usize, jet: &LowerJet<'_, S>) -> Result<XSeries<S>> {
        if jet.order() != k {
            return Err(Error::Internal(format!("jet for order {} passed to slice {}", jet.order(), k)));
        }
        let mut coeffs = Vec::with_capacity(k);
        for j in 0..k {
            coeffs.push(jet.get(j)?.clone());
        }
        let v = SigmaSeries::from_coeffs(self.kind(), self.frame(), coeffs, k as i32)?;
        let e = self.defect(&v)?;
        let slice = e.coeff(k as i32 + self.slice_offset());
        let factor = S::one().div(&S::from_i64(self.m() as i64).powi(self.m() - 1)).neg();
        Ok((&slice * &self.inv_principal).scale(&factor))
    }

    /// Right sides `r_k` with every unknown set to zero (the forcing of the recursion).
    pub fn inhomogeneous_data(&self, k_max: usize) -> Result<Vec<XSeries<S>>> {
        let zeros: Vec<XSeries<S>> = (0..=k_max).map(|_| XSeries::zero(self.frame())).collect();
        (self.first_order()..=k_max)
            .map(|k| self.rhs_slice(k, &LowerJet::new(k, &zeros)))
            .collect()
    }
}

/// Logarithmic blowup on `t > psi(x)`; requires the pseudo-Eikonal condition.
pub fn build_log_reduction<S: Scalar>(f: &Nonlinearity<S>, h: &Hypersurface<S>, a: &S) -> Result<ReducedEquation<S>> {
    require_quadratic(f)?;
    let residual = check_pseudo_eikonal(h, &f.part(2), a)?;
    require_zero(&residual, "pseudo-Eikonal")?;
    ReducedEquation::assemble(Regime::Log, a, h.clone(), f.clone())
}

/// Logarithmic blowup on `t < psi(x)` through `s = -t`.
pub fn build_negative_side<S: Scalar>(f: &Nonlinearity<S>, h: &Hypersurface<S>, a: &S) -> Result<ReducedEquation<S>> {
    require_quadratic(f)?;
    require_time_reversal(&f.part(2))?;
    let residual = check_pseudo_eikonal(h, &f.part(2), a)?;
    require_zero(&residual, "pseudo-Eikonal")?;
    let reversed = f.time_reversed();
    let surface = Hypersurface::new(-h.psi())?;
    let residual = check_pseudo_eikonal(&surface, &reversed.part(2), a)?;
    require_zero(&residual, "time-reversed pseudo-Eikonal")?;
    ReducedEquation::assemble(Regime::NegativeSide, a, surface, reversed)
}

/// `Delta u = a^{-1} |grad u|^2` blowing up on `x_1 = phi(x')`; `phi` lives on the `x'` frame.
pub fn build_elliptic_reduction<S: Scalar>(phi: &XSeries<S>, a: &S) -> Result<ReducedEquation<S>> {
    if a.is_zero() {
        return Err(Error::Input("a must be nonzero".into()));
    }
    let surface = Hypersurface::elliptic(phi.clone())?;
    let f = Nonlinearity::elliptic(phi.frame(), a)?;
    ReducedEquation::assemble(Regime::Elliptic, a, surface, f)
}

/// Fractional profile for a nonlinearity of degree `m + 1`; requires both higher conditions.
pub fn build_fractional_reduction<S: Scalar>(
    f: &Nonlinearity<S>,
    h: &Hypersurface<S>,
    a: &S,
    m: u32,
) -> Result<ReducedEquation<S>> {
    if f.top_degree() > m + 1 {
        return Err(Error::Input(format!(
            "nonlinearity has degree {} above m + 1 = {}",
            f.top_degree(),
            m + 1
        )));
    }
    let (top, fm) = check_higher_conditions(h, f, a, m)?;
    require_zero(&top, "top-degree")?;
    require_zero(&fm, "degree-m vanishing")?;
    ReducedEquation::assemble(Regime::Fractional(m), a, h.clone(), f.clone())
}

fn require_quadratic<S: Scalar>(f: &Nonlinearity<S>) -> Result<()> {
    for part in f.parts().iter().skip(3) {
        if !part.is_zero() {
            return Err(Error::Input(format!(
                "logarithmic regimes need a nonlinearity of degree <= 2; found a degree-{} part",
                part.degree
            )));
        }
    }
    Ok(())
}
