//! Order-by-order solution of the reduced equation and the assembled singular solution.

use crate::error::{Error, Result};
use crate::geometry::Signature;
use crate::reduction::{LowerJet, ReducedEquation, Regime};
use crate::scalar::Scalar;
use crate::series::{SigmaKind, SigmaSeries, XFrame, XSeries};

pub const DEFAULT_ORDER: usize = 8;

/// A reduced equation together with its data.
#[derive(Clone, Debug)]
pub struct RecursionSpec<S: Scalar> {
    pub equation: ReducedEquation<S>,
    /// `v(0, x)`; only for logarithmic regimes.
    pub trace: Option<XSeries<S>>,
    pub order: usize,
}

impl<S: Scalar> RecursionSpec<S> {
    pub fn new(equation: ReducedEquation<S>, trace: Option<XSeries<S>>, order: usize) -> Result<Self> {
        if trace.is_some() && !equation.regime().is_log() {
            return Err(Error::Input("the fractional regime has no free trace".into()));
        }
        if let Some(v0) = &trace {
            equation.frame().check(v0.frame())?;
        }
        Ok(RecursionSpec { equation, trace, order })
    }

    /// The trace, or zero.
    pub fn trace_or_zero(&self) -> XSeries<S> {
        self.trace
            .clone()
            .unwrap_or_else(|| XSeries::zero(self.equation.frame()))
    }
}

/// Move the trace into the evaluator so the unknown `w = v - v0` starts at zero.
pub fn shift_initial_data<S: Scalar>(spec: &RecursionSpec<S>) -> Result<RecursionSpec<S>> {
    match &spec.trace {
        None => Ok(spec.clone()),
        Some(v0) if v0.is_zero() && v0.is_exact() => Ok(RecursionSpec {
            trace: None,
            ..spec.clone()
        }),
        Some(v0) => Ok(RecursionSpec {
            equation: spec.equation.with_trace_shift(v0.clone())?,
            trace: None,
            order: spec.order,
        }),
    }
}

/// `v_k = rhs_slice(k) / divisor(k)` for every order up to `spec.order`.
pub fn solve_recursion<S: Scalar>(spec: &RecursionSpec<S>) -> Result<SigmaSeries<S>> {
    let shifted = shift_initial_data(spec)?;
    let eq = &shifted.equation;
    let frame = eq.frame();
    let start = eq.first_order();
    let mut coeffs: Vec<XSeries<S>> = (0..start).map(|_| XSeries::zero(frame)).collect();
    for k in start..=spec.order {
        let d = eq.divisor(k);
        if d.is_zero() {
            return Err(Error::Internal(format!("indicial divisor vanishes at order {k}")));
        }
        let rhs = eq.rhs_slice(k, &LowerJet::new(k, &coeffs))?;
        coeffs.push(rhs.scale(&S::one().div(&d)));
    }
    let w = SigmaSeries::from_coeffs(eq.kind(), frame, coeffs, spec.order as i32)?;
    match &spec.trace {
        Some(v0) => w.try_add(&SigmaSeries::constant(eq.kind(), v0.clone())),
        None => Ok(w),
    }
}

/// The constructed solution in the original coordinates.
#[derive(Clone, Debug)]
pub struct SingularSolution<S: Scalar> {
    pub regime: Regime,
    pub a: S,
    pub m: u32,
    /// `T = side * (t - psi(x))`.
    pub side: i32,
    pub signature: Signature,
    /// Surface in the original coordinates (`phi` over `x'` for the elliptic regime).
    pub psi: XSeries<S>,
    /// Regular part as a series in `sigma = T^{1/m}`.
    pub v: SigmaSeries<S>,
    pub v0: Option<XSeries<S>>,
    pub order: usize,
}

pub fn assemble_solution<S: Scalar>(spec: &RecursionSpec<S>, v: SigmaSeries<S>) -> Result<SingularSolution<S>> {
    let eq = &spec.equation;
    if v.kind() != eq.kind() {
        return Err(Error::Config(format!(
            "solution series has kind {:?}, the equation expects {:?}",
            v.kind(),
            eq.kind()
        )));
    }
    let regime = eq.regime();
    let psi = match regime {
        Regime::NegativeSide => -eq.surface().psi(),
        _ => eq.surface().psi().clone(),
    };
    Ok(SingularSolution {
        regime,
        a: eq.a().clone(),
        m: regime.m(),
        side: regime.side(),
        signature: eq.surface().signature(),
        psi,
        v,
        v0: if regime.is_log() { Some(spec.trace_or_zero()) } else { None },
        order: spec.order,
    })
}

/// Values of `u`, `u_t` and `grad u` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointValue {
    pub transverse: f64,
    pub u: f64,
    pub u_t: f64,
    pub grad: Vec<f64>,
}

impl<S: Scalar> SingularSolution<S> {
    pub fn frame(&self) -> &XFrame {
        self.psi.frame()
    }

    pub fn kind(&self) -> SigmaKind {
        self.v.kind()
    }

    /// Number of spatial variables of the series (`n - 1` for the elliptic regime).
    pub fn n(&self) -> usize {
        self.psi.n()
    }

    /// `T = side * (t - psi(x))`.
    pub fn transverse(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(self.side as f64 * (t - self.psi.eval_f64(x)?))
    }

    /// `u`, `u_t`, `grad u` at `(t, x)`; for the elliptic regime `t` is `x_1` and `x` is `x'`.
    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<PointValue> {
        let tv = self.transverse(t, x)?;
        if !(tv > 0.0) {
            return Err(Error::Domain(format!(
                "point (t = {t}, x = {x:?}) has T = {tv}; the solution lives on T > 0"
            )));
        }
        let a = self.a.to_f64();
        let eps = self.side as f64;
        let v = self.v.eval(tv, x)?;
        let v_t = self.v.d_dt().eval(tv, x)?;
        let grad_v: Vec<f64> = (0..self.n())
            .map(|i| self.v.partial(i).and_then(|d| d.eval(tv, x)))
            .collect::<Result<_>>()?;
        let grad_psi: Vec<f64> = self
            .psi
            .gradient()
            .iter()
            .map(|g| g.eval_f64(x))
            .collect::<Result<_>>()?;
        // u_T and the X-gradient of u at fixed T.
        let (u, u_big_t, grad_hat) = if self.regime.is_log() {
            (-a * tv.ln() + v, -a / tv + v_t, grad_v)
        } else {
            let m = self.m as f64;
            let u = a * tv.powf((m - 1.0) / m) + tv * v;
            let u_big_t = a * (m - 1.0) / m * tv.powf(-1.0 / m) + v + tv * v_t;
            (u, u_big_t, grad_v.iter().map(|g| tv * g).collect())
        };
        let grad = grad_hat
            .iter()
            .zip(&grad_psi)
            .map(|(gh, gp)| gh - eps * gp * u_big_t)
            .collect();
        Ok(PointValue {
            transverse: tv,
            u,
            u_t: eps * u_big_t,
            grad,
        })
    }

    pub fn u(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(t, x)?.u)
    }

    pub fn u_t(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(t, x)?.u_t)
    }

    pub fn u_i(&self, i: usize, t: f64, x: &[f64]) -> Result<f64> {
        let n = self.n();
        self.evaluate(t, x)?
            .grad
            .get(i)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: i, n })
    }

    /// Largest coefficient magnitude of `v_k` over `k >= from`.
    pub fn max_coeff_from(&self, from: i32) -> f64 {
        self.v
            .iter()
            .filter(|(k, _)| *k >= from)
            .map(|(_, c)| c.max_abs())
            .fold(0.0, f64::max)
    }
}
