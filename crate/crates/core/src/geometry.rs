//! Blowup hypersurfaces `t = psi(x)` and the compatibility conditions they must satisfy.

use crate::error::{Error, Result};
use crate::nonlinearity::{HomogeneousPart, Nonlinearity};
use crate::scalar::Scalar;
use crate::series::{XFrame, XSeries};

/// Tolerance on residual-series coefficients in float mode.
pub const CONDITION_TOL: f64 = 1e-10;
/// A principal coefficient this close to zero at the base point counts as characteristic.
pub const CHARACTERISTIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    /// `u_tt - Delta u`, principal coefficient `1 - |grad psi|^2`.
    Hyperbolic,
    /// `u_tt + Delta u` in the distinguished coordinate, principal coefficient `1 + |grad phi|^2`.
    Elliptic,
}

impl Signature {
    /// Sign in front of the tangential Laplacian when the operator is written as `u_tt + lambda Delta u`.
    pub fn lambda(self) -> i64 {
        match self {
            Signature::Hyperbolic => -1,
            Signature::Elliptic => 1,
        }
    }
}

/// The surface together with its derived quantities.
#[derive(Clone, Debug)]
pub struct Hypersurface<S: Scalar> {
    psi: XSeries<S>,
    grad: Vec<XSeries<S>>,
    lap: XSeries<S>,
    principal: XSeries<S>,
    signature: Signature,
}

impl<S: Scalar> Hypersurface<S> {
    /// Wave-type surface; fails when it is characteristic at the base point.
    pub fn new(psi: XSeries<S>) -> Result<Self> {
        Self::with_signature(psi, Signature::Hyperbolic)
    }

    /// Surface `x_1 = phi(x')` for the elliptic problem.
    pub fn elliptic(phi: XSeries<S>) -> Result<Self> {
        Self::with_signature(phi, Signature::Elliptic)
    }

    pub fn with_signature(psi: XSeries<S>, signature: Signature) -> Result<Self> {
        let grad = psi.gradient();
        let lap = psi.laplacian();
        let mut sq = XSeries::zero(psi.frame());
        for g in &grad {
            sq = &sq + &(g * g);
        }
        let lambda = S::from_i64(signature.lambda());
        let principal = sq.scale(&lambda).add_constant(&S::one());
        let value = principal.constant_term();
        if value.is_negligible(CHARACTERISTIC_TOL) {
            return Err(Error::Characteristic { value: value.to_f64() });
        }
        Ok(Hypersurface {
            psi,
            grad,
            lap,
            principal,
            signature,
        })
    }

    pub fn psi(&self) -> &XSeries<S> {
        &self.psi
    }

    /// `psi_i`.
    pub fn grad(&self) -> &[XSeries<S>] {
        &self.grad
    }

    pub fn lap(&self) -> &XSeries<S> {
        &self.lap
    }

    /// `1 - |grad psi|^2` (wave) or `1 + |grad phi|^2` (elliptic).
    pub fn principal(&self) -> &XSeries<S> {
        &self.principal
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn frame(&self) -> &XFrame {
        self.psi.frame()
    }

    pub fn n(&self) -> usize {
        self.psi.n()
    }
}

/// Fails with a condition error naming the first non-negligible stored coefficient.
pub fn require_zero<S: Scalar>(residual: &XSeries<S>, condition: &'static str) -> Result<()> {
    match residual.first_offending(CONDITION_TOL) {
        None => Ok(()),
        Some((e, c)) => Err(Error::Condition {
            condition,
            exponent: e.0,
            value: c.to_string(),
        }),
    }
}

/// `Psi - a f_2(psi, x; -1, grad psi)`; zero iff the pseudo-Eikonal condition holds.
pub fn check_pseudo_eikonal<S: Scalar>(h: &Hypersurface<S>, f2: &HomogeneousPart<S>, a: &S) -> Result<XSeries<S>> {
    if a.is_zero() {
        return Err(Error::Input("a must be nonzero".into()));
    }
    let on_sigma = f2.eval_on_sigma(h.psi())?;
    h.principal().try_sub(&on_sigma.scale(a))
}

/// `((-m+1)^m a^m / m^{m-1})`, the factor in front of `f_{m+1}` on the surface.
pub fn top_condition_factor<S: Scalar>(a: &S, m: u32) -> S {
    let num = S::from_i64(1 - m as i64).powi(m).mul(&a.powi(m));
    num.div(&S::from_i64(m as i64).powi(m - 1))
}

/// Residuals `(Psi - c_m a^m f_{m+1}(Sigma), f_m(Sigma))` of the fractional-regime conditions.
pub fn check_higher_conditions<S: Scalar>(
    h: &Hypersurface<S>,
    f: &Nonlinearity<S>,
    a: &S,
    m: u32,
) -> Result<(XSeries<S>, XSeries<S>)> {
    if m < 2 {
        return Err(Error::Input(format!(
            "fractional conditions need m >= 2 (got {m}); use the logarithmic regime"
        )));
    }
    if a.is_zero() {
        return Err(Error::Input("a must be nonzero".into()));
    }
    let top = f.part(m + 1).eval_on_sigma(h.psi())?;
    let top_res = h.principal().try_sub(&top.scale(&top_condition_factor(a, m)))?;
    let fm = f.part(m).eval_on_sigma(h.psi())?;
    Ok((top_res, fm))
}

/// True iff `f_2` has only even powers of `tau`.
pub fn check_time_reversal<S: Scalar>(f2: &HomogeneousPart<S>) -> bool {
    f2.is_even_in_tau()
}

pub fn require_time_reversal<S: Scalar>(f2: &HomogeneousPart<S>) -> Result<()> {
    match f2.first_odd_in_tau() {
        None => Ok(()),
        Some(mono) => Err(Error::TimeReversal {
            monomial: mono.to_string(),
        }),
    }
}

/// Root choice for the order-zero slope `d psi / d x_1` at the base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Branch {
    /// Larger real root.
    Plus,
    /// Smaller real root.
    Minus,
    /// Root closest to the given slope.
    Near(f64),
}

/// Solve `1 - |grad psi|^2 = a f_2(psi, x; -1, grad psi)` as a power series in `x_1`
/// with `psi(x_1 = 0, x') = init`.
///
/// `init` lives on `frame.without_var(0)`. The result is known through degree `D`
/// and satisfies the equation through degree `D - 1`.
pub fn solve_pseudo_eikonal<S: Scalar>(
    frame: &XFrame,
    f2: &HomogeneousPart<S>,
    a: &S,
    init: &XSeries<S>,
    branch: Branch,
) -> Result<XSeries<S>> {
    if a.is_zero() {
        return Err(Error::Input("a must be nonzero".into()));
    }
    let n = frame.n();
    if n == 0 {
        return Err(Error::Input("the pseudo-Eikonal solver needs at least one variable".into()));
    }
    let d = frame.max_degree();
    let psi0 = init.embed(frame, 0)?;
    // On x_1 = 0 the equation is quadratic in p_1 = psi_1: A p^2 + B p + C.
    let g_at = |p: i64| -> Result<XSeries<S>> {
        let p1 = XSeries::constant(frame, S::from_i64(p));
        Ok(eikonal_residual(frame, f2, a, &psi0, Some(&p1))?.var_slice(0, 0))
    };
    let c = g_at(0)?;
    let g1 = g_at(1)?;
    let gm = g_at(-1)?;
    let half = S::from_ratio(1, 2);
    let qa = (&(&g1 + &gm).scale(&half)) - &c;
    let qb = (&g1 - &gm).scale(&half);

    let scale = c.max_abs().max(1.0);
    if qa.max_abs() <= 1e-14 * scale && qb.max_abs() <= 1e-14 * scale {
        return degenerate_eikonal(frame, f2, a, &psi0, &c, branch);
    }
    let root0 = pick_root(&qa.constant_term(), &qb.constant_term(), &c.constant_term(), branch)?;
    // Newton on the x'-series for psi_1.
    let mut p1 = XSeries::constant(frame, root0);
    let iterations = (d as f64 + 1.0).log2().ceil() as usize + 2;
    for _ in 0..iterations {
        let value = &(&(&qa * &p1) + &qb) * &p1;
        let value = &value + &c;
        let slope = &(&qa * &p1).scale(&S::from_i64(2)) + &qb;
        let step = &value * &slope.reciprocal()?;
        p1 = &p1 - &step;
    }
    let g_p = &(&qa * &p1).scale(&S::from_i64(2)) + &qb;
    let g_p_inv = g_p.reciprocal()?;

    let mut psi = &psi0 + &p1.mul_var_power(0, 1);
    // The x_1^j slice of the residual is linear in psi_{j+1} with coefficient (j+1) dG/dp_1.
    for j in 1..d {
        let slice = eikonal_residual(frame, f2, a, &psi, None)?.var_slice(0, j);
        let next = (&slice * &g_p_inv).scale(&S::from_ratio(-1, j as i64 + 1));
        psi = &psi + &next.mul_var_power(0, j + 1);
    }
    Ok(psi)
}

/// The equation does not involve `p_1` on `x_1 = 0`: a target slope is taken as is
/// when the full residual of `psi0 + slope x_1` vanishes.
fn degenerate_eikonal<S: Scalar>(
    frame: &XFrame,
    f2: &HomogeneousPart<S>,
    a: &S,
    psi0: &XSeries<S>,
    c: &XSeries<S>,
    branch: Branch,
) -> Result<XSeries<S>> {
    if c.max_abs() > 1e-12 {
        return Err(Error::NoRealRoot(
            "the pseudo-Eikonal equation does not involve the x1 slope at the base point".into(),
        ));
    }
    let Branch::Near(slope) = branch else {
        return Err(Error::Branch(
            "every x1 slope solves the pseudo-Eikonal equation; give a target slope".into(),
        ));
    };
    let slope = S::from_f64(slope).ok_or_else(|| Error::Input(format!("bad slope {slope}")))?;
    let psi = psi0 + &XSeries::variable(frame, 0)?.scale(&slope);
    let r = eikonal_residual(frame, f2, a, &psi, None)?;
    if r.max_abs() > 1e-12 {
        return Err(Error::NoRealRoot(
            "the pseudo-Eikonal equation does not determine the x1 slope off x1 = 0".into(),
        ));
    }
    Ok(psi)
}

/// `1 - |p|^2 - a f_2(psi, x; -1, p)` with `p = grad psi`, optionally overriding `p_1`.
fn eikonal_residual<S: Scalar>(
    frame: &XFrame,
    f2: &HomogeneousPart<S>,
    a: &S,
    psi: &XSeries<S>,
    p1: Option<&XSeries<S>>,
) -> Result<XSeries<S>> {
    let mut grad = psi.gradient();
    if let Some(p1) = p1 {
        grad[0] = p1.clone();
    }
    let tau = XSeries::constant(frame, S::one().neg());
    let on = f2.eval(psi, &tau, &grad)?;
    let mut sq = XSeries::zero(frame);
    for g in &grad {
        sq = &sq + &(g * g);
    }
    Ok(&(-&sq).add_constant(&S::one()) - &on.scale(a))
}

fn pick_root<S: Scalar>(qa: &S, qb: &S, qc: &S, branch: Branch) -> Result<S> {
    let scale = qa.abs_f64().max(qb.abs_f64()).max(qc.abs_f64()).max(1.0);
    if qa.is_negligible(1e-14 * scale) {
        if qb.is_negligible(1e-14 * scale) {
            return Err(Error::NoRealRoot(
                "the pseudo-Eikonal equation does not involve the x1 slope at the base point".into(),
            ));
        }
        return Ok(qc.neg().div(qb));
    }
    let disc = qb.mul(qb).sub(&S::from_i64(4).mul(&qa.mul(qc)));
    if disc.is_negligible(1e-14 * scale * scale) {
        return Err(Error::Branch(format!(
            "double root for the x1 slope at the base point (discriminant {})",
            disc
        )));
    }
    if disc.to_f64() < 0.0 {
        return Err(Error::NoRealRoot(format!(
            "no real x1 slope at the base point (discriminant {})",
            disc
        )));
    }
    let sq = disc
        .sqrt()
        .ok_or_else(|| Error::Domain(format!("discriminant {disc} has no square root in this field; use float arithmetic")))?;
    let two_a = S::from_i64(2).mul(qa);
    let r1 = qb.neg().add(&sq).div(&two_a);
    let r2 = qb.neg().sub(&sq).div(&two_a);
    let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    Ok(match branch {
        Branch::Plus => hi,
        Branch::Minus => lo,
        Branch::Near(h) => {
            if (hi.to_f64() - h).abs() <= (lo.to_f64() - h).abs() {
                hi
            } else {
                lo
            }
        }
    })
}
