//! Independent checks of a constructed solution.
//!
//! [`symbolic_residual`] substitutes `u` into the original equation as a Laurent
//! series in sigma, using the chain rule in `(T, X)` directly; it does not go through
//! the reduced equation. [`numeric_residual`] samples the residual at points near the
//! surface using closed-form derivatives of the singular profile.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::SingularSolution;
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Scalar;
use crate::series::{SigmaSeries, XSeries};

/// Largest sampled `T`.
pub const TRUST_RADIUS: f64 = 0.5;
/// Tolerance on symbolic residual coefficients in float mode.
pub const SYMBOLIC_TOL: f64 = 1e-8;

/// `u_tt + lambda Delta u - f(t, x; u_t, grad u)` as a Laurent series in sigma.
///
/// Slices run from `-2` (log) or `-(m+1)` (fractional) through the last order
/// fixed by the truncation of `v`, optionally capped by `through`.
pub fn symbolic_residual<S: Scalar>(
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    through: Option<i32>,
) -> Result<SigmaSeries<S>> {
    let kind = sol.kind();
    let frame = sol.frame().clone();
    frame.check(f.frame())?;
    let m = sol.m as i32;
    let eps = S::from_i64(sol.side as i64);
    let lambda = S::from_i64(sol.signature.lambda());
    let a = &sol.a;
    let n = sol.n();

    // u = c log T + w with w log-free.
    let (log_coeff, w) = if sol.regime.is_log() {
        (Some(XSeries::constant(&frame, a.neg())), sol.v.clone())
    } else {
        let profile = SigmaSeries::scalar(kind, &frame, a.clone()).shift(m - 1);
        (None, profile.try_add(&sol.v.shift(m))?)
    };
    let mut u_big_t = w.d_dt();
    if let Some(c) = &log_coeff {
        for i in 0..n {
            if !c.partial(i)?.is_zero() {
                return Err(Error::Internal("log coefficient depends on x".into()));
            }
        }
        u_big_t = u_big_t.try_add(&SigmaSeries::constant(kind, c.clone()).shift(-m))?;
    }
    let grad_psi = sol.psi.gradient();
    let d_t = |s: &SigmaSeries<S>| s.d_dt().scale(&eps);
    let d_i = |s: &SigmaSeries<S>, i: usize| -> Result<SigmaSeries<S>> {
        s.partial(i)?.try_sub(&s.d_dt().mul_x(&grad_psi[i]).scale(&eps))
    };

    let u_t = u_big_t.scale(&eps);
    let mut u_x = Vec::with_capacity(n);
    for (i, g) in grad_psi.iter().enumerate() {
        u_x.push(w.partial(i)?.try_sub(&u_big_t.mul_x(g).scale(&eps))?);
    }
    let mut lhs = d_t(&u_t);
    for (i, ui) in u_x.iter().enumerate() {
        lhs = lhs.try_add(&d_i(ui, i)?.scale(&lambda))?;
    }
    let t = SigmaSeries::constant(kind, sol.psi.clone()).try_add(&SigmaSeries::t_var(kind, &frame).scale(&eps))?;
    let rhs = f.eval(&t, &u_t, &u_x)?;
    let residual = lhs.try_sub(&rhs)?;
    Ok(match through {
        Some(k) => residual.truncate(k),
        None => residual,
    })
}

/// Lowest order of a residual slice for the solution's regime.
pub fn lowest_order<S: Scalar>(sol: &SingularSolution<S>) -> i32 {
    -(sol.m as i32 + 1)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SliceNorm {
    pub order: i32,
    pub max_abs: f64,
    /// Degree in `x` through which the slice is exact (`null` for exact polynomials).
    pub reliable_degree: Option<i32>,
}

/// Per-order norms of the symbolic residual from the lowest order through `max_order`.
pub fn slice_norms<S: Scalar>(sol: &SingularSolution<S>, residual: &SigmaSeries<S>) -> Vec<SliceNorm> {
    let hi = if residual.is_exact() {
        residual.top_order().max(lowest_order(sol))
    } else {
        residual.max_order()
    };
    (lowest_order(sol)..=hi)
        .map(|k| {
            let c = residual.coeff(k);
            SliceNorm {
                order: k,
                max_abs: c.max_abs(),
                reliable_degree: c.reliable(),
            }
        })
        .collect()
}

/// First slice with a non-negligible stored coefficient.
pub fn first_nonvanishing<S: Scalar>(sol: &SingularSolution<S>, residual: &SigmaSeries<S>) -> Option<(i32, f64)> {
    let hi = residual.max_order().min(residual.top_order());
    (lowest_order(sol)..=hi).find_map(|k| {
        let c = residual.coeff(k);
        c.first_offending(SYMBOLIC_TOL).map(|(_, v)| (k, v.abs_f64()))
    })
}

/// Sample locations: transverse values and points around the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub t_values: Vec<f64>,
    pub radius: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_values: (0..6).map(|j| 10f64.powf(-3.0 + 0.5 * j as f64)).collect(),
            radius: 0.2,
            points: 5,
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `default` or `T=1e-3,1e-2;r=0.2;points=5` (omitted keys keep their defaults).
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let mut grid = GridSpec::default();
        if text.is_empty() || text == "default" {
            return Ok(grid);
        }
        for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Schema(format!("grid entry '{item}' is not key=value")))?;
            let bad = |what: &str| Error::Schema(format!("grid {what} '{value}' is invalid"));
            match key.trim() {
                "T" | "t" => {
                    grid.t_values = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|_| bad("T list")))
                        .collect::<Result<_>>()?;
                }
                "r" | "radius" => grid.radius = value.trim().parse().map_err(|_| bad("radius"))?,
                "points" => grid.points = value.trim().parse().map_err(|_| bad("point count"))?,
                other => return Err(Error::Schema(format!("unknown grid key '{other}'"))),
            }
        }
        Ok(grid)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.t_values.iter().map(|t| format!("{t}")).collect();
        write!(f, "T={};r={};points={}", ts.join(","), self.radius, self.points)
    }
}

impl GridSpec {
    /// Points within `radius` of `base`; the first is `base` itself.
    pub fn x_points(&self, base: &[f64]) -> Vec<Vec<f64>> {
        let n = base.len();
        if n == 0 {
            return vec![Vec::new()];
        }
        let golden = 0.618_033_988_749_895_f64;
        (0..self.points.max(1))
            .map(|j| {
                if j == 0 {
                    return base.to_vec();
                }
                let dir: Vec<f64> = (0..n)
                    .map(|i| (2.0 * std::f64::consts::PI * golden * (j * (i + 1)) as f64 + i as f64).cos())
                    .collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-12);
                let scale = self.radius * (j as f64 / self.points as f64).sqrt();
                base.iter().zip(&dir).map(|(b, d)| b + scale * d / norm).collect()
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() || self.points == 0 {
            return Err(Error::Input("empty sampling grid".into()));
        }
        for &t in &self.t_values {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("grid value T = {t} is not positive")));
            }
            if t > TRUST_RADIUS {
                return Err(Error::Domain(format!(
                    "grid value T = {t} lies outside the trust region T <= {TRUST_RADIUS}"
                )));
            }
        }
        if !(self.radius >= 0.0) {
            return Err(Error::Input(format!("grid radius {} is negative", self.radius)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Sample {
    #[serde(rename = "T")]
    pub t: f64,
    pub x: Vec<f64>,
    pub residual: f64,
    pub u: f64,
    pub du_dt: f64,
    /// False when the residual is below the rounding level of its own terms.
    pub resolved: bool,
}

/// Least-squares slope of `log y` against `log T`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Fit {
    pub value: f64,
    pub stderr: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub symbolic_orders: Vec<SliceNorm>,
    pub samples: Vec<Sample>,
    pub max_abs_residual: f64,
    /// `|residual| ~ C T^slope`.
    pub fitted_slope: Option<Fit>,
    /// `|u_t| ~ C T^{-exponent}`.
    pub fitted_blowup_exponent: Option<Fit>,
}

struct PreparedSolution<S: Scalar> {
    v: Vec<XSeries<S>>,
    dv: Vec<Vec<XSeries<S>>>,
    ddv: Vec<Vec<XSeries<S>>>,
    psi: XSeries<S>,
    grad_psi: Vec<XSeries<S>>,
    psi_ii: Vec<XSeries<S>>,
}

/// Residual at sampled points, regularised by `sigma^{m+1}` so the singular terms cancel exactly.
pub fn numeric_residual<S: Scalar>(
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    grid: &GridSpec,
) -> Result<ResidualReport> {
    grid.validate()?;
    let n = sol.n();
    let top = sol.v.top_order().max(0);
    let v: Vec<XSeries<S>> = (0..=top).map(|k| sol.v.coeff(k)).collect();
    let prepared = PreparedSolution {
        dv: v.iter().map(XSeries::gradient).collect(),
        ddv: v
            .iter()
            .map(|c| {
                (0..n)
                    .map(|i| c.partial(i).and_then(|d| d.partial(i)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?,
        v,
        psi: sol.psi.clone(),
        grad_psi: sol.psi.gradient(),
        psi_ii: (0..n)
            .map(|i| sol.psi.partial(i).and_then(|d| d.partial(i)))
            .collect::<Result<_>>()?,
    };
    let mut samples = Vec::new();
    for x in grid.x_points(sol.frame().base_point()) {
        for &t in &grid.t_values {
            samples.push(sample_point(sol, f, &prepared, t, &x)?);
        }
    }
    let max_abs_residual = samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
    let slope = fit_loglog(
        samples
            .iter()
            .filter(|s| s.resolved && s.residual != 0.0)
            .map(|s| (s.t, s.residual.abs())),
    );
    let blowup = fit_loglog(samples.iter().filter(|s| s.du_dt != 0.0).map(|s| (s.t, s.du_dt.abs())))
        .map(|fit| Fit { value: -fit.value, ..fit });
    let residual = symbolic_residual(sol, f, None)?;
    Ok(ResidualReport {
        symbolic_orders: slice_norms(sol, &residual),
        samples,
        max_abs_residual,
        fitted_slope: slope,
        fitted_blowup_exponent: blowup,
    })
}

fn sample_point<S: Scalar>(
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    prep: &PreparedSolution<S>,
    t_value: f64,
    x_f: &[f64],
) -> Result<Sample> {
    let m = sol.m;
    let mi = m as i64;
    let p = m + 1;
    let a = &sol.a;
    let eps = S::from_i64(sol.side as i64);
    let lambda = S::from_i64(sol.signature.lambda());
    let to_s = |v: f64| S::from_f64(v).ok_or_else(|| Error::Domain(format!("non-finite value {v}")));
    let sigma = to_s(if m == 1 { t_value } else { t_value.powf(1.0 / m as f64) })?;
    let big_t = sigma.powi(m);
    let x: Vec<S> = x_f.iter().map(|&v| to_s(v)).collect::<Result<_>>()?;
    let pow = |e: i64| -> S {
        if e >= 0 {
            sigma.powi(e as u32)
        } else {
            S::one().div(&sigma.powi((-e) as u32))
        }
    };
    let mm = S::from_i64(mi);
    let log = sol.regime.is_log();
    // Terms of u: the profile (exponent e_p in sigma, coefficient a) and v_k sigma^{e_k}.
    let (mut sa, mut sb) = if log {
        (a.neg(), a.clone())
    } else {
        let r = S::from_ratio(mi - 1, mi);
        (a.mul(&r), a.mul(&r).neg().div(&mm))
    };
    let mut mag = sa.abs_f64() + sb.abs_f64();
    let n = sol.n();
    let mut w1 = vec![S::zero(); n];
    let mut g2 = vec![S::zero(); n];
    let mut h = vec![S::zero(); n];
    let mut v_sum = S::zero();
    for (k, vk) in prep.v.iter().enumerate() {
        let e = k as i64 + if log { 0 } else { mi };
        let val = vk.eval(&x);
        let ek = S::from_i64(e).div(&mm);
        let ek2 = ek.mul(&S::from_i64(e - mi).div(&mm));
        let a_term = ek.mul(&val).mul(&pow(e - mi + 1));
        let b_term = ek2.mul(&val).mul(&pow(e - mi + 1));
        mag += a_term.abs_f64() + b_term.abs_f64();
        sa = sa.add(&a_term);
        sb = sb.add(&b_term);
        v_sum = v_sum.add(&val.mul(&pow(e)));
        for i in 0..n {
            let d1 = prep.dv[k][i].eval(&x);
            let d2 = prep.ddv[k][i].eval(&x);
            w1[i] = w1[i].add(&d1.mul(&pow(e + 1)));
            g2[i] = g2[i].add(&d2.mul(&pow(e + mi + 1)));
            h[i] = h[i].add(&ek.mul(&d1).mul(&pow(e + 1)));
        }
    }
    let psi = prep.psi.eval(&x);
    let tau = eps.mul(&sa);
    let mut xi = Vec::with_capacity(n);
    let mut lhs = sb.clone();
    for i in 0..n {
        let gp = prep.grad_psi[i].eval(&x);
        let gpp = prep.psi_ii[i].eval(&x);
        xi.push(w1[i].sub(&eps.mul(&gp).mul(&sa)));
        let two = S::from_i64(2);
        let uii = g2[i]
            .sub(&two.mul(&eps).mul(&gp).mul(&h[i]))
            .sub(&eps.mul(&gpp).mul(&sa).mul(&pow(p as i64 - 1)))
            .add(&gp.mul(&gp).mul(&sb));
        mag += g2[i].abs_f64() + 2.0 * (gp.mul(&h[i])).abs_f64() + gp.mul(&gp).mul(&sb).abs_f64();
        lhs = lhs.add(&lambda.mul(&uii));
    }
    let t_abs = psi.add(&eps.mul(&big_t));
    let mut rhs = S::zero();
    for part in f.parts() {
        if part.is_zero() {
            continue;
        }
        let value = part.eval_point(&t_abs, &x, &tau, &xi).mul(&pow(p as i64 - part.degree as i64));
        mag += value.abs_f64();
        rhs = rhs.add(&value);
    }
    let scaled = lhs.sub(&rhs);
    let residual = scaled.div(&pow(p as i64));
    let resolved = S::EXACT || scaled.abs_f64() > 64.0 * f64::EPSILON * mag;

    let (u, du_dt) = if log {
        let u = -a.to_f64() * t_value.ln() + v_sum.to_f64();
        (u, eps.mul(&sa).div(&sigma).to_f64())
    } else {
        let u = a.mul(&pow(mi - 1)).add(&v_sum);
        (u.to_f64(), eps.mul(&sa).div(&sigma).to_f64())
    };
    Ok(Sample {
        t: big_t.to_f64(),
        x: x_f.to_vec(),
        residual: residual.to_f64(),
        u,
        du_dt,
        resolved,
    })
}

/// Ordinary least squares of `log y` on `log x`; `None` with fewer than three points.
pub fn fit_loglog(points: impl Iterator<Item = (f64, f64)>) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = points
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let count = pts.len();
    if count < 3 {
        return None;
    }
    let nf = count as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ss / (nf - 2.0) / sxx).sqrt();
    Some(Fit {
        value: slope,
        stderr,
        points: count,
    })
}
