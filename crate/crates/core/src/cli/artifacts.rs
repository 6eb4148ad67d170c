//! Solution, surface and residual artifacts.
//!
//! Scalars are written as decimal strings in float mode and as `["num", "den"]`
//! pairs in rational mode, so rational documents round-trip bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fuchsian::SingularSolution;
use crate::geometry::Signature;
use crate::nonlinearity::{NMonomial, Nonlinearity};
use crate::reduction::Regime;
use crate::scalar::Scalar;
use crate::series::{Exponent, SigmaSeries, XFrame, XSeries};
use crate::verify::{Fit, ResidualReport, SliceNorm};

pub const SOLUTION_FORMAT: &str = "swf-solution/1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermDoc {
    pub x: Vec<u32>,
    pub c: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeriesDoc {
    /// Degree through which the terms are exact; `null` for exact polynomials.
    pub reliable: Option<i32>,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SliceDoc {
    pub k: i32,
    #[serde(flatten)]
    pub series: SeriesDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoeffTermDoc {
    pub t: u32,
    pub x: Vec<u32>,
    pub c: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MonomialDoc {
    pub coeff: Vec<CoeffTermDoc>,
    pub tau: u32,
    pub xi: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolutionDoc {
    pub format: String,
    pub regime: String,
    pub m: u32,
    pub arithmetic: String,
    pub a: Value,
    pub side: i32,
    pub signature: String,
    /// Spatial dimension of the problem.
    pub dimension: usize,
    /// Number of variables of the stored series.
    pub variables: usize,
    pub base_point: Vec<Value>,
    #[serde(rename = "D")]
    pub d: u32,
    #[serde(rename = "K")]
    pub k: usize,
    pub psi: SeriesDoc,
    pub v0: Option<SeriesDoc>,
    pub v_max_order: i32,
    pub v: Vec<SliceDoc>,
    pub top_degree: u32,
    pub f: Vec<MonomialDoc>,
    /// Largest coefficient of the order-zero defect of the reduced equation.
    #[serde(default)]
    pub certificate_max_abs: f64,
}

pub fn series_doc<S: Scalar>(s: &XSeries<S>) -> SeriesDoc {
    SeriesDoc {
        reliable: s.reliable(),
        terms: s
            .terms()
            .map(|(e, c)| TermDoc {
                x: e.0.clone(),
                c: c.to_json(),
            })
            .collect(),
    }
}

pub fn series_from_doc<S: Scalar>(frame: &XFrame, doc: &SeriesDoc) -> Result<XSeries<S>> {
    let terms = doc
        .terms
        .iter()
        .map(|t| {
            let c = S::from_json(&t.c).ok_or_else(|| Error::Schema(format!("cannot read coefficient {}", t.c)))?;
            Ok((Exponent(t.x.clone()), c))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = XSeries::from_terms(frame, terms)?;
    Ok(match doc.reliable {
        Some(r) => s.with_reliable(r),
        None => s,
    })
}

fn nonlinearity_doc<S: Scalar>(f: &Nonlinearity<S>) -> Vec<MonomialDoc> {
    f.monomials()
        .map(|mono| MonomialDoc {
            coeff: mono
                .coeff
                .iter()
                .enumerate()
                .flat_map(|(j, c)| {
                    c.terms()
                        .map(|(e, v)| CoeffTermDoc {
                            t: j as u32,
                            x: e.0.clone(),
                            c: v.to_json(),
                        })
                        .collect::<Vec<_>>()
                })
                .collect(),
            tau: mono.tau_power,
            xi: mono.xi_powers.0.clone(),
        })
        .collect()
}

fn nonlinearity_from_doc<S: Scalar>(frame: &XFrame, docs: &[MonomialDoc], top: u32) -> Result<Nonlinearity<S>> {
    let raw = docs
        .iter()
        .map(|doc| {
            let t_degree = doc.coeff.iter().map(|c| c.t).max().unwrap_or(0) as usize;
            let mut coeff: Vec<Vec<(Exponent, S)>> = vec![Vec::new(); t_degree + 1];
            for term in &doc.coeff {
                let c = S::from_json(&term.c)
                    .ok_or_else(|| Error::Schema(format!("cannot read coefficient {}", term.c)))?;
                coeff[term.t as usize].push((Exponent(term.x.clone()), c));
            }
            let coeff = coeff
                .into_iter()
                .map(|terms| XSeries::from_terms(frame, terms))
                .collect::<Result<Vec<_>>>()?;
            Ok(NMonomial::new(coeff, doc.tau, Exponent(doc.xi.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    Nonlinearity::decompose_homogeneous(frame, raw, top)
}

/// Serialise a solution together with the nonlinearity used to verify it.
pub fn solution_doc<S: Scalar>(
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    dimension: usize,
    certificate_max_abs: f64,
) -> SolutionDoc {
    let frame = sol.frame();
    SolutionDoc {
        format: SOLUTION_FORMAT.into(),
        regime: sol.regime.name().into(),
        m: sol.m,
        arithmetic: S::NAME.into(),
        a: sol.a.to_json(),
        side: sol.side,
        signature: match sol.signature {
            Signature::Hyperbolic => "hyperbolic".into(),
            Signature::Elliptic => "elliptic".into(),
        },
        dimension,
        variables: frame.n(),
        base_point: frame.base_point().iter().map(|b| b.to_json()).collect(),
        d: frame.max_degree(),
        k: sol.order,
        psi: series_doc(&sol.psi),
        v0: sol.v0.as_ref().map(series_doc),
        v_max_order: sol.v.max_order(),
        v: sol
            .v
            .iter()
            .map(|(k, c)| SliceDoc {
                k,
                series: series_doc(c),
            })
            .collect(),
        top_degree: f.top_degree(),
        f: nonlinearity_doc(f),
        certificate_max_abs,
    }
}

/// Rebuild the solution and its nonlinearity; the field must match the document's arithmetic.
pub fn solution_from_doc<S: Scalar>(doc: &SolutionDoc) -> Result<(SingularSolution<S>, Nonlinearity<S>)> {
    if doc.format != SOLUTION_FORMAT {
        return Err(Error::Schema(format!("unsupported solution format '{}'", doc.format)));
    }
    if doc.arithmetic != S::NAME {
        return Err(Error::Schema(format!(
            "solution was written in {} arithmetic, reading it as {}",
            doc.arithmetic,
            S::NAME
        )));
    }
    let regime = match (doc.regime.as_str(), doc.m) {
        ("log", _) => Regime::Log,
        ("negative_side", _) => Regime::NegativeSide,
        ("elliptic", _) => Regime::Elliptic,
        ("fractional", m) if m >= 2 => Regime::Fractional(m),
        (other, m) => return Err(Error::Schema(format!("unknown regime '{other}' with m = {m}"))),
    };
    let signature = match doc.signature.as_str() {
        "hyperbolic" => Signature::Hyperbolic,
        "elliptic" => Signature::Elliptic,
        other => return Err(Error::Schema(format!("unknown signature '{other}'"))),
    };
    let base = doc
        .base_point
        .iter()
        .map(|v| f64::from_json(v).ok_or_else(|| Error::Schema(format!("cannot read base point entry {v}"))))
        .collect::<Result<Vec<_>>>()?;
    let frame = XFrame::new(doc.variables, doc.d, base)?;
    let a = S::from_json(&doc.a).ok_or_else(|| Error::Schema(format!("cannot read a = {}", doc.a)))?;
    let psi = series_from_doc(&frame, &doc.psi)?;
    let v0 = doc.v0.as_ref().map(|s| series_from_doc(&frame, s)).transpose()?;
    let kind = regime.kind();
    let lowest = doc.v.iter().map(|s| s.k).min().unwrap_or(0);
    let highest = doc.v.iter().map(|s| s.k).max().unwrap_or(-1);
    let mut coeffs: Vec<XSeries<S>> = (lowest..=highest).map(|_| XSeries::zero(&frame)).collect();
    for slice in &doc.v {
        coeffs[(slice.k - lowest) as usize] = series_from_doc(&frame, &slice.series)?;
    }
    let v = SigmaSeries::new(kind, &frame, lowest, doc.v_max_order, coeffs)?;
    let f = nonlinearity_from_doc(&frame, &doc.f, doc.top_degree)?;
    Ok((
        SingularSolution {
            regime,
            a,
            m: regime.m(),
            side: doc.side,
            signature,
            psi,
            v,
            v0,
            order: doc.k,
        },
        f,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceDoc {
    pub arithmetic: String,
    pub variables: usize,
    pub base_point: Vec<Value>,
    #[serde(rename = "D")]
    pub d: u32,
    pub psi: SeriesDoc,
    /// Largest pseudo-Eikonal residual coefficient through degree `D - 1`.
    pub residual_max_abs: f64,
}

pub fn surface_doc<S: Scalar>(psi: &XSeries<S>, residual_max_abs: f64) -> SurfaceDoc {
    let frame = psi.frame();
    SurfaceDoc {
        arithmetic: S::NAME.into(),
        variables: frame.n(),
        base_point: frame.base_point().iter().map(|b| b.to_json()).collect(),
        d: frame.max_degree(),
        psi: series_doc(psi),
        residual_max_abs,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitSummary {
    pub regime: String,
    pub arithmetic: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub samples: usize,
    pub resolved_samples: usize,
    pub max_abs_residual: f64,
    pub fitted_slope: Option<Fit>,
    pub fitted_blowup_exponent: Option<Fit>,
    pub symbolic_orders: Vec<SliceNorm>,
    /// First residual slice that fails to vanish, if any.
    pub first_nonvanishing_order: Option<i32>,
    pub passed: bool,
}

pub fn fit_summary<S: Scalar>(
    sol: &SingularSolution<S>,
    report: &ResidualReport,
    first_nonvanishing: Option<i32>,
) -> FitSummary {
    FitSummary {
        regime: sol.regime.name().into(),
        arithmetic: S::NAME.into(),
        k: sol.order,
        samples: report.samples.len(),
        resolved_samples: report.samples.iter().filter(|s| s.resolved).count(),
        max_abs_residual: report.max_abs_residual,
        fitted_slope: report.fitted_slope,
        fitted_blowup_exponent: report.fitted_blowup_exponent,
        symbolic_orders: report.symbolic_orders.clone(),
        first_nonvanishing_order: first_nonvanishing,
        passed: first_nonvanishing.is_none(),
    }
}

/// `T, x1..xn, residual, u, du_dt`, one row per sample. Spatial columns are
/// numbered from `first_var` (2 in the elliptic regime, where `x1` is transverse).
pub fn write_residual_csv(path: &Path, report: &ResidualReport, n: usize, first_var: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["T".to_string()];
    header.extend((first_var..first_var + n).map(|i| format!("x{i}")));
    header.extend(["residual", "u", "du_dt"].map(String::from));
    w.write_record(&header)?;
    for s in &report.samples {
        let mut row = vec![format!("{:e}", s.t)];
        row.extend(s.x.iter().map(|v| format!("{v}")));
        row.push(format!("{:e}", s.residual));
        row.push(format!("{}", s.u));
        row.push(format!("{}", s.du_dt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
