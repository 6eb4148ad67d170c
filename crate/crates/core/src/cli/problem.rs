//! Problem files.
//!
//! ```json
//! {
//!   "n": 2, "mode": "log", "a": "2",
//!   "base_point": [0, 0],
//!   "truncation": {"D": 6, "K": 8},
//!   "arithmetic": "rational",
//!   "f": [{"coeff": [{"c": "1/2"}], "tau": 2, "xi": [0, 0]},
//!         {"coeff": [{"c": "-1/2"}], "xi": [2, 0]},
//!         {"coeff": [{"c": "-1/2"}], "xi": [0, 2]}],
//!   "psi": [{"x": [1, 0], "c": "1/2"}],
//!   "v0": [{"c": "3"}],
//!   "verify": {"grid": "default"}
//! }
//! ```
//!
//! Polynomial coefficients are given in the local coordinates `y = x - base_point`;
//! `t` is absolute. In elliptic mode `x_1` plays the role of `t`, the series live on
//! `x' = (x_2, ..., x_n)` and `psi` is `phi(x')`; `f` is fixed and must be omitted.
//! `psi` may instead be `{"solve": {"init": [...], "branch": "+"}}` with `init` over
//! `(x_2, ..., x_n)`.

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Branch;
use crate::nonlinearity::{NMonomial, Nonlinearity};
use crate::reduction::Regime;
use crate::scalar::Scalar;
use crate::series::{Exponent, XFrame, XSeries};
use crate::verify::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Log,
    Fractional,
    Elliptic,
    NegativeSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Float,
    Rational,
}

impl Arithmetic {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "float" => Ok(Arithmetic::Float),
            "rational" => Ok(Arithmetic::Rational),
            other => Err(Error::Schema(format!("unknown arithmetic '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arithmetic::Float => "float",
            Arithmetic::Rational => "rational",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "D")]
    pub d: u32,
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub x: Vec<u32>,
    pub c: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffTermSpec {
    #[serde(default)]
    pub t: u32,
    #[serde(default)]
    pub x: Vec<u32>,
    pub c: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: Vec<CoeffTermSpec>,
    #[serde(default)]
    pub tau: u32,
    #[serde(default)]
    pub xi: Vec<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    #[serde(default)]
    pub init: Vec<TermSpec>,
    #[serde(default)]
    pub branch: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PsiSpec {
    Terms(Vec<TermSpec>),
    Solve { solve: SolveSpec },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default)]
    pub grid: Option<String>,
}

/// A problem file as written on disk.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub mode: Mode,
    #[serde(default)]
    pub m: Option<u32>,
    pub a: Value,
    #[serde(default)]
    pub base_point: Option<Vec<Value>>,
    pub truncation: Truncation,
    #[serde(default)]
    pub arithmetic: Option<Arithmetic>,
    #[serde(default)]
    pub f: Option<Vec<MonomialSpec>>,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub v0: Option<Vec<TermSpec>>,
    #[serde(default)]
    pub verify: Option<VerifySpec>,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub arithmetic: Option<Arithmetic>,
    pub branch: Option<Branch>,
    pub grid: Option<GridSpec>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn arithmetic(&self, overrides: &Overrides) -> Arithmetic {
        overrides.arithmetic.or(self.arithmetic).unwrap_or(Arithmetic::Float)
    }

    /// Number of variables the series live in.
    pub fn series_vars(&self) -> Result<usize> {
        match self.mode {
            Mode::Elliptic => self
                .n
                .checked_sub(1)
                .ok_or_else(|| Error::Schema("elliptic mode needs n >= 1".into())),
            _ => Ok(self.n),
        }
    }

    pub fn regime(&self) -> Result<Regime> {
        match (self.mode, self.m) {
            (Mode::Fractional, Some(m)) if m >= 2 => Ok(Regime::Fractional(m)),
            (Mode::Fractional, Some(m)) => Err(Error::Schema(format!("fractional mode needs m >= 2, got {m}"))),
            (Mode::Fractional, None) => Err(Error::Schema("fractional mode requires 'm'".into())),
            (Mode::Log, _) => Ok(Regime::Log),
            (Mode::NegativeSide, _) => Ok(Regime::NegativeSide),
            (Mode::Elliptic, _) => Ok(Regime::Elliptic),
        }
    }

    /// Resolve the file into typed series in the requested field.
    pub fn build<S: Scalar>(&self, overrides: &Overrides) -> Result<Problem<S>> {
        let regime = self.regime()?;
        let nv = self.series_vars()?;
        let base: Vec<f64> = match &self.base_point {
            None => vec![0.0; nv],
            Some(values) => values
                .iter()
                .map(|v| parse_scalar::<f64>(v, "base_point"))
                .collect::<Result<_>>()?,
        };
        if base.len() != nv {
            return Err(Error::Schema(format!(
                "base_point has {} entries; expected {} for mode {:?} with n = {}",
                base.len(),
                nv,
                self.mode,
                self.n
            )));
        }
        let frame = XFrame::new(nv, self.truncation.d, base)?;
        let a: S = parse_scalar(&self.a, "a")?;
        if a.is_zero() {
            return Err(Error::Input("a must be nonzero".into()));
        }
        let top = regime.m() + 1;
        let f = match (self.mode, &self.f) {
            (Mode::Elliptic, Some(_)) => {
                return Err(Error::Schema(
                    "elliptic mode fixes f = a^{-1}|grad u|^2; omit 'f'".into(),
                ))
            }
            (Mode::Elliptic, None) => Nonlinearity::elliptic(&frame, &a)?,
            (_, Some(monos)) => {
                let raw = monos
                    .iter()
                    .map(|mono| build_monomial(&frame, mono))
                    .collect::<Result<Vec<_>>>()?;
                Nonlinearity::decompose_homogeneous(&frame, raw, top)?
            }
            (_, None) => return Err(Error::Schema("'f' is required".into())),
        };
        let psi = match &self.psi {
            None => PsiSource::Given(XSeries::zero(&frame)),
            Some(PsiSpec::Terms(terms)) => PsiSource::Given(build_series(&frame, terms, "psi")?),
            Some(PsiSpec::Solve { solve }) => {
                if !matches!(regime, Regime::Log | Regime::NegativeSide) {
                    return Err(Error::Schema(
                        "'psi.solve' is only available in log and negative_side modes".into(),
                    ));
                }
                if nv == 0 {
                    return Err(Error::Schema("'psi.solve' needs n >= 1".into()));
                }
                let init = build_series(&frame.without_var(0), &solve.init, "psi.solve.init")?;
                let branch = match (overrides.branch, &solve.branch) {
                    (Some(b), _) => Some(b),
                    (None, Some(text)) => Some(parse_branch(text)?),
                    (None, None) => None,
                };
                PsiSource::Solve { init, branch }
            }
        };
        let v0 = match (&self.v0, regime) {
            (Some(_), Regime::Fractional(_)) => {
                return Err(Error::Schema("fractional mode has no free trace; omit 'v0'".into()))
            }
            (Some(terms), _) => Some(build_series(&frame, terms, "v0")?),
            (None, Regime::Fractional(_)) => None,
            (None, _) => Some(XSeries::zero(&frame)),
        };
        let grid = match (&overrides.grid, self.verify.as_ref().and_then(|v| v.grid.as_ref())) {
            (Some(g), _) => g.clone(),
            (None, Some(text)) => text.parse()?,
            (None, None) => GridSpec::default(),
        };
        Ok(Problem {
            dimension: self.n,
            regime,
            frame,
            a,
            f,
            psi,
            v0,
            order: overrides.order.unwrap_or(self.truncation.k),
            grid,
        })
    }
}

/// Where the blowup surface comes from.
#[derive(Clone, Debug)]
pub enum PsiSource<S: Scalar> {
    Given(XSeries<S>),
    Solve { init: XSeries<S>, branch: Option<Branch> },
}

/// A validated problem in a concrete field.
#[derive(Clone, Debug)]
pub struct Problem<S: Scalar> {
    /// Spatial dimension `n` as written in the file.
    pub dimension: usize,
    pub regime: Regime,
    pub frame: XFrame,
    pub a: S,
    /// The nonlinearity in the original coordinates.
    pub f: Nonlinearity<S>,
    pub psi: PsiSource<S>,
    pub v0: Option<XSeries<S>>,
    pub order: usize,
    pub grid: GridSpec,
}

pub fn parse_branch(text: &str) -> Result<Branch> {
    match text.trim() {
        "+" | "plus" => Ok(Branch::Plus),
        "-" | "\u{2212}" | "minus" => Ok(Branch::Minus),
        other => other
            .parse::<f64>()
            .map(Branch::Near)
            .map_err(|_| Error::Schema(format!("branch '{other}' is neither +, - nor a slope"))),
    }
}

pub fn parse_scalar<S: Scalar>(v: &Value, field: &str) -> Result<S> {
    S::from_json(v).ok_or_else(|| Error::Schema(format!("field '{field}': cannot read {v} as a number")))
}

fn exponent(n: usize, x: &[u32], field: &str) -> Result<Exponent> {
    if x.is_empty() {
        return Ok(Exponent::zero(n));
    }
    if x.len() != n {
        return Err(Error::Schema(format!(
            "field '{field}': exponent {x:?} has {} entries for {n} variables",
            x.len()
        )));
    }
    Ok(Exponent(x.to_vec()))
}

pub fn build_series<S: Scalar>(frame: &XFrame, terms: &[TermSpec], field: &str) -> Result<XSeries<S>> {
    let n = frame.n();
    let pairs = terms
        .iter()
        .map(|t| Ok((exponent(n, &t.x, field)?, parse_scalar::<S>(&t.c, field)?)))
        .collect::<Result<Vec<_>>>()?;
    let degree = pairs.iter().map(|(e, _)| e.degree()).max().unwrap_or(0);
    if degree > frame.max_degree() {
        return Err(Error::Schema(format!(
            "field '{field}': a term of degree {degree} exceeds the truncation degree D = {}",
            frame.max_degree()
        )));
    }
    XSeries::from_terms(frame, pairs)
}

fn build_monomial<S: Scalar>(frame: &XFrame, spec: &MonomialSpec) -> Result<NMonomial<S>> {
    let n = frame.n();
    let xi = exponent(n, &spec.xi, "f.xi")?;
    let t_degree = spec.coeff.iter().map(|c| c.t).max().unwrap_or(0) as usize;
    let mut coeff: Vec<Vec<(Exponent, S)>> = vec![Vec::new(); t_degree + 1];
    for term in &spec.coeff {
        coeff[term.t as usize].push((exponent(n, &term.x, "f.coeff")?, parse_scalar(&term.c, "f.coeff")?));
    }
    let coeff = coeff
        .into_iter()
        .map(|terms| XSeries::from_terms(frame, terms))
        .collect::<Result<Vec<_>>>()?;
    Ok(NMonomial::new(coeff, spec.tau, xi))
}
