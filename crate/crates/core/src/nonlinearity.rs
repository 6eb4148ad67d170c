//! Polynomial nonlinearities `f(t, x; tau, xi)` split into homogeneous parts in `(tau, xi)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Exponent, SigmaKind, SigmaSeries, XFrame, XSeries};

/// Default cap on the degree in `t` of a monomial coefficient.
pub const DEFAULT_T_DEGREE: usize = 4;

/// `(sum_j coeff[j] t^j) * tau^tau_power * xi^xi_powers`.
#[derive(Clone, Debug)]
pub struct NMonomial<S: Scalar> {
    pub coeff: Vec<XSeries<S>>,
    pub tau_power: u32,
    pub xi_powers: Exponent,
}

impl<S: Scalar> NMonomial<S> {
    pub fn new(coeff: Vec<XSeries<S>>, tau_power: u32, xi_powers: Exponent) -> Self {
        NMonomial {
            coeff,
            tau_power,
            xi_powers,
        }
    }

    /// Monomial with a `t`-independent coefficient.
    pub fn simple(coeff: XSeries<S>, tau_power: u32, xi_powers: Exponent) -> Self {
        Self::new(vec![coeff], tau_power, xi_powers)
    }

    /// Homogeneity degree `tau_power + |xi_powers|`.
    pub fn degree(&self) -> u32 {
        self.tau_power + self.xi_powers.degree()
    }

    pub fn t_degree(&self) -> usize {
        self.coeff.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.coeff.iter().all(XSeries::is_zero)
    }

    fn label(&self) -> String {
        let mut parts = Vec::new();
        match self.tau_power {
            0 => {}
            1 => parts.push("tau".to_string()),
            p => parts.push(format!("tau^{p}")),
        }
        for (i, &p) in self.xi_powers.powers().iter().enumerate() {
            match p {
                0 => {}
                1 => parts.push(format!("xi{}", i + 1)),
                p => parts.push(format!("xi{}^{}", i + 1, p)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl<S: Scalar> fmt::Display for NMonomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.coeff.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            match j {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "({})*t", c)?,
                _ => write!(f, "({})*t^{}", c, j)?,
            }
        }
        write!(f, ")*{}", self.label())
    }
}

/// One homogeneous part `f_l`.
#[derive(Clone, Debug)]
pub struct HomogeneousPart<S: Scalar> {
    pub degree: u32,
    pub monomials: Vec<NMonomial<S>>,
}

impl<S: Scalar> HomogeneousPart<S> {
    pub fn empty(degree: u32) -> Self {
        HomogeneousPart {
            degree,
            monomials: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.iter().all(NMonomial::is_zero)
    }

    /// Evaluate on jets of any [`JetAlgebra`].
    pub fn eval<J: JetAlgebra<S>>(&self, t: &J, tau: &J, xi: &[J]) -> Result<J> {
        eval_monomials(&self.monomials, t, tau, xi)
    }

    /// `f_l(psi(x), x; -1, grad psi(x))` as a series in `x`.
    pub fn eval_on_sigma(&self, psi: &XSeries<S>) -> Result<XSeries<S>> {
        let tau = XSeries::constant(psi.frame(), S::one().neg());
        let xi = psi.gradient();
        self.eval(psi, &tau, &xi)
    }

    /// Re-expand `f_l(t, x; -1, grad psi)` around `t = psi(x) + T`.
    ///
    /// Returns `(on_sigma, tilde)` with `f_l(psi + T, x; -1, grad psi) = on_sigma + T * tilde`;
    /// `tilde` is truncated at order `k` in `T`.
    pub fn split_remainder(&self, psi: &XSeries<S>, k: i32) -> Result<(XSeries<S>, SigmaSeries<S>)> {
        let frame = psi.frame();
        let kind = SigmaKind::T;
        let t = &SigmaSeries::constant(kind, psi.clone()) + &SigmaSeries::t_var(kind, frame);
        let tau = SigmaSeries::scalar(kind, frame, S::one().neg());
        let xi: Vec<_> = psi
            .gradient()
            .into_iter()
            .map(|g| SigmaSeries::constant(kind, g))
            .collect();
        let full = self.eval(&t, &tau, &xi)?;
        let on_sigma = full.coeff(0);
        let rest = &full - &SigmaSeries::constant(kind, on_sigma.clone());
        Ok((on_sigma, rest.shift(-1).truncate(k)))
    }

    /// Pointwise value at `(t, x; tau, xi)` with absolute coordinates `x`.
    pub fn eval_point(&self, t: &S, x: &[S], tau: &S, xi: &[S]) -> S {
        let mut acc = S::zero();
        for mono in &self.monomials {
            let mut c = S::zero();
            for coeff in mono.coeff.iter().rev() {
                c = c.mul(t).add(&coeff.eval(x));
            }
            if c.is_zero() {
                continue;
            }
            let mut term = c.mul(&tau.powi(mono.tau_power));
            for (xi_i, &p) in xi.iter().zip(mono.xi_powers.powers()) {
                if p > 0 {
                    term = term.mul(&xi_i.powi(p));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// True when every monomial has an even power of `tau`.
    pub fn is_even_in_tau(&self) -> bool {
        self.first_odd_in_tau().is_none()
    }

    pub fn first_odd_in_tau(&self) -> Option<&NMonomial<S>> {
        self.monomials
            .iter()
            .find(|mono| mono.tau_power % 2 == 1 && !mono.is_zero())
    }
}

/// `f = f_0 + ... + f_{m+1}`.
#[derive(Clone, Debug)]
pub struct Nonlinearity<S: Scalar> {
    n: usize,
    frame: XFrame,
    parts: Vec<HomogeneousPart<S>>,
}

impl<S: Scalar> Nonlinearity<S> {
    /// Route monomials to the part matching their degree; `top_degree` is `m + 1`.
    pub fn decompose_homogeneous(frame: &XFrame, raw: Vec<NMonomial<S>>, top_degree: u32) -> Result<Self> {
        Self::decompose_with_cap(frame, raw, top_degree, DEFAULT_T_DEGREE)
    }

    pub fn decompose_with_cap(
        frame: &XFrame,
        raw: Vec<NMonomial<S>>,
        top_degree: u32,
        t_degree_cap: usize,
    ) -> Result<Self> {
        let n = frame.n();
        let mut parts: Vec<HomogeneousPart<S>> = (0..=top_degree).map(HomogeneousPart::empty).collect();
        for mono in raw {
            if mono.xi_powers.len() != n {
                return Err(Error::Input(format!(
                    "monomial {} has {} xi exponents for {} variables",
                    mono.label(),
                    mono.xi_powers.len(),
                    n
                )));
            }
            let l = mono.degree();
            if l > top_degree {
                return Err(Error::Input(format!(
                    "monomial {} has degree {} above the top degree {}",
                    mono.label(),
                    l,
                    top_degree
                )));
            }
            if mono.t_degree() > t_degree_cap {
                return Err(Error::Input(format!(
                    "monomial {} has a coefficient of degree {} in t; the cap is {}",
                    mono.label(),
                    mono.t_degree(),
                    t_degree_cap
                )));
            }
            for c in &mono.coeff {
                frame.check(c.frame())?;
            }
            parts[l as usize].monomials.push(mono);
        }
        Ok(Nonlinearity {
            n,
            frame: frame.clone(),
            parts,
        })
    }

    /// `a^{-1} (tau^2 + |xi|^2)`, the right side of `Delta u = a^{-1} |grad u|^2`
    /// written with the distinguished coordinate as `t`.
    pub fn elliptic(frame: &XFrame, a: &S) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::Input("a must be nonzero".into()));
        }
        let n = frame.n();
        let c = XSeries::constant(frame, S::one().div(a));
        let mut raw = vec![NMonomial::simple(c.clone(), 2, Exponent::zero(n))];
        for i in 0..n {
            let mut e = Exponent::zero(n);
            e.0[i] = 2;
            raw.push(NMonomial::simple(c.clone(), 0, e));
        }
        Self::decompose_homogeneous(frame, raw, 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &XFrame {
        &self.frame
    }

    /// `m + 1`.
    pub fn top_degree(&self) -> u32 {
        self.parts.len() as u32 - 1
    }

    pub fn parts(&self) -> &[HomogeneousPart<S>] {
        &self.parts
    }

    /// `f_l`; an empty part above the top degree.
    pub fn part(&self, l: u32) -> HomogeneousPart<S> {
        self.parts
            .get(l as usize)
            .cloned()
            .unwrap_or_else(|| HomogeneousPart::empty(l))
    }

    pub fn monomials(&self) -> impl Iterator<Item = &NMonomial<S>> {
        self.parts.iter().flat_map(|p| p.monomials.iter())
    }

    /// Full evaluation on jets.
    pub fn eval<J: JetAlgebra<S>>(&self, t: &J, tau: &J, xi: &[J]) -> Result<J> {
        let all: Vec<NMonomial<S>> = self.monomials().cloned().collect();
        eval_monomials(&all, t, tau, xi)
    }

    /// `f(-s, x; -tau, xi)`: the nonlinearity seen by `w(s, x) = u(-s, x)`.
    pub fn time_reversed(&self) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| HomogeneousPart {
                degree: p.degree,
                monomials: p
                    .monomials
                    .iter()
                    .map(|mono| {
                        let coeff = mono
                            .coeff
                            .iter()
                            .enumerate()
                            .map(|(j, c)| {
                                if (j as u32 + mono.tau_power) % 2 == 1 {
                                    -c
                                } else {
                                    c.clone()
                                }
                            })
                            .collect();
                        NMonomial::new(coeff, mono.tau_power, mono.xi_powers.clone())
                    })
                    .collect(),
            })
            .collect();
        Nonlinearity {
            n: self.n,
            frame: self.frame.clone(),
            parts,
        }
    }

    /// Pointwise value at `(t, x; tau, xi)` with absolute coordinates `x`.
    pub fn eval_point(&self, t: &S, x: &[S], tau: &S, xi: &[S]) -> S {
        self.parts
            .iter()
            .fold(S::zero(), |acc, p| acc.add(&p.eval_point(t, x, tau, xi)))
    }
}

/// Ring of jets a nonlinearity can be evaluated on.
pub trait JetAlgebra<S: Scalar>: Clone {
    fn frame(&self) -> &XFrame;
    /// Embed an `x`-series coefficient.
    fn lift(&self, c: &XSeries<S>) -> Self;
    fn jet_add(&self, other: &Self) -> Result<Self>;
    fn jet_mul(&self, other: &Self) -> Result<Self>;

    fn jet_zero(&self) -> Self {
        self.lift(&XSeries::zero(self.frame()))
    }
}

impl<S: Scalar> JetAlgebra<S> for XSeries<S> {
    fn frame(&self) -> &XFrame {
        XSeries::frame(self)
    }
    fn lift(&self, c: &XSeries<S>) -> Self {
        c.clone()
    }
    fn jet_add(&self, other: &Self) -> Result<Self> {
        self.try_add(other)
    }
    fn jet_mul(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)
    }
}

impl<S: Scalar> JetAlgebra<S> for SigmaSeries<S> {
    fn frame(&self) -> &XFrame {
        SigmaSeries::frame(self)
    }
    fn lift(&self, c: &XSeries<S>) -> Self {
        SigmaSeries::constant(self.kind(), c.clone())
    }
    fn jet_add(&self, other: &Self) -> Result<Self> {
        self.try_add(other)
    }
    fn jet_mul(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)
    }
}

/// Lazily filled table of powers `x^0, x^1, ...`.
struct Powers<J> {
    base: J,
    table: Vec<J>,
}

impl<J: Clone> Powers<J> {
    fn new(base: J, one: J) -> Self {
        Powers { base, table: vec![one] }
    }

    fn get<S: Scalar>(&mut self, p: usize) -> Result<J>
    where
        J: JetAlgebra<S>,
    {
        while self.table.len() <= p {
            let next = self.table.last().expect("non-empty").jet_mul(&self.base)?;
            self.table.push(next);
        }
        Ok(self.table[p].clone())
    }
}

fn eval_monomials<S: Scalar, J: JetAlgebra<S>>(monos: &[NMonomial<S>], t: &J, tau: &J, xi: &[J]) -> Result<J> {
    let one = t.lift(&XSeries::one(t.frame()));
    let n = xi.len();
    let mut t_pow = Powers::new(t.clone(), one.clone());
    let mut tau_pow = Powers::new(tau.clone(), one.clone());
    let mut xi_pow: Vec<Powers<J>> = xi.iter().map(|x| Powers::new(x.clone(), one.clone())).collect();
    let mut acc = t.jet_zero();
    for mono in monos {
        if mono.is_zero() {
            continue;
        }
        if mono.xi_powers.len() != n {
            return Err(Error::Config(format!(
                "nonlinearity has {} xi variables, jet has {}",
                mono.xi_powers.len(),
                n
            )));
        }
        let mut coeff: Option<J> = None;
        for (j, c) in mono.coeff.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = t.lift(c);
            let term = if j == 0 { term } else { term.jet_mul(&t_pow.get(j)?)? };
            coeff = Some(match coeff {
                None => term,
                Some(acc) => acc.jet_add(&term)?,
            });
        }
        let Some(mut term) = coeff else { continue };
        if mono.tau_power > 0 {
            term = term.jet_mul(&tau_pow.get(mono.tau_power as usize)?)?;
        }
        for (i, &p) in mono.xi_powers.powers().iter().enumerate() {
            if p > 0 {
                term = term.jet_mul(&xi_pow[i].get(p as usize)?)?;
            }
        }
        acc = acc.jet_add(&term)?;
    }
    Ok(acc)
}
