#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use swf::fuchsian::{assemble_solution, solve_recursion, RecursionSpec, SingularSolution};
use swf::geometry::Hypersurface;
use swf::nonlinearity::{NMonomial, Nonlinearity};
use swf::reduction::{build_log_reduction, ReducedEquation};
use swf::series::{Exponent, XFrame, XSeries};
use swf::{Rational, Scalar};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

pub fn poly<S: Scalar>(frame: &XFrame, terms: &[(&[u32], S)]) -> XSeries<S> {
    XSeries::from_terms(frame, terms.iter().map(|(e, c)| (Exponent(e.to_vec()), c.clone()))).unwrap()
}

pub fn constant<S: Scalar>(frame: &XFrame, c: S) -> XSeries<S> {
    XSeries::constant(frame, c)
}

pub fn mono<S: Scalar>(c: XSeries<S>, tau: u32, xi: &[u32]) -> NMonomial<S> {
    NMonomial::simple(c, tau, Exponent(xi.to_vec()))
}

/// `coeffs[j]` multiplies `t^j`.
pub fn mono_t<S: Scalar>(coeffs: Vec<XSeries<S>>, tau: u32, xi: &[u32]) -> NMonomial<S> {
    NMonomial::new(coeffs, tau, Exponent(xi.to_vec()))
}

pub fn unit(n: usize, i: usize) -> Vec<u32> {
    Exponent::unit(n, i).0
}

/// `a^{-1} (tau^2 - |xi|^2)`, the wave-map nonlinearity of the plane-wave solutions.
pub fn wave_quadratic<S: Scalar>(frame: &XFrame, a: &S) -> Vec<NMonomial<S>> {
    let n = frame.n();
    let inv = S::one().div(a);
    let mut out = vec![mono(constant(frame, inv.clone()), 2, &vec![0; n])];
    for i in 0..n {
        let mut xi = vec![0; n];
        xi[i] = 2;
        out.push(mono(constant(frame, inv.neg()), 0, &xi));
    }
    out
}

pub fn nonlinearity<S: Scalar>(frame: &XFrame, raw: Vec<NMonomial<S>>, top: u32) -> Nonlinearity<S> {
    Nonlinearity::decompose_homogeneous(frame, raw, top).unwrap()
}

pub struct LogRun<S: Scalar> {
    pub equation: ReducedEquation<S>,
    pub solution: SingularSolution<S>,
}

pub fn solve_log<S: Scalar>(
    f: &Nonlinearity<S>,
    psi: XSeries<S>,
    a: &S,
    v0: Option<XSeries<S>>,
    order: usize,
) -> swf::Result<LogRun<S>> {
    let h = Hypersurface::new(psi)?;
    let equation = build_log_reduction(f, &h, a)?;
    let spec = RecursionSpec::new(equation.clone(), v0, order)?;
    let v = solve_recursion(&spec)?;
    let solution = assemble_solution(&spec, v)?;
    Ok(LogRun { equation, solution })
}

pub fn small_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// A random log-regime problem satisfying the pseudo-Eikonal condition by construction:
/// `f_2 = a^{-1}(tau^2 - |xi|^2) + (t - psi) c_1 tau^2 + c_2(x) (xi_1 + psi_1 tau) L(tau, xi)`.
pub struct RandomProblem {
    pub frame: XFrame,
    pub a: Rational,
    pub psi: XSeries<Rational>,
    pub f: Nonlinearity<Rational>,
    pub v0: XSeries<Rational>,
}

fn random_poly(rng: &mut ChaCha8Rng, frame: &XFrame, degree: u32, num: i64, den: i64) -> XSeries<Rational> {
    let n = frame.n();
    let mut terms: Vec<(Exponent, Rational)> = Vec::new();
    let mut stack = vec![vec![0u32; n]];
    while let Some(e) = stack.pop() {
        let d: u32 = e.iter().sum();
        if rng.gen_bool(0.6) {
            terms.push((Exponent(e.clone()), small_rational(rng, num, den)));
        }
        if d < degree {
            let from = e.iter().rposition(|&p| p > 0).unwrap_or(0);
            for i in from..n {
                let mut next = e.clone();
                next[i] += 1;
                stack.push(next);
            }
        }
    }
    XSeries::from_terms(frame, terms).unwrap()
}

pub fn random_problem(rng: &mut ChaCha8Rng, max_n: usize, d: u32) -> RandomProblem {
    let n = rng.gen_range(1..=max_n);
    let frame = XFrame::origin(n, d);
    let a = {
        let p = rng.gen_range(1..=4i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        q(p, rng.gen_range(1..=3))
    };
    // |grad psi(0)| <= 1/2 keeps the surface spacelike.
    let mut psi_terms: Vec<(Exponent, Rational)> = Vec::new();
    for i in 0..n {
        psi_terms.push((Exponent::unit(n, i), q(rng.gen_range(-2..=2), 4 * n as i64)));
        for j in i..n {
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            psi_terms.push((Exponent(e), q(rng.gen_range(-1..=1), 4)));
        }
    }
    psi_terms.push((Exponent::zero(n), small_rational(rng, 2, 3)));
    let psi = XSeries::from_terms(&frame, psi_terms).unwrap();
    let psi_1 = psi.partial(0).unwrap();

    let zero = vec![0u32; n];
    let mut raw = wave_quadratic(&frame, &a);
    // (t - psi) c1 tau^2
    let c1 = small_rational(rng, 2, 2);
    raw.push(mono_t(vec![psi.scale(&c1.neg()), constant(&frame, c1)], 2, &zero));
    // c2 (xi_1 + psi_1 tau) L, L = l_0 tau + sum l_i xi_i
    let c2 = random_poly(rng, &frame, 1, 2, 2);
    let mut l: Vec<(u32, Vec<u32>, Rational)> = vec![(1, zero.clone(), small_rational(rng, 2, 2))];
    for i in 0..n {
        l.push((0, unit(n, i), small_rational(rng, 2, 2)));
    }
    for (tau, xi, c) in &l {
        let mut with_xi1 = xi.clone();
        with_xi1[0] += 1;
        raw.push(mono(c2.scale(c), *tau, &with_xi1));
        raw.push(mono((&c2 * &psi_1).scale(c), tau + 1, xi));
    }
    // f_1 and f_0
    raw.push(mono(random_poly(rng, &frame, 2, 2, 3), 1, &zero));
    for i in 0..n {
        raw.push(mono(random_poly(rng, &frame, 1, 2, 3), 0, &unit(n, i)));
    }
    let f0: Vec<XSeries<Rational>> = (0..=rng.gen_range(0..=2usize))
        .map(|_| random_poly(rng, &frame, 2, 3, 2))
        .collect();
    raw.push(mono_t(f0, 0, &zero));
    let f = nonlinearity(&frame, raw, 2);
    let v0 = random_poly(rng, &frame, 2, 3, 2);
    RandomProblem { frame, a, psi, f, v0 }
}
