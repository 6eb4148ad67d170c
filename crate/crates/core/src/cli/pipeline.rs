//! Subcommands: `check`, `eikonal`, `solve`, `verify` and `all`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::artifacts::{
    fit_summary, solution_doc, solution_from_doc, surface_doc, write_json, write_residual_csv, SolutionDoc,
};
use super::problem::{Arithmetic, Overrides, Problem, ProblemSpec, PsiSource};
use crate::error::{Error, Result};
use crate::fuchsian::{assemble_solution, solve_recursion, RecursionSpec, SingularSolution};
use crate::geometry::{
    check_higher_conditions, check_pseudo_eikonal, check_time_reversal, solve_pseudo_eikonal,
    Hypersurface, CONDITION_TOL,
};
use crate::nonlinearity::Nonlinearity;
use crate::reduction::{
    build_elliptic_reduction, build_fractional_reduction, build_log_reduction, build_negative_side, ReducedEquation,
    Regime,
};
use crate::scalar::{Rational, Scalar};
use crate::verify::{first_nonvanishing, numeric_residual, symbolic_residual, GridSpec, ResidualReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Eikonal,
    Solve,
    Verify,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Eikonal => "eikonal",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub problem: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionNorm {
    pub name: &'static str,
    /// `null` for yes/no conditions.
    pub max_abs: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub regime: String,
    pub arithmetic: String,
    pub conditions: Vec<ConditionNorm>,
    pub passed: bool,
}

/// Result of a successful run, printed as JSON on stdout.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub command: &'static str,
    pub arithmetic: String,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<Value>,
}

pub fn failure_json(err: &Error) -> Value {
    json!({
        "status": "error",
        "kind": err.kind(),
        "reason": err.to_string(),
        "exit_code": err.exit_code(),
    })
}

/// Run a subcommand; on failure `failure.json` is written to the output directory when possible.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunSummary> {
    let result = dispatch(command, opts);
    if let Err(err) = &result {
        if std::fs::create_dir_all(&opts.out).is_ok() {
            let _ = write_json(&opts.out.join("failure.json"), &failure_json(err));
        }
    }
    result
}

fn dispatch(command: Command, opts: &RunOptions) -> Result<RunSummary> {
    std::fs::create_dir_all(&opts.out)?;
    if command == Command::Verify {
        if let Some(path) = &opts.solution {
            let text = std::fs::read_to_string(path)?;
            let doc: SolutionDoc = serde_json::from_str(&text)?;
            if let Some(a) = opts.overrides.arithmetic {
                if a.name() != doc.arithmetic {
                    return Err(Error::Schema(format!(
                        "--arithmetic {} does not match the solution's {} arithmetic",
                        a.name(),
                        doc.arithmetic
                    )));
                }
            }
            let grid = opts.overrides.grid.clone().unwrap_or_default();
            return match Arithmetic::parse(&doc.arithmetic)? {
                Arithmetic::Float => verify_doc::<f64>(&doc, &grid, &opts.out),
                Arithmetic::Rational => verify_doc::<Rational>(&doc, &grid, &opts.out),
            };
        }
    }
    let path = opts
        .problem
        .as_ref()
        .ok_or_else(|| Error::Input(format!("'{}' needs --problem", command.name())))?;
    let spec = ProblemSpec::from_path(path)?;
    match spec.arithmetic(&opts.overrides) {
        Arithmetic::Float => run_problem::<f64>(command, &spec, opts),
        Arithmetic::Rational => run_problem::<Rational>(command, &spec, opts),
    }
}

fn run_problem<S: Scalar>(command: Command, spec: &ProblemSpec, opts: &RunOptions) -> Result<RunSummary> {
    let problem: Problem<S> = spec.build(&opts.overrides)?;
    let out = &opts.out;
    let mut summary = RunSummary {
        status: "ok",
        command: command.name(),
        arithmetic: S::NAME.into(),
        artifacts: Vec::new(),
        check: None,
        fit: None,
    };
    match command {
        Command::Check => {
            let report = check_conditions(&problem)?;
            summary.artifacts.push(write_check(out, &report)?);
            let passed = report.passed;
            summary.check = Some(report);
            if !passed {
                // Re-run the strict builder for a precise error.
                reduce(&problem, &surface(&problem)?)?;
            }
        }
        Command::Eikonal => {
            if !matches!(problem.psi, PsiSource::Solve { .. }) {
                return Err(Error::Input("'eikonal' needs a problem with psi.solve".into()));
            }
            let psi = surface(&problem)?;
            summary.artifacts.push(write_surface(out, &problem, &psi)?);
        }
        Command::Solve => {
            let (sol, cert, artifacts) = solve_problem(&problem, out)?;
            summary.artifacts.extend(artifacts);
            summary
                .artifacts
                .push(write_solution(out, &sol, &problem.f, problem.dimension, cert)?);
        }
        Command::Verify => {
            let (sol, _, _) = solve_problem(&problem, out)?;
            let (fit, artifacts) = verify_solution(&sol, &problem.f, &problem.grid, out)?;
            summary.artifacts.extend(artifacts);
            summary.fit = Some(fit);
        }
        Command::All => {
            let report = check_conditions(&problem)?;
            summary.artifacts.push(write_check(out, &report)?);
            summary.check = Some(report);
            let (sol, cert, artifacts) = solve_problem(&problem, out)?;
            summary.artifacts.extend(artifacts);
            summary
                .artifacts
                .push(write_solution(out, &sol, &problem.f, problem.dimension, cert)?);
            let (fit, artifacts) = verify_solution(&sol, &problem.f, &problem.grid, out)?;
            summary.artifacts.extend(artifacts);
            summary.fit = Some(fit);
        }
    }
    Ok(summary)
}

/// The blowup surface: given directly or solved from the pseudo-Eikonal equation.
pub fn surface<S: Scalar>(problem: &Problem<S>) -> Result<crate::series::XSeries<S>> {
    match &problem.psi {
        PsiSource::Given(psi) => Ok(psi.clone()),
        PsiSource::Solve { init, branch } => {
            let branch = branch.ok_or_else(|| {
                Error::Input("psi.solve needs a branch ('+', '-' or a target slope); pass --branch".into())
            })?;
            solve_pseudo_eikonal(&problem.frame, &problem.f.part(2), &problem.a, init, branch)
        }
    }
}

/// Strict reduction for the problem's regime.
pub fn reduce<S: Scalar>(problem: &Problem<S>, psi: &crate::series::XSeries<S>) -> Result<ReducedEquation<S>> {
    match problem.regime {
        Regime::Log => build_log_reduction(&problem.f, &Hypersurface::new(psi.clone())?, &problem.a),
        Regime::NegativeSide => build_negative_side(&problem.f, &Hypersurface::new(psi.clone())?, &problem.a),
        Regime::Elliptic => build_elliptic_reduction(psi, &problem.a),
        Regime::Fractional(m) => {
            build_fractional_reduction(&problem.f, &Hypersurface::new(psi.clone())?, &problem.a, m)
        }
    }
}

/// Norms of every compatibility condition of the regime.
pub fn check_conditions<S: Scalar>(problem: &Problem<S>) -> Result<CheckReport> {
    let psi = surface(problem)?;
    let norm = |name: &'static str, r: &crate::series::XSeries<S>| ConditionNorm {
        name,
        max_abs: Some(r.max_abs()),
        holds: r.first_offending(CONDITION_TOL).is_none(),
    };
    let mut conditions = Vec::new();
    match problem.regime {
        Regime::Log => {
            let h = Hypersurface::new(psi)?;
            conditions.push(norm("pseudo-Eikonal", &check_pseudo_eikonal(&h, &problem.f.part(2), &problem.a)?));
        }
        Regime::NegativeSide => {
            let h = Hypersurface::new(psi.clone())?;
            let f2 = problem.f.part(2);
            conditions.push(ConditionNorm {
                name: "time reversal",
                max_abs: None,
                holds: check_time_reversal(&f2),
            });
            conditions.push(norm("pseudo-Eikonal", &check_pseudo_eikonal(&h, &f2, &problem.a)?));
            let reversed = Hypersurface::new(-&psi)?;
            conditions.push(norm(
                "time-reversed pseudo-Eikonal",
                &check_pseudo_eikonal(&reversed, &problem.f.time_reversed().part(2), &problem.a)?,
            ));
        }
        Regime::Elliptic => {
            Hypersurface::elliptic(psi)?;
        }
        Regime::Fractional(m) => {
            let h = Hypersurface::new(psi)?;
            let (top, fm) = check_higher_conditions(&h, &problem.f, &problem.a, m)?;
            conditions.push(norm("top-degree", &top));
            conditions.push(norm("degree-m vanishing", &fm));
        }
    }
    Ok(CheckReport {
        regime: problem.regime.name().into(),
        arithmetic: S::NAME.into(),
        passed: conditions.iter().all(|c| c.holds),
        conditions,
    })
}

/// Solve the recursion; returns the solution, the certificate norm and any surface artifact.
pub fn solve_problem<S: Scalar>(
    problem: &Problem<S>,
    out: &Path,
) -> Result<(SingularSolution<S>, f64, Vec<PathBuf>)> {
    let psi = surface(problem)?;
    let mut artifacts = Vec::new();
    if matches!(problem.psi, PsiSource::Solve { .. }) {
        artifacts.push(write_surface(out, problem, &psi)?);
    }
    let eq = reduce(problem, &psi)?;
    let certificate = eq.certificate()?.max_abs();
    let spec = RecursionSpec::new(eq, problem.v0.clone(), problem.order)?;
    let v = solve_recursion(&spec)?;
    Ok((assemble_solution(&spec, v)?, certificate, artifacts))
}

/// Symbolic and sampled residuals; fails with a residual error after writing the artifacts.
pub fn verify_solution<S: Scalar>(
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    grid: &GridSpec,
    out: &Path,
) -> Result<(Value, Vec<PathBuf>)> {
    let residual = symbolic_residual(sol, f, None)?;
    let failing = first_nonvanishing(sol, &residual);
    let report: ResidualReport = numeric_residual(sol, f, grid)?;
    let csv_path = out.join("residual.csv");
    let first_var = if sol.regime == Regime::Elliptic { 2 } else { 1 };
    write_residual_csv(&csv_path, &report, sol.n(), first_var)?;
    let fit = fit_summary(sol, &report, failing.map(|(k, _)| k));
    let fit_path = out.join("fit.json");
    write_json(&fit_path, &fit)?;
    if let Some((k, value)) = failing {
        return Err(Error::Residual(format!(
            "symbolic residual does not vanish at order {k} (|coefficient| = {value:e})"
        )));
    }
    Ok((serde_json::to_value(&fit)?, vec![csv_path, fit_path]))
}

fn verify_doc<S: Scalar>(doc: &SolutionDoc, grid: &GridSpec, out: &Path) -> Result<RunSummary> {
    let (sol, f) = solution_from_doc::<S>(doc)?;
    let (fit, artifacts) = verify_solution(&sol, &f, grid, out)?;
    Ok(RunSummary {
        status: "ok",
        command: Command::Verify.name(),
        arithmetic: S::NAME.into(),
        artifacts,
        check: None,
        fit: Some(fit),
    })
}

fn write_check(out: &Path, report: &CheckReport) -> Result<PathBuf> {
    let path = out.join("check.json");
    write_json(&path, report)?;
    Ok(path)
}

fn write_surface<S: Scalar>(out: &Path, problem: &Problem<S>, psi: &crate::series::XSeries<S>) -> Result<PathBuf> {
    let residual = check_pseudo_eikonal(&Hypersurface::new(psi.clone())?, &problem.f.part(2), &problem.a)?;
    let path = out.join("psi.json");
    write_json(&path, &surface_doc(psi, residual.max_abs()))?;
    Ok(path)
}

fn write_solution<S: Scalar>(
    out: &Path,
    sol: &SingularSolution<S>,
    f: &Nonlinearity<S>,
    dimension: usize,
    certificate: f64,
) -> Result<PathBuf> {
    let path = out.join("solution.json");
    write_json(&path, &solution_doc(sol, f, dimension, certificate))?;
    Ok(path)
}
