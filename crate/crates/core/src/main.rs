use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swf::cli::pipeline::{failure_json, run, Command, RunOptions};
use swf::cli::problem::{parse_branch, Arithmetic, Overrides};
use swf::verify::GridSpec;
use swf::{Error, Result};

/// Singular solutions of nonlinear wave equations by Fuchsian reduction.
#[derive(Parser, Debug)]
#[command(name = "swf", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Check the compatibility conditions of a problem.
    Check(Common),
    /// Solve the pseudo-Eikonal equation for the blowup surface.
    Eikonal(Common),
    /// Build the singular solution.
    Solve(Common),
    /// Substitute a solution back into the equation.
    Verify(Common),
    /// Check, solve and verify.
    All(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Solution file written by `solve` (verify only).
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SWF_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Truncation order K.
    #[arg(long)]
    order: Option<usize>,
    /// float or rational.
    #[arg(long)]
    arithmetic: Option<String>,
    /// `+`, `-` or a target slope.
    #[arg(long, allow_hyphen_values = true)]
    branch: Option<String>,
    /// `default` or `T=..;r=..;points=..`.
    #[arg(long)]
    grid: Option<String>,
}

fn options(common: Common) -> Result<RunOptions> {
    let overrides = Overrides {
        order: common.order,
        arithmetic: common.arithmetic.as_deref().map(Arithmetic::parse).transpose()?,
        branch: common.branch.as_deref().map(parse_branch).transpose()?,
        grid: common.grid.as_deref().map(str::parse::<GridSpec>).transpose()?,
    };
    Ok(RunOptions {
        problem: common.problem,
        solution: common.solution,
        out: common.out,
        overrides,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Check(c) => (Command::Check, c),
        Sub::Eikonal(c) => (Command::Eikonal, c),
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::All(c) => (Command::All, c),
    };
    let out = common.out.clone();
    let result = options(common).and_then(|opts| run(command, &opts));
    match result {
        Ok(summary) => {
            emit(&serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(err) => report(&err, &out),
    }
}

fn report(err: &Error, out: &std::path::Path) -> ExitCode {
    let doc = failure_json(err);
    emit(&serde_json::to_string_pretty(&doc).unwrap_or_default());
    eprintln!("swf: {err} (output directory {})", out.display());
    ExitCode::from(err.exit_code() as u8)
}

fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{text}");
}
