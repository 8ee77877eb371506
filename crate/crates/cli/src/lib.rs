//! Library side of the `locc` binary: argument parsing, commands and report formatting.
//!
//! [`run`] takes the raw arguments and returns the exit code together with whatever
//! should go to stdout, so the binary and the tests share one entry point.

pub mod args;
mod commands;
mod demo;

use std::ffi::OsString;
use std::fs;
use std::io::Read;
use std::path::Path;

use clap::Parser;
use serde_json::Value;

use locc_core::{Error, Execution, Rational, Scalar, Tolerance};

pub use args::{Cli, Command, Demo, Format, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// A failed command: exit code plus a one-line diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INFEASIBLE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::DegeneratePlan | Error::BranchCapExceeded(_) => EXIT_INFEASIBLE,
            _ => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}

/// What a command produced: a human-readable table and the same content as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: Option<String>,
    pub json: Value,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report { text: None, json }
    }

    fn render(&self, format: Format) -> String {
        match (&self.text, format) {
            (Some(t), Format::Text) => t.clone(),
            _ => serde_json::to_string_pretty(&self.json).expect("reports serialize"),
        }
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub tol: Tolerance,
    pub trim: bool,
    pub execution: Execution,
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            // clap would exit 2 on usage errors, which here means "infeasible request"
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Invocation { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Invocation { code: EXIT_INVALID, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let mut body = report.render(cli.format);
            if !body.ends_with('\n') {
                body.push('\n');
            }
            match &cli.out {
                Some(path) => match fs::write(path, &body) {
                    Ok(()) => Invocation { code: EXIT_OK, stdout: String::new(), stderr: String::new() },
                    Err(e) => Invocation {
                        code: EXIT_INVALID,
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    },
                },
                None => Invocation { code: EXIT_OK, stdout: body, stderr: String::new() },
            }
        }
        Err(e) => Invocation { code: e.code, stdout: String::new(), stderr: format!("error: {}\n", e.message) },
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    if !(cli.tolerance.is_finite() && cli.tolerance >= 0.0) {
        return Err(CliError::invalid(format!("tolerance must be a non-negative number, got {}", cli.tolerance)));
    }
    let execution = match cli.threads {
        Some(0) => return Err(CliError::invalid("--threads must be at least 1")),
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    let ctx = Context { tol: Tolerance(cli.tolerance), trim: cli.trim_zeros, execution };
    let go = || match cli.mode {
        Mode::Rational => dispatch::<Rational>(&cli.command, &ctx),
        Mode::Float => dispatch::<f64>(&cli.command, &ctx),
    };
    match cli.threads {
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::invalid(format!("cannot start {n} threads: {e}")))?
            .install(go),
        _ => go(),
    }
}

fn dispatch<S: Scalar>(command: &Command, ctx: &Context) -> Result<Report, CliError> {
    match command {
        Command::Prob { source, target } => commands::prob::<S>(source, target, ctx),
        Command::Plan { source, target } => commands::plan::<S>(source, target, ctx),
        Command::Simulate { source, target, plan, trials, seed, exhaustive, branch_cap, no_fallback } => {
            let sim = commands::SimulateArgs {
                trials: *trials,
                seed: *seed,
                exhaustive: *exhaustive,
                branch_cap: *branch_cap,
                fallback: !*no_fallback,
            };
            let input = match (plan, source, target) {
                (Some(p), _, _) => commands::PlanInput::File(p),
                (None, Some(s), Some(t)) => commands::PlanInput::States(s, t),
                _ => return Err(CliError::invalid("simulate needs SOURCE and TARGET, or --plan")),
            };
            commands::simulate::<S>(input, &sim, ctx)
        }
        Command::Monotones { state } => commands::monotones::<S>(state, ctx),
        Command::Compare { first, second } => commands::compare::<S>(first, second, ctx),
        Command::Tensor { source, target, copies } => commands::tensor::<S>(source, target, *copies, ctx),
        Command::Demo { name } => demo::run::<S>(*name, ctx),
    }
}

/// Reads a file, or stdin for `-`.
pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::invalid(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}
