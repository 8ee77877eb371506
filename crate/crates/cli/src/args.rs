use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    PaperCycle,
    NonAdditivity,
    LoPopescu,
    MultiCopy,
}

/// Conversion probabilities, protocols and entanglement monotones for bipartite pure states.
///
/// State files are JSON: `{"schmidt_sq": ["3/4", "1/4"]}` or
/// `{"amplitudes": [[[re, im], ...], ...]}`, with an optional "label". Use `-` for stdin.
#[derive(Debug, Parser)]
#[command(name = "locc", version)]
pub struct Cli {
    /// Numeric mode for everything above the amplitude level.
    #[arg(long, value_enum, global = true, default_value_t = Mode::Rational)]
    pub mode: Mode,

    /// Comparison tolerance in float mode, and for amplitude input.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,

    /// Drop zero Schmidt coefficients after parsing.
    #[arg(long, global = true)]
    pub trim_zeros: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Report format. `plan` and `simulate` always emit JSON.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal probability of converting SOURCE into TARGET.
    Prob { source: PathBuf, target: PathBuf },
    /// Explicit conversion plan (breakpoints, intermediate state, filter) as JSON.
    Plan { source: PathBuf, target: PathBuf },
    /// Executes the optimal protocol and compares with the predicted probability.
    Simulate {
        #[arg(required_unless_present = "plan")]
        source: Option<PathBuf>,
        #[arg(required_unless_present = "plan")]
        target: Option<PathBuf>,
        /// Read the plan from a file written by `plan` instead of SOURCE and TARGET.
        #[arg(long, conflicts_with_all = ["source", "target"])]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate every branch instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = locc_core::locc::DEFAULT_BRANCH_CAP)]
        branch_cap: usize,
        /// Fail instead of sampling when the branch cap is exceeded.
        #[arg(long)]
        no_fallback: bool,
    },
    /// The monotones E_1..E_n and the entropy of entanglement of a state.
    Monotones { state: PathBuf },
    /// Conversion probabilities in both directions between two states.
    Compare { first: PathBuf, second: PathBuf },
    /// Conversion probability between tensor powers.
    Tensor {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, default_value_t = 2)]
        copies: usize,
    },
    /// Built-in worked scenarios.
    Demo {
        #[arg(value_enum)]
        name: Demo,
    },
}
