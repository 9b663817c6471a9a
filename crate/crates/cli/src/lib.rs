//! Command-line front end. Every command produces one JSON value; the text
//! format is a rendering of that value.

use std::collections::BTreeSet;
use std::fmt;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

pub mod commands;
pub mod demo;
pub mod input;
pub mod render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qecbound", version, about = "Verify quantum codes against correlated Pauli noise")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Fail with exit code 1 unless the report carries this verdict tag
    /// (repeatable), e.g. correctable, degenerate, violated, perfect, pass.
    #[arg(long, global = true)]
    pub expect: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChannelArgs {
    /// Channel spec as a JSON file path or inline JSON.
    #[arg(long, conflicts_with = "family")]
    pub channel: Option<String>,

    /// Named channel family, e.g. pairwise, even_weight, triple.
    #[arg(long)]
    pub family: Option<qecbound::FamilyName>,

    #[arg(long)]
    pub n: Option<usize>,

    /// Half-count for even_weight (n = 2m + 1).
    #[arg(long)]
    pub m: Option<usize>,

    /// Maximum error weight (weight_bounded, hamming).
    #[arg(long)]
    pub t: Option<usize>,

    /// Error weights for the correlated family, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<usize>>,

    /// Total error probability of the uniform assignment.
    #[arg(long)]
    pub error_mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKindArg {
    Packing,
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecoveryArg {
    /// Syndrome table when the code has one, canonical otherwise.
    Auto,
    Canonical,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Pairwise3,
    Evenweight5,
    Evenweight2m,
    Triple3,
    AncillaGeneral,
}

impl DemoName {
    pub const ALL: [DemoName; 5] = [
        DemoName::Pairwise3,
        DemoName::Evenweight5,
        DemoName::Evenweight2m,
        DemoName::Triple3,
        DemoName::AncillaGeneral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoName::Pairwise3 => "pairwise3",
            DemoName::Evenweight5 => "evenweight5",
            DemoName::Evenweight2m => "evenweight2m",
            DemoName::Triple3 => "triple3",
            DemoName::AncillaGeneral => "ancilla-general",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choi rank and minimal Kraus cardinality of a channel.
    Rank {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Also build the explicit Choi matrix (at most 6 qubits by default).
        #[arg(long)]
        explicit: bool,
    },
    /// Knill-Laflamme test, degeneracy and packing bound for a code.
    Check {
        /// repetition:N, ancilla:N, a JSON file path or inline JSON.
        #[arg(long)]
        code: String,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Correctability tolerance on the KL residual.
        #[arg(long)]
        tol: Option<f64>,
        /// Also run the complementary-channel and reference/environment tests.
        #[arg(long)]
        theorems: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Packing or Hamming bound, or the smallest length satisfying it.
    Bound {
        #[arg(value_enum)]
        kind: BoundKindArg,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Local dimension (hamming only).
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long)]
        min_n: bool,
    },
    /// Encode, apply noise, recover, and measure the worst infidelity.
    Simulate {
        #[arg(long)]
        code: String,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum, default_value_t = RecoveryArg::Auto)]
        recovery: RecoveryArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also sample error trajectories through the syndrome table.
        #[arg(long)]
        monte_carlo: bool,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
    },
    /// Run a worked example end to end.
    Demo {
        #[arg(value_enum, required_unless_present = "all")]
        name: Option<DemoName>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
    },
    /// Print a channel spec with every term explicit.
    Expand {
        #[command(flatten)]
        channel: ChannelArgs,
    },
}

/// A report and the verdict tags `--expect` can match.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub tags: BTreeSet<String>,
}

impl Outcome {
    pub fn new(report: Value) -> Self {
        Outcome {
            report,
            tags: BTreeSet::new(),
        }
    }

    pub fn tag(&mut self, t: impl Into<String>) {
        self.tags.insert(t.into());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<qecbound::Error> for CliError {
    fn from(e: qecbound::Error) -> Self {
        CliError {
            code: if e.is_guard() { EXIT_GUARD } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Rank { channel, explicit } => commands::rank(channel, *explicit),
        Command::Check {
            code,
            channel,
            tol,
            theorems,
            seed,
        } => commands::check(code, channel, *tol, *theorems, *seed),
        Command::Bound {
            kind,
            channel,
            k,
            q,
            min_n,
        } => commands::bound(*kind, channel, *k, *q, *min_n),
        Command::Simulate {
            code,
            channel,
            recovery,
            trials,
            seed,
            monte_carlo,
            shots,
        } => commands::simulate(code, channel, *recovery, *trials, *seed, monte_carlo.then_some(*shots)),
        Command::Demo {
            name,
            all,
            seed,
            trials,
            shots,
        } => {
            let cfg = demo::DemoConfig {
                seed: *seed,
                trials: *trials,
                shots: *shots,
            };
            match (name, all) {
                (Some(name), false) => demo::run(*name, &cfg),
                _ => demo::run_all(&cfg),
            }
        }
        Command::Expand { channel } => commands::expand(channel),
    }
}

pub fn format_outcome(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.report).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Text => render::text(&outcome.report),
    }
}

/// Runs the command, writes the report or the error, and returns the exit
/// code.
pub fn main_with(cli: &Cli, out: &mut impl std::io::Write, err: &mut impl std::io::Write) -> i32 {
    match run(cli) {
        Ok(outcome) => {
            let _ = out.write_all(format_outcome(&outcome, cli.format).as_bytes());
            let missing: Vec<&str> = cli
                .expect
                .iter()
                .filter(|t| !outcome.tags.contains(t.as_str()))
                .map(String::as_str)
                .collect();
            if missing.is_empty() {
                EXIT_OK
            } else {
                let have: Vec<&str> = outcome.tags.iter().map(String::as_str).collect();
                let _ = writeln!(
                    err,
                    "expectation not met: {} (report tags: {})",
                    missing.join(", "),
                    have.join(", ")
                );
                EXIT_EXPECTATION
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}
