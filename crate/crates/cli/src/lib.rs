//! Command-line front end for the `wswap` simulator.
//!
//! Each subcommand prints a short text summary. Machine-readable tables go
//! to `--out` (or to stdout when `--format` is given without `--out`);
//! `sweep` has no summary and always emits its table.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod circuit_run;
mod ideal;
mod sweep;
pub mod table;
mod verify;

use table::Table;

#[derive(Parser, Debug)]
#[command(name = "wswap", version, about = "W-state entanglement swapping simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Noiseless swap: outcome probabilities, corrected fidelities and the
    /// shared-state populations.
    Ideal(IdealArgs),
    /// Parameter sweep over damping, weak-measurement strength or gate noise.
    Sweep(SweepArgs),
    /// Compare the simulator with the closed forms on an (r, q) grid.
    Verify(VerifyArgs),
    /// Build and run one gate-level circuit.
    CircuitRun(CircuitRunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Amplitude damping alone, over `--r`.
    Damping,
    /// Damping followed by weak-measurement purification, over `--r` x `--q`.
    Purify,
    /// Imperfect CNOTs and readout, over `--y2` x `--eta`.
    GateNoise,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// File for the data table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Default)]
pub struct ShotArgs {
    /// Number of sampled shots; 0 means exact probabilities only.
    #[arg(long, default_value_t = 0)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Default)]
pub struct IdealArgs {
    #[command(flatten)]
    pub shots: ShotArgs,
    /// Write the gate-level circuit in text form.
    #[arg(long)]
    pub dump_circuit: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Comma-separated decay rates.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Comma-separated weak-measurement strengths.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Comma-separated CNOT success probabilities.
    #[arg(long, value_delimiter = ',')]
    pub y2: Vec<f64>,
    /// Comma-separated readout accuracies.
    #[arg(long, value_delimiter = ',')]
    pub eta: Vec<f64>,
    /// Spacing of the default grid on [0, 1] for axes not listed explicitly.
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[command(flatten)]
    pub shots: ShotArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Default)]
pub struct CircuitRunArgs {
    /// Run a circuit from a text file instead of the swap circuit.
    #[arg(long, conflicts_with_all = ["r", "q", "final_readout"])]
    pub circuit: Option<PathBuf>,
    /// Amplitude damping on the transmitted qubits.
    #[arg(long)]
    pub r: Option<f64>,
    /// Weak-measurement purification strength.
    #[arg(long)]
    pub q: Option<f64>,
    /// CNOT success probability (switches to the decomposed basis change).
    #[arg(long)]
    pub y2: Option<f64>,
    /// Readout accuracy.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Measure the shared qubits at the end.
    #[arg(long)]
    pub final_readout: bool,
    #[arg(long)]
    pub dump_circuit: Option<PathBuf>,
    #[command(flatten)]
    pub shots: ShotArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Bad flag values; maps to exit code 2 like clap's own errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Whether the command's own checks passed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

/// Exit code for an error returned by [`run`].
pub fn error_exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<UsageError>() {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<Status> {
    match cli.command {
        Command::Ideal(a) => ideal::run(&a, stdout),
        Command::Sweep(a) => sweep::run(&a, stdout),
        Command::Verify(a) => verify::run(&a, stdout, stderr),
        Command::CircuitRun(a) => circuit_run::run(&a, stdout),
    }
}

pub(crate) fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes the summary and/or table according to `--out` and `--format`.
pub(crate) fn emit(table: &Table, summary: &str, output: &OutputArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match (&output.out, output.format) {
        (Some(path), format) => {
            write_file(path, &render(table, format.unwrap_or(Format::Csv)))?;
            stdout.write_all(summary.as_bytes())?;
        }
        (None, Some(format)) => stdout.write_all(render(table, format).as_bytes())?,
        (None, None) => stdout.write_all(summary.as_bytes())?,
    }
    Ok(())
}

pub(crate) fn unit_value(name: &str, x: f64) -> anyhow::Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return usage(format!("--{name} must lie in [0, 1], got {x}"));
    }
    Ok(x)
}
