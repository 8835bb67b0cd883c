//! `hel`: command-line laboratory for hard-edge ensembles.
//!
//! Subcommands: `sample` (exact ensemble draws), `evolve` (SDE
//! trajectories), `correlate` (binned correlation estimates with exact
//! kernel overlays), `verify` (diagnostic suites). Every run writes a
//! manifest with the fully resolved configuration beside its outputs, and
//! identical manifests reproduce identical bytes, independent of the
//! worker count.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hel", version, about = "hard-edge ensemble laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw exact finite-N ensemble configurations
    Sample(commands::sample::SampleArgs),
    /// Integrate the interacting-particle SDE from exact draws
    Evolve(commands::evolve::EvolveArgs),
    /// Estimate binned correlations from saved draws, with kernel overlays
    Correlate(commands::correlate::CorrelateArgs),
    /// Run a named diagnostic suite and emit verdict reports
    Verify(commands::verify::VerifyArgs),
}

/// Exit codes: 0 success, 1 runtime failure, 2 bad flags or configuration,
/// 3 integrator blowup.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Blowup(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
            CliError::Blowup(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) | CliError::Blowup(m) => write!(f, "{m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("serialization error: {e}"))
    }
}

/// Runtime-stage core errors; blowups keep their dedicated exit code.
pub fn runtime_err(e: hel_core::Error) -> CliError {
    match e {
        hel_core::Error::Blowup { time, telemetry } => {
            CliError::Blowup(format!("integrator blowup at t = {time}: {telemetry}"))
        }
        other => CliError::Runtime(other.to_string()),
    }
}

/// Default worker count: HEL_WORKERS, else 1.
pub fn default_workers() -> usize {
    std::env::var("HEL_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or(1)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => commands::sample::run(args),
        Command::Evolve(args) => commands::evolve::run(args),
        Command::Correlate(args) => commands::correlate::run(args),
        Command::Verify(args) => commands::verify::run(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
