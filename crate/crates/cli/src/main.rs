//! `keygraph`: run connectivity sweeps, threshold tables, oracle checks and
//! zero-one probes from the command line.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 configuration error,
//! 3 infeasible parameters, 4 no threshold.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{SweepOpts, ThresholdOpts, VerifyOpts, ZeroOneOpts};

#[derive(Parser)]
#[command(name = "keygraph", version, about = "Secure connectivity of random key graphs under unreliable links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical connectivity over a grid of ring sizes and channel values.
    Sweep {
        #[command(flatten)]
        opts: SweepOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Threshold ring size and the critical constant around it.
    Threshold {
        #[command(flatten)]
        opts: ThresholdOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Exact-arithmetic verification of the bounds and the enumerator.
    Verify {
        #[command(flatten)]
        opts: VerifyOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Connectivity along a scaling sequence with growing n.
    Zeroone {
        #[command(flatten)]
        opts: ZeroOneOpts,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
pub struct Common {
    /// Master seed; every trial stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "KEYGRAPH_THREADS")]
    threads: Option<usize>,
    /// Directory for report files; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat JSON config, or an earlier report or manifest to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Bad flags, unreadable or malformed config files, unwritable outputs.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Verification found a counterexample.
#[derive(Debug)]
pub struct VerifyFailed(pub usize);

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} check(s) failed", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use keygraph_core::Error as E;
    if err.is::<VerifyFailed>() {
        return 1;
    }
    match err.downcast_ref::<E>() {
        Some(E::InvalidArgument(_)) => 2,
        Some(E::NoThreshold { .. }) => 4,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Sweep { common, .. }
    | Command::Threshold { common, .. }
    | Command::Verify { common, .. }
    | Command::Zeroone { common, .. }) = &cli.command;
    if let Some(threads) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Sweep { opts, common } => commands::sweep(opts, common),
        Command::Threshold { opts, common } => commands::threshold(opts, common),
        Command::Verify { opts, common } => commands::verify(opts, common),
        Command::Zeroone { opts, common } => commands::zeroone(opts, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
