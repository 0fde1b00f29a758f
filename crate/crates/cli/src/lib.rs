//! Command-line front end: JSON channel documents in, JSON reports out.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical or structural failure.

pub mod commands;
pub mod document;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ncpqec::DEFAULT_TOL;

pub use commands::Outcome;
pub use document::{AnalysisDocument, ChannelDocument, CodeDocument, Representation};
pub use error::CliError;

use commands::OutputStyle;

#[derive(Debug, Parser)]
#[command(name = "ncpqec", version, about = "Reversibility analysis for Hermiticity-preserving quantum maps")]
pub struct Cli {
    /// Numerical tolerance. Overrides QEC_TOL.
    #[arg(long, global = true, env = "QEC_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Emit JSON instead of text (reproduce-paper; other commands always emit JSON).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a channel document to another representation.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Representation,
    },
    /// Report CP/NCP, signature, trace and Hermiticity preservation.
    Classify { input: PathBuf },
    /// Analyze error correction of a channel on a code space.
    Qec {
        channel: PathBuf,
        #[arg(long)]
        code: PathBuf,
    },
    /// Find the pseudounitary connecting two decompositions of the same map.
    Equiv { first: PathBuf, second: PathBuf },
    /// Run the three-qubit bit-flip example with c1 = (1 - c0)/3.
    ReproducePaper {
        #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
        c0: f64,
    },
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::input(format!("tolerance must be positive and finite, got {}", cli.tol)));
    }
    let style = OutputStyle { pretty: cli.pretty };
    let tol = cli.tol;
    match &cli.command {
        Command::Convert { input, to } => commands::convert(input, *to, tol, style),
        Command::Classify { input } => commands::classify_channel(input, tol, style),
        Command::Qec { channel, code } => commands::qec(channel, code, tol, style),
        Command::Equiv { first, second } => commands::equiv(first, second, tol, style),
        Command::ReproducePaper { c0 } => commands::reproduce_paper(*c0, tol, cli.json, style),
    }
}
