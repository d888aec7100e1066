//! Command-line front end for `hillcert-core`: builtin or file-backed
//! systems, certified stability reports, Mathieu sweeps, validation runs and
//! ξ tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Output;
pub use config::{Overrides, RunConfig, Settings};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hillcert", version, about = "Certified Floquet stability via truncated Hill matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Monodromy, multipliers, error bound and verdict as JSON
    Analyze(CommonArgs),
    /// Mathieu stability chart as CSV
    Sweep(CommonArgs),
    /// Actual error against the reference next to the bound, per N
    Validate(CommonArgs),
    /// Samples of a scalar factor and its polynomial bound
    Xi(CommonArgs),
    /// Duffing periodic solution by harmonic balance
    Duffing(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run manifest
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Truncation order
    #[arg(long = "N", value_name = "INT")]
    pub n: Option<u32>,
    /// Desired certified error; picks the truncation order
    #[arg(long, value_name = "FLOAT", conflicts_with = "n")]
    pub edes: Option<f64>,
    #[arg(long, value_parser = ["direct", "subharmonic"])]
    pub formulation: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "INT")]
    pub circle_samples: Option<usize>,
    #[arg(long, value_name = "INT")]
    pub axis_samples: Option<usize>,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Analyze(a)
            | Command::Sweep(a)
            | Command::Validate(a)
            | Command::Xi(a)
            | Command::Duffing(a) => a,
        }
    }

    pub fn settings(&self) -> CliResult<Settings> {
        let a = self.args();
        let overrides = Overrides {
            n: a.n,
            edes: a.edes,
            formulation: a.formulation.clone(),
            out: a.out.clone(),
            circle_samples: a.circle_samples,
            axis_samples: a.axis_samples,
        };
        Settings::load(a.config.as_deref(), overrides)
    }

    pub fn execute(&self, settings: &Settings) -> CliResult<Output> {
        match self {
            Command::Analyze(_) => commands::analyze(settings),
            Command::Sweep(_) => commands::sweep(settings),
            Command::Validate(_) => commands::validate(settings),
            Command::Xi(_) => commands::xi(settings),
            Command::Duffing(_) => commands::duffing(settings),
        }
    }
}

/// Runs one command, writing the body to the configured output and notes to
/// `err`.
pub fn run(command: &Command, stdout: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let settings = command.settings()?;
    let output = command.execute(&settings)?;
    match &settings.config.out {
        Some(path) => std::fs::write(path, &output.body)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => stdout
            .write_all(output.body.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}")))?,
    }
    for note in &output.notes {
        let _ = writeln!(err, "{note}");
    }
    Ok(())
}
