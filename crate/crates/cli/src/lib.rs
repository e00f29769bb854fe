//! Command line front end: loads run configurations, dispatches the subcommands and
//! writes their CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical error or failed check,
//! 3 I/O error.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::{Path, PathBuf};

use chemotaxis_core::config::RunConfig;
use clap::{Parser, Subcommand};

pub mod commands;
pub mod output;
pub mod sweep;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "CHEMOTAXIS_OUT";

#[derive(Debug, Parser)]
#[command(name = "chemotaxis", version, about = "Chemotaxis-consumption simulator with Robin oxygen exchange")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory (overrides $CHEMOTAXIS_OUT and the config file)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Suppress the summary printed on stdout
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Random seed for the trace-constant estimator (overrides the config file)
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the system and write the time series and snapshots
    Simulate { config: PathBuf },
    /// Solve for the stationary state with the configured mass
    Stationary { config: PathBuf },
    /// Run the invariant suite; exits 2 naming the first failing check
    Verify { config: PathBuf },
    /// Run a grid of (mass, g, gamma) points and tabulate convergence
    Sweep { spec: PathBuf },
    /// Estimate the trace-inequality constant on the configured mesh
    TraceConstant { config: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Check(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<chemotaxis_core::Error> for CliError {
    fn from(e: chemotaxis_core::Error) -> Self {
        match e {
            chemotaxis_core::Error::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Settings shared by every subcommand after flag/env resolution.
#[derive(Debug, Clone)]
pub struct Context {
    pub out_dir: PathBuf,
    pub quiet: bool,
    pub seed: u64,
}

impl Context {
    /// `--out` wins over `$CHEMOTAXIS_OUT`, which wins over `output.directory`.
    pub fn resolve(cli: &Cli, config: &RunConfig) -> Self {
        let out_dir = cli
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(&config.output.directory));
        Context { out_dir, quiet: cli.quiet, seed: cli.seed.unwrap_or(config.analysis.seed) }
    }

    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    pub fn prepare(&self) -> CliResult<&Path> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| io_err(&self.out_dir, e))?;
        Ok(&self.out_dir)
    }
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn load(path: &Path) -> CliResult<RunConfig> {
    Ok(RunConfig::parse(&read_text(path)?)?)
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load(config)?;
            commands::simulate(&cfg, &Context::resolve(cli, &cfg))
        }
        Command::Stationary { config } => {
            let cfg = load(config)?;
            commands::stationary(&cfg, &Context::resolve(cli, &cfg))
        }
        Command::Verify { config } => {
            let cfg = load(config)?;
            commands::verify(&cfg, &Context::resolve(cli, &cfg))
        }
        Command::TraceConstant { config } => {
            let cfg = load(config)?;
            commands::trace_constant(&cfg, &Context::resolve(cli, &cfg))
        }
        Command::Sweep { spec } => {
            let spec = sweep::SweepSpec::parse(&read_text(spec)?)?;
            let ctx = Context::resolve(cli, &spec.template);
            sweep::run(&spec, &ctx)
        }
    }
}
