//! Command-line front end: configuration, the four commands, and report
//! files.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{Grid, RunConfig, DEFAULT_OUT, OUT_ENV};
use crate::output::OutDir;

#[derive(Debug, Error)]
pub enum CliError {
    /// Anything wrong with the input: exit status 2.
    #[error("{0}")]
    Config(String),
    /// A failure of the computation itself.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// The TOML error already names the line, column and key.
    pub fn parse(file: &str, e: toml::de::Error) -> Self {
        CliError::Config(format!("{file}: {e}"))
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Config(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<bundlelab::Error> for CliError {
    fn from(e: bundlelab::Error) -> Self {
        match e {
            bundlelab::Error::Internal(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bundlelab", version, about = "Moduli of convexity, duality and module-norm checks on Banach bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate modulus-of-convexity curves for a norm or a bundle.
    Modulus(Common),
    /// Run theorem suites and write their reports.
    Suite {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite names, or `all`; overrides the config.
        #[arg(long)]
        suites: Option<String>,
    },
    /// Check the duality isometries and the reflexivity diagram.
    DualCheck(Common),
    /// Decide whether a module norm is induced by a bundle.
    Criterion(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the environment and the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Epsilon grid as `a:b:step`; overrides the config.
    #[arg(long, value_name = "a:b:step")]
    pub grid: Option<String>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Modulus(_) => "modulus",
            Command::Suite { .. } => "suite",
            Command::DualCheck(_) => "dual-check",
            Command::Criterion(_) => "criterion",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Modulus(c) | Command::DualCheck(c) | Command::Criterion(c) => c,
            Command::Suite { common, .. } => common,
        }
    }
}

/// A finished run.
#[derive(Debug)]
pub struct Run {
    pub code: i32,
    pub out_dir: PathBuf,
    pub lines: Vec<String>,
}

/// Loads the config and applies the command-line overrides.
pub fn resolve_config(command: &Command) -> Result<(RunConfig, PathBuf), CliError> {
    let common = command.common();
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match config.command.as_deref() {
        Some(c) if c != command.name() => {
            return Err(CliError::config(format!(
                "config is for command {c:?}, not {:?}",
                command.name()
            )))
        }
        _ => config.command = Some(command.name().into()),
    }
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    if let Some(g) = &common.grid {
        config.grid = Some(Grid::Range(g.clone()));
    }
    let out = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((config.canonical()?, out))
}

pub fn execute(command: &Command) -> Result<Run, CliError> {
    let (config, out_dir) = resolve_config(command)?;
    let digest = config.digest()?;
    let mut out = OutDir::create(&out_dir)?;
    out.write("run_config.toml", &config.to_toml()?)?;
    let outcome = match command {
        Command::Modulus(_) => commands::modulus(&config, &mut out)?,
        Command::Suite { suites, .. } => commands::suite(&config, suites.as_deref(), &mut out)?,
        Command::DualCheck(_) => commands::dual_check(&config, &mut out)?,
        Command::Criterion(_) => commands::criterion(&config, &mut out)?,
    };
    let timestamp = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
    let mut summary = output::summary(
        &timestamp,
        command.name(),
        &digest,
        config.seed(),
        &outcome.reports,
        outcome.code == 0,
    );
    if outcome.reports.is_empty() {
        summary.push('\n');
        for l in &outcome.lines {
            summary.push_str(&format!("- {l}\n"));
        }
    }
    out.write("summary.md", &summary)?;
    Ok(Run {
        code: outcome.code,
        out_dir,
        lines: outcome.lines,
    })
}

/// Parses the arguments, runs, prints, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(run) => {
            for l in &run.lines {
                println!("{l}");
            }
            println!("wrote {}", run.out_dir.display());
            run.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
