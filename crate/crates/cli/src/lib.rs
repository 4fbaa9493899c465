//! `oqw`: run the walk engines from a TOML configuration.
//!
//! ```text
//! oqw <simulate|analytic|classify|compare> --config <path>
//!     [--steps N] [--out <path>] [--format csv|json] [--tolerance X]
//! ```
//!
//! Exit status: 0 success, 1 invalid input, 2 engine error,
//! 3 compare-mode discrepancy above tolerance.

pub mod config;
pub mod output;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{
    load_config, parse_config, ConfigError, Engine, Format, Mode, RunConfig, Tolerances,
};
pub use run::{run, Comparison, Component, Report, RunError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_ENGINE: u8 = 2;
pub const EXIT_COMPARE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "oqw",
    version,
    about = "Open quantum walk simulator and closed-form evaluator"
)]
pub struct Cli {
    /// What to compute; falls back to `mode` in the config.
    #[arg(value_enum)]
    pub mode: Option<Mode>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Number of steps (overrides `steps`).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Output file (overrides `[output] path`); without one the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (overrides `[output] format`).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Compare-mode tolerance (overrides `[tolerances] compare`).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Run(RunError::MissingSteps(_)) => {
                EXIT_INVALID
            }
            CliError::Run(_) | CliError::Write { .. } => EXIT_ENGINE,
        }
    }
}

/// Apply command-line overrides to a loaded configuration.
pub fn resolve(cli: &Cli, mut cfg: RunConfig) -> Result<(Mode, RunConfig), CliError> {
    let mode = cli.mode.or(cfg.mode).ok_or_else(|| {
        CliError::Usage("no mode given on the command line or in the config".into())
    })?;
    if let Some(n) = cli.steps {
        cfg.steps = Some(n);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!(
                "--tolerance must be positive and finite, got {t}"
            )));
        }
        cfg.tolerances.compare = t;
    }
    cfg.mode = Some(mode);
    Ok((mode, cfg))
}

/// Run one invocation and return its exit status.
///
/// With an output file the table goes there and the summary to `stdout`;
/// otherwise the table goes to `stdout` and the summary to `stderr`.
pub fn execute(cli: &Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> u8 {
    match try_execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(
    cli: &Cli,
    stdout: &mut impl Write,
    stderr: &mut impl Write,
) -> Result<u8, CliError> {
    let cfg = load_config(&cli.config)?;
    let (mode, cfg) = resolve(cli, cfg)?;
    let report = run(&cfg, mode)?;
    let table = output::render(&report, cfg.format);
    let mut summary = output::summary(&report);

    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &table).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            summary.push_str(&format!("output: {}\n", path.display()));
            let _ = stdout.write_all(summary.as_bytes());
        }
        None => {
            let _ = stdout.write_all(table.as_bytes());
            let _ = stderr.write_all(summary.as_bytes());
        }
    }

    Ok(match &report.comparison {
        Some(c) if !c.passed() => EXIT_COMPARE,
        _ => EXIT_OK,
    })
}
