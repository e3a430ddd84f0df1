//! Command-line front end: TOML experiment configs in, CSV/JSON reports out.
//!
//! | command    | config `run.kind`     | default format | output                                    |
//! |------------|-----------------------|----------------|-------------------------------------------|
//! | `analyze`  | `h2` / `analytic`     | json           | numerical vs closed-form squared H2 norm  |
//! | `table1`   | (none, fixed setup)   | csv            | 6 × 4 case-study table with deviations    |
//! | `sweep`    | `sweep`               | csv            | one row per grid point and controller     |
//! | `simulate` | `simulate`            | json           | Monte Carlo estimate; trace CSV to `--out` |
//!
//! `simulate --out trace.csv` writes the trace there and the estimate next
//! to it as `trace.estimate.json` (or `.csv`). Without `--out` everything
//! goes to stdout and no trace is produced.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use commands::{
    cmd_analyze, cmd_simulate, cmd_sweep, cmd_table1, table1_controllers, table1_setup,
    AnalyzeReport, CsvTable, SimulateReport, SweepReport, Table1, TABLE1_PUBLISHED, TABLE1_SQRT_PI,
};
pub use config::{ExperimentConfig, RunConfig, SimulateConfig};

use crate::error::{Error, Result};
use format::{write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "freqh2",
    version,
    about = "H2 performance of secondary frequency controllers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed for simulations (overrides `run.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Numerical squared H2 norm, with the closed form when applicable.
    Analyze,
    /// Reproduce the five-bus case-study table.
    Table1,
    /// Evaluate the norm over a grid of n, gamma or alpha.
    Sweep,
    /// Monte Carlo estimate of the stationary output variance.
    Simulate,
}

fn load(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(ExperimentConfig::load).transpose()
}

fn emit<T: Serialize>(
    out: Option<&Path>,
    format: Format,
    value: &T,
    table: impl FnOnce() -> CsvTable,
) -> Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Json => write_json(&mut sink, value)?,
        Format::Csv => {
            let t = table();
            write_csv(&mut sink, &t.header, &t.rows)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// `trace.csv` → `trace.estimate.json`.
pub fn estimate_path(trace: &Path, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "estimate.csv",
        Format::Json => "estimate.json",
    };
    trace.with_extension(ext)
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> Result<()> {
    let config = load(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Analyze => {
            let config = config.unwrap_or_default();
            let report = cmd_analyze(&config)?;
            emit(out, cli.format.unwrap_or(Format::Json), &report, || {
                report.to_csv()
            })
        }
        Command::Table1 => {
            let table = cmd_table1()?;
            if let Some(note) = table.topology_note() {
                eprintln!("note: {note}");
            }
            emit(out, cli.format.unwrap_or(Format::Csv), &table, || {
                table.to_csv()
            })
        }
        Command::Sweep => {
            let config = config.ok_or_else(|| {
                Error::Config("sweep needs --config with a [run] sweep table".into())
            })?;
            let report = cmd_sweep(&config)?;
            emit(out, cli.format.unwrap_or(Format::Csv), &report, || {
                report.to_csv()
            })
        }
        Command::Simulate => {
            let config = config.unwrap_or_else(|| ExperimentConfig {
                run: RunConfig::Simulate(SimulateConfig::default()),
                ..ExperimentConfig::default()
            });
            let format = cli.format.unwrap_or(Format::Json);
            let (report, trace) = cmd_simulate(&config, cli.seed, out.is_some())?;
            match (out, trace) {
                (Some(path), Some(trace)) => {
                    let mut w = BufWriter::new(File::create(path)?);
                    write_csv(&mut w, &trace.header, &trace.rows)?;
                    w.flush()?;
                    emit(Some(&estimate_path(path, format)), format, &report, || {
                        report.to_csv()
                    })
                }
                _ => emit(None, format, &report, || report.to_csv()),
            }
        }
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "freqh2", "simulate", "--seed", "9", "--format", "csv", "--out", "x.csv",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::Simulate);
        assert_eq!(cli.seed, Some(9));
        assert_eq!(cli.format, Some(Format::Csv));
        assert_eq!(
            estimate_path(cli.out.as_deref().unwrap(), Format::Json),
            PathBuf::from("x.estimate.json")
        );
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(main_with_args(["freqh2", "bogus"]), 1);
        assert_eq!(main_with_args(["freqh2", "analyze", "--format", "xml"]), 1);
        assert_eq!(main_with_args(["freqh2", "--help"]), 0);
    }

    #[test]
    fn missing_config_file_is_a_validation_error() {
        assert_eq!(
            main_with_args(["freqh2", "analyze", "--config", "/nonexistent/x.toml"]),
            1
        );
        assert_eq!(main_with_args(["freqh2", "sweep"]), 1);
    }
}
