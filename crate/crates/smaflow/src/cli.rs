//! The `smaflow` command line.
//!
//! Exit codes: 0 on success, 1 for configuration, IO or numerical failures,
//! 2 for usage errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use smaflow_core::diagnostics::Quadrature;

use crate::commands::{self, AuditSummary};
use crate::config::load_config;
use crate::{Error, Result};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (snapshot format SMAFLOW1, timeseries format 1)"
);

/// Pseudo-spectral simulator for smectic-A liquid crystal flow on the periodic square.
#[derive(Debug, Parser)]
#[command(name = "smaflow", version = VERSION)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write diagnostics and snapshots.
    Simulate { config: PathBuf },
    /// Relax the initial layer field to a stationary state.
    Steady { config: PathBuf },
    /// Check the discrete energy law on a recorded time series.
    EnergyAudit {
        timeseries: PathBuf,
        #[arg(long, value_enum, default_value_t = QuadratureArg::Left)]
        quadrature: QuadratureArg,
    },
    /// Fit an algebraic or exponential decay rate to one column.
    FitRate {
        timeseries: PathBuf,
        #[arg(long)]
        column: String,
        /// `t0,t1`; defaults to the tail above the noise floor.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// Solve from several random fields and compare the stationary states.
    ProbeUniqueness {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        seeds: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuadratureArg {
    Left,
    Trapezoid,
}

impl From<QuadratureArg> for Quadrature {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::Left => Quadrature::Left,
            QuadratureArg::Trapezoid => Quadrature::Trapezoid,
        }
    }
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `t0,t1`")?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("window start {a} must precede its end {b}"))
    }
}

/// Sizes the worker pool from `SMAFLOW_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("SMAFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::invalid("SMAFLOW_THREADS", format!("expected a positive integer, got `{value}`")))?;
    // A pool built earlier in the process wins; that is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    // A closed pipe (`| head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn execute(command: Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::Simulate { config } => print_json(&commands::simulate(&load_config(&config)?)?),
        Command::Steady { config } => {
            let summary = commands::steady(&load_config(&config)?)?;
            let path = summary.snapshot.with_file_name("steady.json");
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            print_json(&summary);
        }
        Command::EnergyAudit { timeseries, quadrature } => print_json(&AuditSummary::from(&commands::audit_file(
            &timeseries,
            quadrature.into(),
        )?)),
        Command::FitRate {
            timeseries,
            column,
            window,
        } => print_json(&commands::fit_file(&timeseries, &column, window)?),
        Command::ProbeUniqueness { config, seeds } => {
            print_json(&commands::probe_uniqueness(&load_config(&config)?, seeds)?)
        }
    }
    Ok(())
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
