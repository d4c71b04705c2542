//! The operations behind each subcommand, usable without the CLI.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use smaflow_core::diagnostics::{energy_audit, fit_decay_rate, tail_window, EnergyAudit, Quadrature, NOISE_FLOOR};
use smaflow_core::equilibrium::{
    layer_energy, probe_initial_field, steady_solve, uniqueness_report, SteadySolution, UniquenessReport,
};
use smaflow_core::init::{random_band_scalar, random_band_velocity, taylor_green};
use smaflow_core::integrator::{run, Trajectory};
use smaflow_core::{make_grid, DiagnosticsRecord, Field, RateFit, State, VectorField};

use crate::config::{InitSpec, RunConfig};
use crate::snapshot::{load_snapshot, save_snapshot};
use crate::timeseries::{file_name, read_csv, write_timeseries};
use crate::{Error, Result};

fn init_error(field: &str, e: smaflow_core::Error) -> Error {
    Error::invalid(field, e.to_string())
}

/// Builds the initial state described by the configuration. The velocity is
/// shifted to zero mean; the mean of `φ` is kept.
pub fn initial_state(cfg: &RunConfig) -> Result<State> {
    let grid = make_grid(cfg.n)?;
    let mut t0 = 0.0_f64;
    let mut from_snapshot = |path: &Path, field: &str| -> Result<State> {
        let s = load_snapshot(path)?;
        if s.grid().n() != cfg.n {
            return Err(Error::invalid(
                format!("{field}.path"),
                format!("snapshot grid is {}, config asks for {}", s.grid().n(), cfg.n),
            ));
        }
        t0 = t0.max(s.t);
        Ok(s)
    };
    let v = match &cfg.initial.v {
        InitSpec::Zero {} => VectorField::zeros(&grid),
        InitSpec::TaylorGreen { amplitude } => taylor_green(&grid, *amplitude),
        InitSpec::RandomBand {
            max_mode,
            amplitude,
            seed,
        } => random_band_velocity(&grid, *max_mode, *amplitude, *seed).map_err(|e| init_error("initial.v", e))?,
        InitSpec::FromSnapshot { path } => from_snapshot(path, "initial.v")?.v,
    };
    let phi = match &cfg.initial.phi {
        InitSpec::Zero {} => Field::zeros(&grid),
        InitSpec::TaylorGreen { .. } => {
            return Err(Error::invalid(
                "initial.phi",
                "taylor_green applies to the velocity only",
            ))
        }
        InitSpec::RandomBand {
            max_mode,
            amplitude,
            seed,
        } => random_band_scalar(&grid, *max_mode, *amplitude, *seed).map_err(|e| init_error("initial.phi", e))?,
        InitSpec::FromSnapshot { path } => from_snapshot(path, "initial.phi")?.phi,
    };
    // Round-off means are left alone so a resumed run stays bit-exact.
    let [m1, m2] = v.mean();
    let scale = v[0]
        .physical()
        .iter()
        .chain(v[1].physical())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let v = if m1.abs().max(m2.abs()) > 1e-13 * scale {
        VectorField::new(v[0].shift(-m1), v[1].shift(-m2))
    } else {
        v
    };
    Ok(State::new(v, phi, t0)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Snapshot file name for a step index.
pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:08}.smf")
}

pub const FINAL_SNAPSHOT: &str = "final.smf";

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub output_dir: PathBuf,
    pub steps: u64,
    pub final_t: f64,
    pub records: usize,
    pub snapshots: usize,
    pub final_energy: f64,
}

fn write_outputs(cfg: &RunConfig, traj: &Trajectory) -> Result<()> {
    let dir = &cfg.output_dir;
    for &format in &cfg.formats {
        write_timeseries(&traj.records, &dir.join(file_name(format)), format)?;
    }
    for (step, state) in &traj.snapshots {
        save_snapshot(state, &dir.join(snapshot_name(*step)))?;
    }
    save_snapshot(&traj.final_state, &dir.join(FINAL_SNAPSHOT))
}

/// Runs the configured simulation and writes the resolved config, the time
/// series, periodic snapshots and the final state into the output
/// directory. A blow-up still writes everything recorded before it.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationSummary> {
    let params = cfg.params()?;
    let step = cfg.step_config()?;
    let s0 = initial_state(cfg)?;
    create_dir(&cfg.output_dir)?;
    cfg.write_resolved(&cfg.output_dir)?;
    let traj = match run(&s0, &params, &step) {
        Ok(traj) => traj,
        Err(failure) => {
            write_outputs(cfg, &failure.partial)?;
            return Err(failure.error.into());
        }
    };
    write_outputs(cfg, &traj)?;
    let dt = step.dt;
    Ok(SimulationSummary {
        output_dir: cfg.output_dir.clone(),
        steps: ((traj.final_state.t - s0.t) / dt).round() as u64,
        final_t: traj.final_state.t,
        records: traj.records.len(),
        snapshots: traj.snapshots.len(),
        final_energy: traj.records.last().map_or(f64::NAN, |r| r.energy),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadySummary {
    pub snapshot: PathBuf,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    pub mean: f64,
    pub residual_history: Vec<f64>,
}

pub const STEADY_SNAPSHOT: &str = "steady.smf";

/// Solves for the stationary layer field from the configured initial `φ`
/// and stores it (with `v = 0`) as a snapshot.
pub fn steady(cfg: &RunConfig) -> Result<SteadySummary> {
    let params = cfg.params()?;
    let c = cfg.steady_config()?;
    let s0 = initial_state(cfg)?;
    let SteadySolution {
        phi,
        residual_history,
        iterations,
        ..
    } = steady_solve(&s0.phi, &params, &c)?;
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join(STEADY_SNAPSHOT);
    let state = State::new(VectorField::zeros(phi.grid()), phi, 0.0)?;
    save_snapshot(&state, &path)?;
    Ok(SteadySummary {
        snapshot: path,
        iterations,
        residual: *residual_history.last().unwrap_or(&0.0),
        energy: layer_energy(&state.phi, &params),
        mean: state.phi.mean(),
        residual_history,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    pub epsilon: f64,
    pub threshold: f64,
    pub uniqueness_guaranteed: bool,
    pub complete: bool,
    pub max_distance: f64,
    pub outcomes: Vec<ProbeRow>,
    pub distances: Vec<(u64, u64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub seed: u64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
}

impl ProbeSummary {
    fn new(report: UniquenessReport) -> Self {
        let seed_of = |i: usize| report.outcomes[i].seed;
        Self {
            epsilon: report.epsilon,
            threshold: report.threshold,
            uniqueness_guaranteed: report.uniqueness_guaranteed,
            complete: report.complete,
            max_distance: report.max_distance,
            distances: report
                .distances
                .iter()
                .map(|&(i, j, d)| (seed_of(i), seed_of(j), d))
                .collect(),
            outcomes: report
                .outcomes
                .iter()
                .map(|o| ProbeRow {
                    seed: o.seed,
                    converged: o.converged,
                    residual: o.residual,
                    iterations: o.iterations,
                    energy: o.energy,
                })
                .collect(),
        }
    }
}

/// Stationary solves from `count` random fields (seeds `steady.seed + i`),
/// run in parallel, compared pairwise.
pub fn probe_uniqueness(cfg: &RunConfig, count: usize) -> Result<ProbeSummary> {
    if count < 2 {
        return Err(
            smaflow_core::Error::Precondition(format!("uniqueness probe needs at least 2 seeds, got {count}")).into(),
        );
    }
    let params = cfg.params()?;
    let mut c = cfg.steady_config()?;
    let mean = c.mean.unwrap_or(0.0);
    c.mean = Some(mean);
    let grid = make_grid(cfg.n)?;
    let seeds: Vec<u64> = (0..count as u64).map(|i| cfg.steady.seed + i).collect();
    let results = seeds
        .par_iter()
        .map(|&seed| {
            let phi0 = probe_initial_field(&grid, seed, mean)?;
            steady_solve(&phi0, &params, &c)
        })
        .collect();
    Ok(ProbeSummary::new(uniqueness_report(&params, &seeds, results)))
}

pub fn read_records(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    Ok(read_csv(path)?.into_iter().map(DiagnosticsRecord::from).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub dt: f64,
    pub residuals: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
}

impl From<&EnergyAudit> for AuditSummary {
    fn from(a: &EnergyAudit) -> Self {
        Self {
            dt: a.dt,
            residuals: a.residuals.len(),
            max_abs: a.max_abs,
            mean_abs: a.mean_abs,
        }
    }
}

pub fn audit_file(path: &Path, quadrature: Quadrature) -> Result<EnergyAudit> {
    Ok(energy_audit(&read_records(path)?, quadrature)?)
}

/// Decay fit of one column; without a window the tail above the noise floor
/// is used.
pub fn fit_file(path: &Path, column: &str, window: Option<(f64, f64)>) -> Result<RateFit> {
    let rows = read_csv(path)?;
    if rows.first().is_some_and(|r| r.get(column).is_none()) || !crate::timeseries::COLUMNS.contains(&column) {
        return Err(Error::invalid("column", format!("unknown column `{column}`")));
    }
    let series: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.t, r.get(column).expect("known column")))
        .collect();
    let window = match window {
        Some(w) => w,
        None => tail_window(&series, NOISE_FLOOR).ok_or_else(|| {
            smaflow_core::Error::Series(format!(
                "column `{column}` has no tail of 10 points above {NOISE_FLOOR:e}"
            ))
        })?,
    };
    Ok(fit_decay_rate(&series, window)?)
}
