//! Run configuration: a JSON document with documented defaults.
//!
//! Relative paths are resolved against the directory holding the config
//! file, so the resolved form written next to the outputs reloads to the
//! same configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smaflow_core::equilibrium::SteadyConfig;
use smaflow_core::{DealiasRule, Params, Scheme, StepConfig};

use crate::{Error, Result};

/// How a field is initialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    // Braces make serde reject stray keys, which it ignores on unit variants.
    Zero {},
    /// Velocity only: `A (sin 2πx₁ cos 2πx₂, −cos 2πx₁ sin 2πx₂)`.
    TaylorGreen {
        amplitude: f64,
    },
    /// Seeded Fourier data on `1 <= |m| <= max_mode`, scaled to a peak of `amplitude`.
    RandomBand {
        max_mode: usize,
        amplitude: f64,
        seed: u64,
    },
    /// The matching field of a saved snapshot.
    FromSnapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    #[serde(default)]
    pub v: InitSpec,
    #[serde(default)]
    pub phi: InitSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Zero {}
    }
}

/// Settings of the stationary solver and the uniqueness probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySettings {
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::pseudo_dt")]
    pub dt0: f64,
    #[serde(default = "defaults::max_iters")]
    pub max_iters: usize,
    /// Prescribed mean of `φ`; the initial field's mean when absent.
    #[serde(default)]
    pub mean: Option<f64>,
    /// First seed of a uniqueness probe; probe `i` uses `seed + i`.
    #[serde(default)]
    pub seed: u64,
}

impl Default for SteadySettings {
    fn default() -> Self {
        Self {
            tol: defaults::tol(),
            dt0: defaults::pseudo_dt(),
            max_iters: defaults::max_iters(),
            mean: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Grid points per axis.
    pub n: usize,
    #[serde(default)]
    pub mu1: f64,
    #[serde(default = "defaults::one")]
    pub mu4: f64,
    #[serde(default)]
    pub mu5: f64,
    #[serde(rename = "K", default = "defaults::one")]
    pub k: f64,
    #[serde(default = "defaults::one")]
    pub lambda: f64,
    #[serde(default = "defaults::one")]
    pub epsilon: f64,
    #[serde(default)]
    pub dealias: DealiasRule,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "defaults::one")]
    pub t_end: f64,
    #[serde(default = "defaults::snapshot_every")]
    pub snapshot_every: u64,
    #[serde(default = "defaults::diag_every")]
    pub diag_every: u64,
    #[serde(default)]
    pub initial: InitialConditions,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "defaults::formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub steady: SteadySettings,
}

mod defaults {
    use std::path::PathBuf;

    use super::Format;

    pub fn one() -> f64 {
        1.0
    }
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn snapshot_every() -> u64 {
        1000
    }
    pub fn diag_every() -> u64 {
        1
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn formats() -> Vec<Format> {
        vec![Format::Csv]
    }
    pub fn tol() -> f64 {
        1e-10
    }
    pub fn pseudo_dt() -> f64 {
        1e-3
    }
    pub fn max_iters() -> usize {
        20_000
    }
}

/// Name of the resolved configuration written into the output directory.
pub const RESOLVED_NAME: &str = "config.resolved.json";

impl RunConfig {
    /// Parses JSON text; relative paths are resolved against `base`.
    pub fn from_json(text: &str, origin: &Path, base: &Path) -> Result<Self> {
        let mut config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        for spec in [&mut self.initial.v, &mut self.initial.phi] {
            if let InitSpec::FromSnapshot { path } = spec {
                join(path);
            }
        }
    }

    pub fn params(&self) -> Result<Params> {
        let p = Params::new(self.mu1, self.mu4, self.mu5, self.k, self.lambda, self.epsilon).map_err(field_error)?;
        Ok(p.with_dealias(self.dealias))
    }

    pub fn step_config(&self) -> Result<StepConfig> {
        let c = StepConfig {
            dt: self.dt,
            scheme: self.scheme,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
            diag_every: self.diag_every,
        };
        c.validate().map_err(field_error)?;
        Ok(c)
    }

    pub fn steady_config(&self) -> Result<SteadyConfig> {
        let s = &self.steady;
        let c = SteadyConfig {
            tol: s.tol,
            dt0: s.dt0,
            max_iters: s.max_iters,
            mean: s.mean,
        };
        c.validate().map_err(|e| match field_error(e) {
            Error::Invalid { field, reason } => Error::invalid(format!("steady.{field}"), reason),
            other => other,
        })?;
        Ok(c)
    }

    /// Checks every constraint that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        smaflow_core::Grid::new(self.n).map_err(|e| Error::invalid("n", e.to_string()))?;
        self.params()?;
        self.step_config()?;
        self.steady_config()?;
        self.validate_init("initial.v", &self.initial.v, true)?;
        self.validate_init("initial.phi", &self.initial.phi, false)?;
        if self.formats.is_empty() {
            return Err(Error::invalid("formats", "at least one output format is required"));
        }
        Ok(())
    }

    fn validate_init(&self, field: &str, spec: &InitSpec, velocity: bool) -> Result<()> {
        match spec {
            InitSpec::Zero {} => {}
            InitSpec::TaylorGreen { amplitude } => {
                if !velocity {
                    return Err(Error::invalid(field, "taylor_green applies to the velocity only"));
                }
                check_amplitude(field, *amplitude)?;
            }
            InitSpec::RandomBand {
                max_mode, amplitude, ..
            } => {
                check_amplitude(field, *amplitude)?;
                if *max_mode == 0 || *max_mode >= self.n / 2 {
                    return Err(Error::invalid(
                        format!("{field}.max_mode"),
                        format!("must lie in [1, {}], got {max_mode}", self.n / 2 - 1),
                    ));
                }
            }
            InitSpec::FromSnapshot { path } => {
                if !path.is_file() {
                    return Err(Error::invalid(
                        format!("{field}.path"),
                        format!("{} does not exist", path.display()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON of the configuration with every default spelled out.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    /// Writes the resolved configuration into `dir` and returns its path.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(RESOLVED_NAME);
        fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn check_amplitude(field: &str, amplitude: f64) -> Result<()> {
    if amplitude.is_finite() && amplitude >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            format!("{field}.amplitude"),
            format!("must be finite and >= 0, got {amplitude}"),
        ))
    }
}

fn field_error(e: smaflow_core::Error) -> Error {
    match e {
        smaflow_core::Error::Param { name, reason } => Error::invalid(name, reason),
        other => Error::Core(other),
    }
}

/// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        base
    };
    let base = fs::canonicalize(&base).map_err(|e| Error::io(&base, e))?;
    RunConfig::from_json(&text, path, &base)
}
