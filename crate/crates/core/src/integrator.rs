//! IMEX time stepping: stiff linear terms (`(μ₄/2)Δv`, `−λKΔ²φ`) implicit,
//! everything else explicit, all in spectral space.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::str::FromStr;

use num_complex::Complex64;

use crate::diagnostics::{default_alpha, DiagnosticsRecord};
use crate::model::{Params, State, Terms};
use crate::spectral::{l2_norm, leray_project, vector_l2_norm, Field, Grid, VectorField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    /// Backward Euler on the stiff part, forward Euler on the rest.
    #[default]
    Imex1,
    /// Crank–Nicolson on the stiff part, Adams–Bashforth extrapolation
    /// (3/2, −1/2) on the rest.
    Imex2,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Imex1 => "imex1",
            Scheme::Imex2 => "imex2",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex1" => Ok(Scheme::Imex1),
            "imex2" => Ok(Scheme::Imex2),
            other => Err(Error::Config(alloc::format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub snapshot_every: u64,
    pub diag_every: u64,
}

impl StepConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let config = Self {
            dt,
            scheme: Scheme::Imex1,
            t_end,
            snapshot_every: 1000,
            diag_every: 1,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", alloc::format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param(
                "t_end",
                alloc::format!("must be >= 0, got {}", self.t_end),
            ));
        }
        if self.snapshot_every == 0 {
            return Err(Error::param("snapshot_every", "must be >= 1"));
        }
        if self.diag_every == 0 {
            return Err(Error::param("diag_every", "must be >= 1"));
        }
        Ok(())
    }

    /// Steps needed to go from `t0` to at least `t_end`.
    pub fn steps_from(&self, t0: f64) -> u64 {
        let remaining = (self.t_end - t0) / self.dt;
        if remaining <= 0.0 {
            0
        } else {
            libm::ceil(remaining - 1e-9) as u64
        }
    }
}

/// Explicit right-hand sides: `N_v` (already Leray-projected) and `N_φ`.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub velocity: VectorField,
    pub layer: Field,
}

/// `N_v = P(−(v·∇)v + ∇·σ̃ᵈ − Q d)`, `N_φ = −v·∇φ + λ∇·f(d)`.
pub fn explicit_tendency(s: &State, p: &Params) -> Tendency {
    tendency_from_terms(s, &Terms::new(s, p), p)
}

fn tendency_from_terms(s: &State, terms: &Terms, p: &Params) -> Tendency {
    let velocity = leray_project(&terms.momentum_forcing(&s.v, p));
    let layer = terms.layer_forcing(&s.v, p);
    Tendency { velocity, layer }
}

/// Spectral coefficient arrays of a tendency with the zero modes cleared:
/// both conserved means are held fixed exactly.
#[derive(Clone)]
struct Rhs {
    v: [Vec<Complex64>; 2],
    phi: Vec<Complex64>,
}

impl Rhs {
    fn from_tendency(t: &Tendency) -> Self {
        let mut v = [t.velocity[0].spectral().to_vec(), t.velocity[1].spectral().to_vec()];
        let mut phi = t.layer.spectral().to_vec();
        for c in v.iter_mut() {
            c[0] = Complex64::new(0.0, 0.0);
        }
        phi[0] = Complex64::new(0.0, 0.0);
        Self { v, phi }
    }

    fn combine(a: &Rhs, wa: f64, b: &Rhs, wb: f64) -> Rhs {
        let mix = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| p * wa + q * wb).collect();
        Rhs {
            v: [mix(&a.v[0], &b.v[0]), mix(&a.v[1], &b.v[1])],
            phi: mix(&a.phi, &b.phi),
        }
    }
}

/// Implicit weight: `theta = 1` backward Euler, `theta = 1/2` Crank–Nicolson.
fn implicit_update(s: &State, rhs: &Rhs, p: &Params, dt: f64, theta: f64) -> State {
    let grid: &Arc<Grid> = s.grid();
    let n = grid.n();
    let visc = 0.5 * p.mu4();
    let relax = p.lambda() * p.k();
    let v_hat = [s.v[0].spectral(), s.v[1].spectral()];
    let phi_hat = s.phi.spectral();
    let mut nv = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
    let mut nphi = Vec::with_capacity(grid.len());
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            let k2 = grid.k_squared(i1, i2);
            let a = dt * visc * k2;
            let b = dt * relax * k2 * k2;
            for c in 0..2 {
                let z = (v_hat[c][idx] * (1.0 - (1.0 - theta) * a) + rhs.v[c][idx] * dt) / (1.0 + theta * a);
                nv[c].push(z);
            }
            nphi.push((phi_hat[idx] * (1.0 - (1.0 - theta) * b) + rhs.phi[idx] * dt) / (1.0 + theta * b));
        }
    }
    let [a, b] = nv;
    let v = leray_project(&VectorField::new(
        Field::from_spectral(grid, a),
        Field::from_spectral(grid, b),
    ));
    // Physical values are the canonical representation of a stored state, so
    // a snapshot reload reproduces the run bit for bit.
    let v = v.map_components(|c| Field::from_physical(grid, c.physical().to_vec()));
    let phi = Field::from_physical(grid, Field::from_spectral(grid, nphi).into_physical());
    State { v, phi, t: s.t + dt }
}

fn check_finite(s: &State, step: u64) -> Result<()> {
    let v = vector_l2_norm(&s.v);
    if !v.is_finite() {
        return Err(Error::Divergence {
            step,
            quantity: "velocity L2 norm",
            value: v,
        });
    }
    let phi = l2_norm(&s.phi);
    if !phi.is_finite() {
        return Err(Error::Divergence {
            step,
            quantity: "layer L2 norm",
            value: phi,
        });
    }
    Ok(())
}

/// Time stepper carrying the explicit history needed by the two-step scheme.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: Params,
    dt: f64,
    scheme: Scheme,
    steps_taken: u64,
    previous: Option<Rhs>,
}

impl core::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Rhs").field("len", &self.phi.len()).finish()
    }
}

impl Stepper {
    pub fn new(params: Params, config: &StepConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            params,
            dt: config.dt,
            scheme: config.scheme,
            steps_taken: 0,
            previous: None,
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// Advances one step.
    pub fn step(&mut self, s: &State) -> Result<State> {
        let terms = Terms::new(s, &self.params);
        self.advance(s, &terms)
    }

    pub(crate) fn advance(&mut self, s: &State, terms: &Terms) -> Result<State> {
        let step = self.steps_taken;
        check_finite(s, step)?;
        let p = &self.params;
        let dt = self.dt;
        let rhs = Rhs::from_tendency(&tendency_from_terms(s, terms, p));
        let next = match self.scheme {
            Scheme::Imex1 => implicit_update(s, &rhs, p, dt, 1.0),
            Scheme::Imex2 => match self.previous.take() {
                Some(prev) => {
                    let extrapolated = Rhs::combine(&rhs, 1.5, &prev, -0.5);
                    implicit_update(s, &extrapolated, p, dt, 0.5)
                }
                None => {
                    // Second-order start: Crank–Nicolson with the explicit part
                    // averaged between the state and a first-order predictor.
                    let predictor = implicit_update(s, &rhs, p, dt, 1.0);
                    check_finite(&predictor, step)?;
                    let predicted = Rhs::from_tendency(&explicit_tendency(&predictor, p));
                    let averaged = Rhs::combine(&rhs, 0.5, &predicted, 0.5);
                    implicit_update(s, &averaged, p, dt, 0.5)
                }
            },
        };
        check_finite(&next, step + 1)?;
        if self.scheme == Scheme::Imex2 {
            self.previous = Some(rhs);
        }
        self.steps_taken += 1;
        Ok(next)
    }
}

/// One step from a fresh history (the two-step scheme uses its start-up step).
pub fn imex_step(s: &State, p: &Params, c: &StepConfig) -> Result<State> {
    Stepper::new(*p, c)?.step(s)
}

/// Recorded diagnostics of a run plus optional state snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// `(step index, state)` pairs.
    pub snapshots: Vec<(u64, State)>,
    pub final_state: State,
    /// Weight used for the `A` column.
    pub alpha: f64,
    pub dt: f64,
}

/// A failed run: the error plus everything recorded before it.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

impl core::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} ({} records kept)", self.error, self.partial.records.len())
    }
}

/// Steps from `s0` until `t >= t_end`, recording diagnostics every
/// `diag_every` steps (including the initial state) and snapshots every
/// `snapshot_every` steps.
pub fn run(s0: &State, p: &Params, c: &StepConfig) -> core::result::Result<Trajectory, RunFailure> {
    run_with(s0, p, c, |_, _| {})
}

/// Like [`run`], calling `observe(step, state)` on every state visited.
pub fn run_with(
    s0: &State,
    p: &Params,
    c: &StepConfig,
    mut observe: impl FnMut(u64, &State),
) -> core::result::Result<Trajectory, RunFailure> {
    let alpha = default_alpha(p, &Terms::new(s0, p));
    let mut traj = Trajectory {
        records: Vec::new(),
        snapshots: Vec::new(),
        final_state: s0.clone(),
        alpha,
        dt: c.dt,
    };
    let mut stepper = match Stepper::new(*p, c) {
        Ok(st) => st,
        Err(error) => {
            return Err(RunFailure {
                error,
                partial: Box::new(traj),
            })
        }
    };
    let total = c.steps_from(s0.t);
    let mut state = s0.clone();
    for step in 0..=total {
        observe(step, &state);
        let terms = Terms::new(&state, p);
        if step % c.diag_every == 0 {
            traj.records
                .push(DiagnosticsRecord::from_terms(&state, &terms, p, alpha));
        }
        if step % c.snapshot_every == 0 {
            traj.snapshots.push((step, state.clone()));
        }
        if step == total {
            break;
        }
        match stepper.advance(&state, &terms) {
            Ok(next) => state = next,
            Err(error) => {
                traj.final_state = state;
                return Err(RunFailure {
                    error,
                    partial: Box::new(traj),
                });
            }
        }
    }
    traj.final_state = state;
    Ok(traj)
}
