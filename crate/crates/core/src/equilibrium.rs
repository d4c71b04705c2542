//! Stationary states `−KΔ²φ + ∇·f(∇φ) = 0` with prescribed mean, reached by
//! the `v = 0` gradient flow `φ_t = λQ(φ)` in pseudo-time.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::init::random_band_scalar;
use crate::model::{director, penalty_potential, q_force, Params};
use crate::spectral::{dealias, l2_norm, Field, Grid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyConfig {
    /// Target for `‖Q‖_{L²}`.
    pub tol: f64,
    /// Initial pseudo-time step.
    pub dt0: f64,
    pub max_iters: usize,
    /// Prescribed `∫φ`; `None` keeps the mean of the initial field.
    pub mean: Option<f64>,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            dt0: 1e-3,
            max_iters: 20_000,
            mean: None,
        }
    }
}

impl SteadyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", alloc::format!("must be > 0, got {}", self.tol)));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(Error::param("dt0", alloc::format!("must be > 0, got {}", self.dt0)));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be >= 1"));
        }
        if let Some(m) = self.mean {
            if !m.is_finite() {
                return Err(Error::param("mean", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Largest accepted pseudo-time step.
const MAX_PSEUDO_DT: f64 = 1e8;
/// Smallest trial step before the solve is declared stuck.
const MIN_PSEUDO_DT: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SteadySolution {
    pub phi: Field,
    /// `‖Q‖` of the initial field and after every accepted step.
    pub residual_history: Vec<f64>,
    /// Layer energy of the initial field and after every accepted step.
    pub energy_history: Vec<f64>,
    /// Trial steps taken, accepted or not.
    pub iterations: usize,
}

impl SteadySolution {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// `E(φ) = (K/2)‖Δφ‖² + ∫F(∇φ)`, the energy with `v = 0`.
pub fn layer_energy(phi: &Field, p: &Params) -> f64 {
    let grid = phi.grid();
    let n = grid.n();
    let coeffs = phi.spectral();
    let mut bending = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            let k2 = grid.k_squared(i1, i2);
            bending += k2 * k2 * coeffs[i1 * n + i2].norm_sqr();
        }
    }
    let potential = penalty_potential(&director(phi), p.epsilon());
    0.5 * p.k() * bending + potential.physical().iter().sum::<f64>() * grid.cell_area()
}

/// Stabilization `S` in units of `1/ε²`; `∂f/∂d` has eigenvalues
/// `(|d|²−1)/ε²` and `(3|d|²−1)/ε²`.
const STABILIZATION: f64 = 2.0;

/// One semi-implicit pseudo-time step; the zero mode is copied unchanged.
fn relax_step(phi: &Field, p: &Params, dt: f64) -> Field {
    let grid = phi.grid();
    let n = grid.n();
    let k = grid.odd_wavenumbers();
    let f = crate::model::penalty_force(&director(phi), p.epsilon());
    let f_hat = [dealias(&f[0], p.dealias()), dealias(&f[1], p.dealias())];
    let (f1, f2) = (f_hat[0].spectral(), f_hat[1].spectral());
    let phi_hat = phi.spectral();
    // Linear stabilization S|k|², implicit and explicit in equal parts: fixed
    // points are unchanged, and S bounds the Jacobian of f for |d| <= 1, so
    // large pseudo-steps stay descent steps.
    let stab = STABILIZATION / (p.epsilon() * p.epsilon());
    let mut out = Vec::with_capacity(grid.len());
    out.push(phi_hat[0]);
    for idx in 1..grid.len() {
        let (i1, i2) = (idx / n, idx % n);
        let k2 = grid.k_squared(i1, i2);
        let div = Complex64::new(0.0, k[i1]) * f1[idx] + Complex64::new(0.0, k[i2]) * f2[idx];
        let lin = dt * p.lambda() * (p.k() * k2 * k2 + stab * k2);
        out.push((phi_hat[idx] * (1.0 + dt * p.lambda() * stab * k2) + div * (dt * p.lambda())) / (1.0 + lin));
    }
    Field::from_spectral(grid, out)
}

/// Gradient-flow solve for a stationary layer field.
///
/// The bilaplacian and a stabilizing `S|k|²` term are implicit, the penalty
/// divergence explicit. Accepted steps never raise the layer energy beyond round-off; the step
/// doubles after each accepted step and halves after each rejected one.
pub fn steady_solve(phi0: &Field, p: &Params, c: &SteadyConfig) -> Result<SteadySolution> {
    c.validate()?;
    let mut phi = match c.mean {
        Some(m) => phi0.shift(m - phi0.mean()),
        None => Field::from_spectral(phi0.grid(), phi0.spectral().to_vec()),
    };
    let mut energy = layer_energy(&phi, p);
    let mut residual = l2_norm(&q_force(&phi, p));
    let mut residual_history = alloc::vec![residual];
    let mut energy_history = alloc::vec![energy];
    let mut dt = c.dt0;
    let mut iterations = 0;
    while residual > c.tol {
        if iterations >= c.max_iters || dt < MIN_PSEUDO_DT {
            return Err(Error::NonConvergence { iterations, residual });
        }
        iterations += 1;
        let trial = relax_step(&phi, p, dt);
        let trial_energy = layer_energy(&trial, p);
        if !trial_energy.is_finite() {
            dt *= 0.5;
            continue;
        }
        // Round-off allowance: near the minimum successive energies agree to
        // machine precision and their difference carries no sign information.
        let slack = 64.0 * f64::EPSILON * energy.abs().max(f64::MIN_POSITIVE);
        if trial_energy <= energy + slack {
            phi = trial;
            energy = trial_energy;
            residual = l2_norm(&q_force(&phi, p));
            residual_history.push(residual);
            energy_history.push(energy);
            dt = (2.0 * dt).min(MAX_PSEUDO_DT);
        } else {
            dt *= 0.5;
        }
    }
    Ok(SteadySolution {
        phi,
        residual_history,
        energy_history,
        iterations,
    })
}

/// Best constant in `‖φ‖ ≤ C_P ‖∇φ‖` for zero-mean fields on the grid:
/// the reciprocal of the smallest nonzero wavenumber magnitude, `1/(2π)`.
pub fn poincare_constant(grid: &Grid) -> f64 {
    let n = grid.n();
    let mut smallest = f64::INFINITY;
    for i1 in 0..n {
        for i2 in 0..n {
            let k2 = grid.k_squared(i1, i2);
            if k2 > 0.0 && k2 < smallest {
                smallest = k2;
            }
        }
    }
    1.0 / libm::sqrt(smallest)
}

/// `C_P K^{−1/2}` on the unit torus; uniqueness of equilibria is guaranteed
/// when `ε` exceeds it.
pub fn uniqueness_threshold(p: &Params) -> f64 {
    1.0 / (2.0 * PI) / libm::sqrt(p.k())
}

/// Band limit of the random probe fields.
pub const PROBE_MAX_MODE: usize = 4;
/// Peak amplitude of the random probe fields.
pub const PROBE_AMPLITUDE: f64 = 0.1;

/// Random initial field for a probe, shifted to the requested mean.
pub fn probe_initial_field(grid: &Arc<Grid>, seed: u64, mean: f64) -> Result<Field> {
    Ok(random_band_scalar(grid, PROBE_MAX_MODE, PROBE_AMPLITUDE, seed)?.shift(mean))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub seed: u64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub epsilon: f64,
    /// `C_P K^{−1/2}`.
    pub threshold: f64,
    /// `ε > C_P K^{−1/2}`.
    pub uniqueness_guaranteed: bool,
    pub outcomes: Vec<ProbeOutcome>,
    /// `(i, j, ‖φ_i − φ_j‖)` over converged pairs.
    pub distances: Vec<(usize, usize, f64)>,
    pub max_distance: f64,
    /// False when some probe failed to converge.
    pub complete: bool,
}

/// Assembles a report from per-seed solve results (in seed order).
pub fn uniqueness_report(
    p: &Params,
    seeds: &[u64],
    results: Vec<core::result::Result<SteadySolution, Error>>,
) -> UniquenessReport {
    let threshold = uniqueness_threshold(p);
    let mut outcomes = Vec::with_capacity(seeds.len());
    let mut solutions: Vec<Option<Field>> = Vec::with_capacity(seeds.len());
    for (&seed, result) in seeds.iter().zip(results) {
        match result {
            Ok(sol) => {
                outcomes.push(ProbeOutcome {
                    seed,
                    converged: true,
                    residual: sol.residual(),
                    iterations: sol.iterations,
                    energy: *sol.energy_history.last().unwrap_or(&0.0),
                });
                solutions.push(Some(sol.phi));
            }
            Err(err) => {
                let (residual, iterations) = match err {
                    Error::NonConvergence { iterations, residual } => (residual, iterations),
                    _ => (f64::NAN, 0),
                };
                outcomes.push(ProbeOutcome {
                    seed,
                    converged: false,
                    residual,
                    iterations,
                    energy: f64::NAN,
                });
                solutions.push(None);
            }
        }
    }
    let mut distances = Vec::new();
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            if let (Some(a), Some(b)) = (&solutions[i], &solutions[j]) {
                distances.push((i, j, l2_norm(&(a - b))));
            }
        }
    }
    let max_distance = distances.iter().fold(0.0_f64, |m, d| m.max(d.2));
    UniquenessReport {
        epsilon: p.epsilon(),
        threshold,
        uniqueness_guaranteed: p.epsilon() > threshold,
        complete: outcomes.iter().all(|o| o.converged),
        outcomes,
        distances,
        max_distance,
    }
}

/// Solves from one random initial field per seed and compares the results.
pub fn uniqueness_probe(
    grid: &Arc<Grid>,
    p: &Params,
    seeds: &[u64],
    mean: f64,
    c: &SteadyConfig,
) -> Result<UniquenessReport> {
    if seeds.len() < 2 {
        return Err(Error::Precondition(alloc::format!(
            "uniqueness probe needs at least 2 seeds, got {}",
            seeds.len()
        )));
    }
    let config = SteadyConfig { mean: Some(mean), ..*c };
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let phi0 = probe_initial_field(grid, seed, mean)?;
        results.push(steady_solve(&phi0, p, &config));
    }
    Ok(uniqueness_report(p, seeds, results))
}
