//! Initial-condition generators.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::spectral::{linf_norm, perp_gradient, Field, Grid, VectorField};
use crate::{Error, Result};

/// `A·(sin 2πx₁ cos 2πx₂, −cos 2πx₁ sin 2πx₂)`: the 2D Taylor–Green vortex.
pub fn taylor_green(grid: &Arc<Grid>, amplitude: f64) -> VectorField {
    let u1 = Field::from_fn(grid, |x, y| amplitude * libm::sin(TAU * x) * libm::cos(TAU * y));
    let u2 = Field::from_fn(grid, |x, y| -amplitude * libm::cos(TAU * x) * libm::sin(TAU * y));
    VectorField::new(u1, u2)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits mapped to [-1, 1).
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * unit - 1.0
}

/// Zero-mean real field whose modes satisfy `1 <= |(i1, i2)| <= max_mode`,
/// with unit-scale random coefficients. Deterministic in `seed`.
fn random_band_raw(grid: &Arc<Grid>, max_mode: usize, seed: u64) -> Result<Field> {
    let n = grid.n();
    if max_mode == 0 || max_mode >= n / 2 {
        return Err(Error::param(
            "max_mode",
            alloc::format!("must be in [1, {}] for n = {n}, got {max_mode}", n / 2 - 1),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = grid.indices();
    let m = max_mode as i64;
    let mut raw = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
    for i1 in 0..n {
        for i2 in 0..n {
            if idx[i1] * idx[i1] + idx[i2] * idx[i2] <= m * m && (idx[i1], idx[i2]) != (0, 0) {
                raw[i1 * n + i2] = Complex64::new(uniform(&mut rng), uniform(&mut rng));
            }
        }
    }
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(grid.len());
    for i1 in 0..n {
        for i2 in 0..n {
            let a = raw[i1 * n + i2];
            let b = raw[grid.conjugate_offset(i1, i2)];
            coeffs.push((a + b.conj()) * 0.5);
        }
    }
    Ok(Field::from_spectral(grid, coeffs))
}

fn rescale(f: &Field, amplitude: f64, peak: f64) -> Field {
    if peak == 0.0 {
        f.clone()
    } else {
        f.scale(amplitude / peak)
    }
}

/// Band-limited zero-mean random scalar field with `max |φ| = amplitude`.
pub fn random_band_scalar(grid: &Arc<Grid>, max_mode: usize, amplitude: f64, seed: u64) -> Result<Field> {
    let f = random_band_raw(grid, max_mode, seed)?;
    let peak = linf_norm(&f);
    Ok(rescale(&f, amplitude, peak))
}

/// Band-limited divergence-free zero-mean random velocity, the perpendicular
/// gradient of a random stream function, scaled so the largest nodal
/// component magnitude equals `amplitude`.
pub fn random_band_velocity(grid: &Arc<Grid>, max_mode: usize, amplitude: f64, seed: u64) -> Result<VectorField> {
    let psi = random_band_raw(grid, max_mode, seed)?;
    let v = perp_gradient(&psi);
    let peak = linf_norm(&v[0]).max(linf_norm(&v[1]));
    Ok(v.map_components(|c| rescale(c, amplitude, peak)))
}
