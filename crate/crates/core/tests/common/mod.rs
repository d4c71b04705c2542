#![allow(dead_code)]

use std::f64::consts::TAU;
use std::sync::Arc;

use smaflow_core::{Complex64, Field, Grid};

/// Small deterministic generator so test fields do not depend on the
/// library's own random-field code.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

/// Closed-form trigonometric polynomial
/// `Σ a cos(2π(m·x)) + b sin(2π(m·x))` over modes with `|m|_∞ <= band`.
#[derive(Clone, Debug)]
pub struct TrigPoly {
    pub terms: Vec<(f64, f64, f64, f64)>,
}

impl TrigPoly {
    pub fn random(band: i64, amplitude: f64, seed: u64) -> Self {
        let mut rng = Lcg::new(seed);
        let mut terms = Vec::new();
        for m1 in 0..=band {
            for m2 in -band..=band {
                if m1 == 0 && m2 <= 0 {
                    continue;
                }
                terms.push((
                    m1 as f64,
                    m2 as f64,
                    amplitude * rng.next_f64(),
                    amplitude * rng.next_f64(),
                ));
            }
        }
        Self { terms }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(m1, m2, a, b)| {
                let th = TAU * (m1 * x + m2 * y);
                a * th.cos() + b * th.sin()
            })
            .sum()
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Field {
        Field::from_fn(grid, |x, y| self.eval(x, y))
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Periodic samples of `f` on an `m × m` grid (row-major over `(x1, x2)`).
pub fn samples(m: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m * m);
    for j1 in 0..m {
        for j2 in 0..m {
            out.push(f(j1 as f64 / m as f64, j2 as f64 / m as f64));
        }
    }
    out
}

/// Second-order central differences on a periodic `m × m` grid.
pub struct Fd {
    pub m: usize,
    pub h: f64,
}

impl Fd {
    pub fn new(m: usize) -> Self {
        Self { m, h: 1.0 / m as f64 }
    }

    fn at(&self, u: &[f64], j1: isize, j2: isize) -> f64 {
        let m = self.m as isize;
        u[(j1.rem_euclid(m) * m + j2.rem_euclid(m)) as usize]
    }

    pub fn d1(&self, u: &[f64]) -> Vec<f64> {
        self.map(|j1, j2| (self.at(u, j1 + 1, j2) - self.at(u, j1 - 1, j2)) / (2.0 * self.h))
    }

    pub fn d2(&self, u: &[f64]) -> Vec<f64> {
        self.map(|j1, j2| (self.at(u, j1, j2 + 1) - self.at(u, j1, j2 - 1)) / (2.0 * self.h))
    }

    pub fn lap(&self, u: &[f64]) -> Vec<f64> {
        self.map(|j1, j2| {
            (self.at(u, j1 + 1, j2) + self.at(u, j1 - 1, j2) + self.at(u, j1, j2 + 1) + self.at(u, j1, j2 - 1)
                - 4.0 * self.at(u, j1, j2))
                / (self.h * self.h)
        })
    }

    fn map(&self, f: impl Fn(isize, isize) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * self.m);
        for j1 in 0..self.m as isize {
            for j2 in 0..self.m as isize {
                out.push(f(j1, j2));
            }
        }
        out
    }

    /// Values at the nodes of a coarser `n × n` grid embedded in this one.
    pub fn restrict(&self, u: &[f64], n: usize) -> Vec<f64> {
        let r = self.m / n;
        let mut out = Vec::with_capacity(n * n);
        for j1 in 0..n {
            for j2 in 0..n {
                out.push(u[j1 * r * self.m + j2 * r]);
            }
        }
        out
    }
}

/// `amplitude · sin(2π x1)` built from its two exact Fourier coefficients, free
/// of sampling round-off.
pub fn sine_x1(grid: &Arc<Grid>, amplitude: f64) -> Field {
    let n = grid.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    coeffs[n] = Complex64::new(0.0, -0.5 * amplitude);
    coeffs[(n - 1) * n] = Complex64::new(0.0, 0.5 * amplitude);
    Field::from_spectral(grid, coeffs)
}
