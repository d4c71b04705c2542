//! Fourier substrate on the unit torus: grids, dual-representation fields,
//! differential multipliers, dealiasing, the Leray projector and norms.
//!
//! Storage is row-major over `(x1, x2)`: node `(j1, j2)` sits at
//! `x = (j1/n, j2/n)` and lives at offset `j1 * n + j2`. Spectral arrays use
//! the same layout over transform-order wavenumber indices.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, Index, Mul, Neg, Sub};
use core::str::FromStr;

use num_complex::Complex64;

use crate::fft::Fft2;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const MIN_RESOLUTION: usize = 8;
pub const MAX_RESOLUTION: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// Spectral truncation applied to nonlinear products.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DealiasRule {
    /// Keep `|index| <= n/3`.
    #[default]
    TwoThirds,
    /// Keep `|index| <= n/4`; alias-free for cubic products of retained modes.
    Half,
    None,
}

impl DealiasRule {
    /// Largest retained `max(|i1|, |i2|)`, or `None` when nothing is cut.
    pub fn cutoff(self, n: usize) -> Option<usize> {
        match self {
            DealiasRule::TwoThirds => Some(n / 3),
            DealiasRule::Half => Some(n / 4),
            DealiasRule::None => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DealiasRule::TwoThirds => "two_thirds",
            DealiasRule::Half => "half",
            DealiasRule::None => "none",
        }
    }
}

impl FromStr for DealiasRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_thirds" => Ok(DealiasRule::TwoThirds),
            "half" => Ok(DealiasRule::Half),
            "none" => Ok(DealiasRule::None),
            other => Err(Error::Config(alloc::format!("unknown dealias rule `{other}`"))),
        }
    }
}

/// Uniform `n × n` discretization of the unit torus with its wavenumber tables.
pub struct Grid {
    n: usize,
    /// Signed wavenumber index per transform position: `0, 1, …, n/2, -n/2+1, …, -1`.
    indices: Vec<i64>,
    /// `2π · index`, used by even-order multipliers.
    wavenumbers: Vec<f64>,
    /// Same table with the Nyquist entry zeroed, used by odd-order multipliers.
    odd_wavenumbers: Vec<f64>,
    fft: Fft2,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&n) {
            return Err(Error::Config(alloc::format!(
                "grid resolution must be a power of two in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {n}"
            )));
        }
        let half = (n / 2) as i64;
        let indices: Vec<i64> = (0..n as i64)
            .map(|j| if j <= half { j } else { j - n as i64 })
            .collect();
        let wavenumbers: Vec<f64> = indices.iter().map(|&i| 2.0 * PI * i as f64).collect();
        let odd_wavenumbers = indices
            .iter()
            .zip(&wavenumbers)
            .map(|(&i, &k)| if i == half { 0.0 } else { k })
            .collect();
        Ok(Self {
            n,
            indices,
            wavenumbers,
            odd_wavenumbers,
            fft: Fft2::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_area(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    /// Per-axis wavenumber table in transform order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn odd_wavenumbers(&self) -> &[f64] {
        &self.odd_wavenumbers
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    /// `|k|²` of the mode stored at `(i1, i2)`.
    #[inline]
    pub fn k_squared(&self, i1: usize, i2: usize) -> f64 {
        let (a, b) = (self.wavenumbers[i1], self.wavenumbers[i2]);
        a * a + b * b
    }

    /// Offset of the mode with wavenumber indices `-idx`.
    #[inline]
    pub fn conjugate_offset(&self, i1: usize, i2: usize) -> usize {
        let n = self.n;
        ((n - i1) % n) * n + (n - i2) % n
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.forward(&mut data);
        data
    }

    pub(crate) fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.fft.inverse(&mut data);
        data
    }

    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(coeffs).into_iter().map(|z| z.re).collect()
    }
}

/// Builds the shared grid for resolution `n` (power of two, 8..=1024).
pub fn make_grid(n: usize) -> Result<Arc<Grid>> {
    Grid::new(n).map(Arc::new)
}

/// Scalar field on the torus, holding physical and/or spectral values.
///
/// At least one representation is always present; the other is computed on
/// first access and cached. Operations never mutate their inputs.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    physical: OnceCell<Vec<f64>>,
    spectral: OnceCell<Vec<Complex64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("n", &self.grid.n)
            .field("physical", &self.physical.get().is_some())
            .field("spectral", &self.spectral.get().is_some())
            .finish()
    }
}

impl Field {
    pub fn from_physical(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "physical data does not match grid");
        Self {
            grid: Arc::clone(grid),
            physical: OnceCell::from(values),
            spectral: OnceCell::new(),
        }
    }

    pub fn from_spectral(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "spectral data does not match grid");
        Self {
            grid: Arc::clone(grid),
            physical: OnceCell::new(),
            spectral: OnceCell::from(coeffs),
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_spectral(grid, alloc::vec![ZERO; grid.len()])
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        let mut coeffs = alloc::vec![ZERO; grid.len()];
        coeffs[0] = Complex64::new(value, 0.0);
        let field = Self::from_spectral(grid, coeffs);
        let _ = field.physical.set(alloc::vec![value; grid.len()]);
        field
    }

    /// Samples `f(x1, x2)` at the grid nodes.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let mut values = Vec::with_capacity(grid.len());
        for j1 in 0..n {
            let x1 = grid.coordinate(j1);
            for j2 in 0..n {
                values.push(f(x1, grid.coordinate(j2)));
            }
        }
        Self::from_physical(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn has_physical(&self) -> bool {
        self.physical.get().is_some()
    }

    pub fn has_spectral(&self) -> bool {
        self.spectral.get().is_some()
    }

    pub fn physical(&self) -> &[f64] {
        self.physical.get_or_init(|| {
            let coeffs = self.spectral.get().expect("field has no representation");
            self.grid.inverse(coeffs)
        })
    }

    pub fn spectral(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| {
            let values = self.physical.get().expect("field has no representation");
            self.grid.forward(values)
        })
    }

    pub fn into_physical(self) -> Vec<f64> {
        self.physical();
        self.physical.into_inner().unwrap_or_default()
    }

    pub fn into_spectral(self) -> Vec<Complex64> {
        self.spectral();
        self.spectral.into_inner().unwrap_or_default()
    }

    /// Spatial mean, read off the zero mode.
    pub fn mean(&self) -> f64 {
        self.spectral()[0].re
    }

    /// Coefficient-wise product with `multiplier(i1, i2)`.
    pub fn apply_multiplier(&self, multiplier: impl Fn(usize, usize) -> Complex64) -> Field {
        let n = self.grid.n;
        let coeffs = self.spectral();
        let mut out = Vec::with_capacity(coeffs.len());
        for i1 in 0..n {
            for i2 in 0..n {
                out.push(coeffs[i1 * n + i2] * multiplier(i1, i2));
            }
        }
        Field::from_spectral(&self.grid, out)
    }

    /// Pointwise map over physical values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_physical(&self.grid, self.physical().iter().map(|&x| f(x)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid.n, other.grid.n);
        let values = self
            .physical()
            .iter()
            .zip(other.physical())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_physical(&self.grid, values)
    }

    pub fn scale(&self, factor: f64) -> Field {
        self.linear(factor, None, 0.0)
    }

    /// `a·self + b·other`, carried out in whichever representation both
    /// operands already hold (spectral preferred).
    fn linear(&self, a: f64, other: Option<&Field>, b: f64) -> Field {
        let spectral_ready = self.has_spectral() && other.is_none_or(Field::has_spectral);
        let physical_ready = self.has_physical() && other.is_none_or(Field::has_physical);
        if physical_ready && !spectral_ready {
            let values = match other {
                Some(o) => self
                    .physical()
                    .iter()
                    .zip(o.physical())
                    .map(|(&x, &y)| a * x + b * y)
                    .collect(),
                None => self.physical().iter().map(|&x| a * x).collect(),
            };
            return Field::from_physical(&self.grid, values);
        }
        let coeffs = match other {
            Some(o) => self
                .spectral()
                .iter()
                .zip(o.spectral())
                .map(|(&x, &y)| x * a + y * b)
                .collect(),
            None => self.spectral().iter().map(|&x| x * a).collect(),
        };
        Field::from_spectral(&self.grid, coeffs)
    }

    /// Adds a constant. Only the zero mode changes.
    pub fn shift(&self, c: f64) -> Field {
        let mut coeffs = self.spectral().to_vec();
        coeffs[0] += c;
        Field::from_spectral(&self.grid, coeffs)
    }

    /// `L²` inner product over the torus, via Parseval.
    pub fn inner(&self, other: &Field) -> f64 {
        self.spectral()
            .iter()
            .zip(other.spectral())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        match self.physical.get() {
            Some(v) => v.iter().all(|x| x.is_finite()),
            None => self.spectral().iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.linear(1.0, Some(rhs), 1.0)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.linear(1.0, Some(rhs), -1.0)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

/// Two-component field `(u₁, u₂)`.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: [Field; 2],
}

impl VectorField {
    pub fn new(u1: Field, u2: Field) -> Self {
        debug_assert_eq!(u1.grid().n, u2.grid().n);
        Self { components: [u1, u2] }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::new(Field::zeros(grid), Field::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[Field; 2] {
        &self.components
    }

    pub fn into_components(self) -> [Field; 2] {
        self.components
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.components[0].mean(), self.components[1].mean()]
    }

    pub fn map_components(&self, f: impl Fn(&Field) -> Field) -> VectorField {
        VectorField::new(f(&self.components[0]), f(&self.components[1]))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(Field::is_finite)
    }
}

impl Index<usize> for VectorField {
    type Output = Field;
    fn index(&self, i: usize) -> &Field {
        &self.components[i]
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self[0] + &rhs[0], &self[1] + &rhs[1])
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self[0] - &rhs[0], &self[1] - &rhs[1])
    }
}

/// `(i k)^order` along `axis`; odd orders use the Nyquist-zeroed table.
pub fn deriv(f: &Field, axis: Axis, order: u32) -> Field {
    let grid = Arc::clone(f.grid());
    let table = if order % 2 == 1 {
        grid.odd_wavenumbers()
    } else {
        grid.wavenumbers()
    };
    let factor = |k: f64| -> Complex64 {
        let mut z = Complex64::new(1.0, 0.0);
        for _ in 0..order {
            z *= Complex64::new(0.0, k);
        }
        z
    };
    let per_index: Vec<Complex64> = table.iter().map(|&k| factor(k)).collect();
    match axis {
        Axis::X1 => f.apply_multiplier(|i1, _| per_index[i1]),
        Axis::X2 => f.apply_multiplier(|_, i2| per_index[i2]),
    }
}

pub fn laplacian(f: &Field) -> Field {
    let grid = Arc::clone(f.grid());
    f.apply_multiplier(|i1, i2| Complex64::new(-grid.k_squared(i1, i2), 0.0))
}

pub fn bilaplacian(f: &Field) -> Field {
    let grid = Arc::clone(f.grid());
    f.apply_multiplier(|i1, i2| {
        let k2 = grid.k_squared(i1, i2);
        Complex64::new(k2 * k2, 0.0)
    })
}

pub fn gradient(f: &Field) -> VectorField {
    VectorField::new(deriv(f, Axis::X1, 1), deriv(f, Axis::X2, 1))
}

/// `∇⊥ψ = (∂₂ψ, −∂₁ψ)`, a divergence-free field from a stream function.
pub fn perp_gradient(psi: &Field) -> VectorField {
    VectorField::new(deriv(psi, Axis::X2, 1), -&deriv(psi, Axis::X1, 1))
}

pub fn divergence(u: &VectorField) -> Field {
    let grid = Arc::clone(u.grid());
    let k = grid.odd_wavenumbers();
    let (a, b) = (u[0].spectral(), u[1].spectral());
    let n = grid.n();
    let mut out = Vec::with_capacity(grid.len());
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            out.push(Complex64::new(0.0, k[i1]) * a[idx] + Complex64::new(0.0, k[i2]) * b[idx]);
        }
    }
    Field::from_spectral(&grid, out)
}

/// Zeroes the modes above the rule's cutoff (in `max(|i1|, |i2|)`).
pub fn dealias(f: &Field, rule: DealiasRule) -> Field {
    let grid = Arc::clone(f.grid());
    let Some(cutoff) = rule.cutoff(grid.n()) else {
        return f.clone();
    };
    let cutoff = cutoff as i64;
    let idx = grid.indices();
    let keep: Vec<bool> = idx.iter().map(|i| i.abs() <= cutoff).collect();
    f.apply_multiplier(|i1, i2| {
        if keep[i1] && keep[i2] {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Orthogonal projection onto divergence-free fields,
/// `û ← û − k (k·û)/|k|²`; the zero mode passes through unchanged.
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = Arc::clone(u.grid());
    let n = grid.n();
    let k = grid.odd_wavenumbers();
    let (a, b) = (u[0].spectral(), u[1].spectral());
    let mut out1 = Vec::with_capacity(grid.len());
    let mut out2 = Vec::with_capacity(grid.len());
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            let (k1, k2) = (k[i1], k[i2]);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                out1.push(a[idx]);
                out2.push(b[idx]);
            } else {
                let dot = (a[idx] * k1 + b[idx] * k2) / kk;
                out1.push(a[idx] - dot * k1);
                out2.push(b[idx] - dot * k2);
            }
        }
    }
    VectorField::new(Field::from_spectral(&grid, out1), Field::from_spectral(&grid, out2))
}

/// `L²` norm from spectral coefficients (Parseval).
pub fn l2_norm(f: &Field) -> f64 {
    libm::sqrt(f.spectral().iter().map(Complex64::norm_sqr).sum())
}

/// `L²` norm as a cell-area-weighted sum over nodes.
pub fn l2_norm_physical(f: &Field) -> f64 {
    let cell = f.grid().cell_area();
    libm::sqrt(cell * f.physical().iter().map(|x| x * x).sum::<f64>())
}

/// `Hˢ` norm with `(1 + |k|²)^s` weights.
pub fn hs_norm(f: &Field, s: f64) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let coeffs = f.spectral();
    let mut acc = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            let w = libm::pow(1.0 + grid.k_squared(i1, i2), s);
            acc += w * coeffs[i1 * n + i2].norm_sqr();
        }
    }
    libm::sqrt(acc)
}

pub fn linf_norm(f: &Field) -> f64 {
    f.physical().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn vector_l2_norm(u: &VectorField) -> f64 {
    let a = l2_norm(&u[0]);
    let b = l2_norm(&u[1]);
    libm::sqrt(a * a + b * b)
}

pub fn vector_hs_norm(u: &VectorField, s: f64) -> f64 {
    let a = hs_norm(&u[0], s);
    let b = hs_norm(&u[1], s);
    libm::sqrt(a * a + b * b)
}

/// Largest `|Im|` of the unnormalized inverse transform relative to the largest
/// `|Re|`. Zero for coefficient arrays with exact conjugate symmetry.
pub fn imaginary_residual(f: &Field) -> f64 {
    let values = f.grid().inverse_complex(f.spectral());
    let re = values.iter().fold(0.0_f64, |m, z| m.max(z.re.abs()));
    let im = values.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    if re == 0.0 {
        im
    } else {
        im / re
    }
}
