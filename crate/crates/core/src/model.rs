//! Physics of the penalized smectic-A system: director, penalty terms,
//! chemical force `Q`, viscous and elastic stresses, energy and dissipation.
//!
//! Tensor convention: `(a ⊗ b)_ij = a_i b_j` and `(∇·σ)_i = ∂_j σ_ji`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::str::FromStr;

use num_complex::Complex64;

use crate::spectral::{
    dealias, divergence, gradient, hs_norm, l2_norm, laplacian, vector_l2_norm, Axis, DealiasRule, Field, Grid,
    VectorField,
};
use crate::{Error, Result};

/// Physical coefficients and the dealiasing rule used for nonlinear products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    mu1: f64,
    mu4: f64,
    mu5: f64,
    k: f64,
    lambda: f64,
    epsilon: f64,
    dealias: DealiasRule,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu1: 0.0,
            mu4: 1.0,
            mu5: 0.0,
            k: 1.0,
            lambda: 1.0,
            epsilon: 1.0,
            dealias: DealiasRule::TwoThirds,
        }
    }
}

impl Params {
    /// Validates `μ₁ ≥ 0`, `μ₄ > 0`, `μ₅ ≥ 0`, `K > 0`, `λ > 0`, `0 < ε ≤ 1`.
    pub fn new(mu1: f64, mu4: f64, mu5: f64, k: f64, lambda: f64, epsilon: f64) -> Result<Self> {
        fn check(name: &'static str, value: f64, ok: bool, rule: &str) -> Result<()> {
            if !value.is_finite() || !ok {
                return Err(Error::param(name, alloc::format!("must be {rule}, got {value}")));
            }
            Ok(())
        }
        check("mu1", mu1, mu1 >= 0.0, ">= 0")?;
        check("mu4", mu4, mu4 > 0.0, "> 0")?;
        check("mu5", mu5, mu5 >= 0.0, ">= 0")?;
        check("K", k, k > 0.0, "> 0")?;
        check("lambda", lambda, lambda > 0.0, "> 0")?;
        check("epsilon", epsilon, epsilon > 0.0 && epsilon <= 1.0, "in (0, 1]")?;
        Ok(Self {
            mu1,
            mu4,
            mu5,
            k,
            lambda,
            epsilon,
            dealias: DealiasRule::default(),
        })
    }

    pub fn with_dealias(mut self, rule: DealiasRule) -> Self {
        self.dealias = rule;
        self
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }
    pub fn mu4(&self) -> f64 {
        self.mu4
    }
    pub fn mu5(&self) -> f64 {
        self.mu5
    }
    /// Elastic constant `K`.
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn dealias(&self) -> DealiasRule {
        self.dealias
    }
}

/// Velocity, layer variable and time.
#[derive(Debug, Clone)]
pub struct State {
    pub v: VectorField,
    pub phi: Field,
    pub t: f64,
}

impl State {
    pub fn new(v: VectorField, phi: Field, t: f64) -> Result<Self> {
        if v.grid().n() != phi.grid().n() {
            return Err(Error::Config("velocity and layer field live on different grids".into()));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::param("t", alloc::format!("must be finite and >= 0, got {t}")));
        }
        Ok(Self { v, phi, t })
    }

    /// `v = 0`, `φ = value`: a stationary state.
    pub fn equilibrium(grid: &Arc<Grid>, value: f64) -> Self {
        Self {
            v: VectorField::zeros(grid),
            phi: Field::constant(grid, value),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi.grid()
    }

    /// Removes the spatial mean of both fields.
    pub fn zero_mean(&self) -> Self {
        let [m1, m2] = self.v.mean();
        Self {
            v: VectorField::new(self.v[0].shift(-m1), self.v[1].shift(-m2)),
            phi: self.phi.shift(-self.phi.mean()),
            t: self.t,
        }
    }

    /// `‖∇·v‖ / ‖∇v‖`, zero for a vanishing velocity.
    pub fn divergence_residual(&self) -> f64 {
        let div = l2_norm(&divergence(&self.v));
        let grad = grad_l2_norm(&self.v);
        if grad == 0.0 {
            div
        } else {
            div / grad
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.v.is_finite() && self.phi.is_finite()
    }
}

/// `‖∇u‖` via Parseval.
pub fn grad_l2_norm(u: &VectorField) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let mut acc = 0.0;
    for c in u.components() {
        let coeffs = c.spectral();
        for i1 in 0..n {
            for i2 in 0..n {
                acc += grid.k_squared(i1, i2) * coeffs[i1 * n + i2].norm_sqr();
            }
        }
    }
    libm::sqrt(acc)
}

/// Second-order tensor field with components `σ_ij`.
#[derive(Debug, Clone)]
pub struct StressTensor {
    components: [[Field; 2]; 2],
}

impl StressTensor {
    pub fn new(components: [[Field; 2]; 2]) -> Self {
        Self { components }
    }

    pub fn get(&self, i: usize, j: usize) -> &Field {
        &self.components[i][j]
    }

    /// Largest `|σ₁₂ − σ₂₁|` over the nodes.
    pub fn asymmetry(&self) -> f64 {
        self.components[0][1]
            .physical()
            .iter()
            .zip(self.components[1][0].physical())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `(∇·σ)_i = ∂_j σ_ji`, each component dealiased before differentiation.
    pub fn divergence(&self, rule: DealiasRule) -> VectorField {
        let c = &self.components;
        let div = |i: usize| {
            let a = dealias(&c[0][i], rule);
            let b = dealias(&c[1][i], rule);
            divergence(&VectorField::new(a, b))
        };
        VectorField::new(div(0), div(1))
    }
}

/// Which route `elastic_force` takes to the elastic forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElasticForm {
    /// `−Q d`, the form used by the momentum equation.
    QTimesD,
    /// `∇·σ̃ᵉ` with `σ̃ᵉ = −f(d)⊗d + K∇(∇·d)⊗d − K(∇·d)∇d`.
    DivergenceSigmaE,
}

impl FromStr for ElasticForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q_times_d" => Ok(ElasticForm::QTimesD),
            "divergence_sigma_e" => Ok(ElasticForm::DivergenceSigmaE),
            other => Err(Error::Config(alloc::format!("unknown elastic force form `{other}`"))),
        }
    }
}

/// Four nonnegative dissipation rates whose sum is `−dE/dt`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DissipationSplit {
    /// `μ₁ ∫ (dᵀD(v)d)²`
    pub mu1: f64,
    /// `(μ₄/2) ‖∇v‖²`
    pub mu4: f64,
    /// `2μ₅ ∫ |D(v)d|²`
    pub mu5: f64,
    /// `λ ‖Q‖²`
    pub q: f64,
}

impl DissipationSplit {
    pub fn total(&self) -> f64 {
        self.mu1 + self.mu4 + self.mu5 + self.q
    }
}

/// `d = ∇φ`.
pub fn director(phi: &Field) -> VectorField {
    gradient(phi)
}

/// `f(d) = (|d|² − 1) d / ε²`, pointwise.
pub fn penalty_force(d: &VectorField, epsilon: f64) -> VectorField {
    let grid = d.grid();
    let inv = 1.0 / (epsilon * epsilon);
    let (a, b) = (d[0].physical(), d[1].physical());
    let mut f1 = Vec::with_capacity(grid.len());
    let mut f2 = Vec::with_capacity(grid.len());
    for (&x, &y) in a.iter().zip(b) {
        let s = (x * x + y * y - 1.0) * inv;
        f1.push(s * x);
        f2.push(s * y);
    }
    VectorField::new(Field::from_physical(grid, f1), Field::from_physical(grid, f2))
}

/// `F(d) = (|d|² − 1)² / (4ε²)`, pointwise.
pub fn penalty_potential(d: &VectorField, epsilon: f64) -> Field {
    d[0].zip_with(&d[1], |x, y| {
        let s = x * x + y * y - 1.0;
        s * s / (4.0 * epsilon * epsilon)
    })
}

/// Spectral coefficients of `−K|k|⁴φ̂ + ik·f̂`, where `f̂` is the dealiased
/// penalty force. Shared by `q_force` and the time stepper.
fn q_spectral(phi: &Field, f_hat: &[Vec<Complex64>; 2], p: &Params) -> Field {
    let grid = phi.grid();
    let n = grid.n();
    let k = grid.odd_wavenumbers();
    let phi_hat = phi.spectral();
    let cutoff = p.dealias.cutoff(n).unwrap_or(n) as i64;
    let index = grid.indices();
    let mut out = Vec::with_capacity(grid.len());
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            // |k|⁴ would amplify round-off in unresolved modes of φ.
            if index[i1].abs() > cutoff || index[i2].abs() > cutoff {
                out.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let k2 = grid.k_squared(i1, i2);
            let div = Complex64::new(0.0, k[i1]) * f_hat[0][idx] + Complex64::new(0.0, k[i2]) * f_hat[1][idx];
            out.push(phi_hat[idx] * (-p.k * k2 * k2) + div);
        }
    }
    Field::from_spectral(grid, out)
}

fn dealiased_penalty(d: &VectorField, p: &Params) -> [Vec<Complex64>; 2] {
    let f = penalty_force(d, p.epsilon);
    let [f1, f2] = f.into_components();
    [
        dealias(&f1, p.dealias).into_spectral(),
        dealias(&f2, p.dealias).into_spectral(),
    ]
}

/// Chemical force `Q = −KΔ²φ + ∇·f(∇φ)`, truncated to the dealiasing band.
pub fn q_force(phi: &Field, p: &Params) -> Field {
    let d = director(phi);
    let f_hat = dealiased_penalty(&d, p);
    q_spectral(phi, &f_hat, p)
}

/// `∂_j v_i` as `grad[i][j]`.
fn velocity_gradient(v: &VectorField) -> [[Field; 2]; 2] {
    let g = |i: usize, axis| crate::spectral::deriv(&v[i], axis, 1);
    [[g(0, Axis::X1), g(0, Axis::X2)], [g(1, Axis::X1), g(1, Axis::X2)]]
}

/// Pointwise `σ̃ᵈ` from velocity-gradient and director samples.
/// Returns `(σ₁₁, σ₁₂, σ₂₂)`; the tensor is symmetric.
fn viscous_stress_pointwise(grad: [[&[f64]; 2]; 2], d: [&[f64]; 2], mu1: f64, mu5: f64) -> [Vec<f64>; 3] {
    let len = d[0].len();
    let mut s11 = Vec::with_capacity(len);
    let mut s12 = Vec::with_capacity(len);
    let mut s22 = Vec::with_capacity(len);
    for idx in 0..len {
        let (d1, d2) = (d[0][idx], d[1][idx]);
        let e11 = grad[0][0][idx];
        let e22 = grad[1][1][idx];
        let e12 = 0.5 * (grad[0][1][idx] + grad[1][0][idx]);
        let dd1 = e11 * d1 + e12 * d2;
        let dd2 = e12 * d1 + e22 * d2;
        let ddd = d1 * dd1 + d2 * dd2;
        s11.push(mu1 * ddd * d1 * d1 + mu5 * 2.0 * dd1 * d1);
        s12.push(mu1 * ddd * d1 * d2 + mu5 * (dd1 * d2 + d1 * dd2));
        s22.push(mu1 * ddd * d2 * d2 + mu5 * 2.0 * dd2 * d2);
    }
    [s11, s12, s22]
}

/// `σ̃ᵈ = μ₁(dᵀD(v)d) d⊗d + μ₅(D(v)d⊗d + d⊗D(v)d)`. The `μ₄D(v)` part is
/// omitted; the stepper treats it implicitly.
pub fn viscous_stress(v: &VectorField, d: &VectorField, p: &Params) -> StressTensor {
    let grid = v.grid();
    let gv = velocity_gradient(v);
    let [s11, s12, s22] = viscous_stress_pointwise(
        [
            [gv[0][0].physical(), gv[0][1].physical()],
            [gv[1][0].physical(), gv[1][1].physical()],
        ],
        [d[0].physical(), d[1].physical()],
        p.mu1,
        p.mu5,
    );
    let s12 = Field::from_physical(grid, s12);
    StressTensor::new([
        [Field::from_physical(grid, s11), s12.clone()],
        [s12, Field::from_physical(grid, s22)],
    ])
}

/// `σ̃ᵉ = −f(d)⊗d + K∇(∇·d)⊗d − K(∇·d)∇d`.
pub fn elastic_stress(phi: &Field, p: &Params) -> StressTensor {
    let grid = phi.grid();
    let d = director(phi);
    let f = penalty_force(&d, p.epsilon);
    let lap = laplacian(phi);
    let grad_lap = gradient(&lap);
    let hess = velocity_gradient(&d);
    let (lap, d_phys) = (lap.physical(), [d[0].physical(), d[1].physical()]);
    let component = |i: usize, j: usize| {
        let fi = f[i].physical();
        let gi = grad_lap[i].physical();
        let hij = hess[j][i].physical();
        let values = (0..grid.len())
            .map(|idx| -fi[idx] * d_phys[j][idx] + p.k * gi[idx] * d_phys[j][idx] - p.k * lap[idx] * hij[idx])
            .collect();
        Field::from_physical(grid, values)
    };
    StressTensor::new([[component(0, 0), component(0, 1)], [component(1, 0), component(1, 1)]])
}

/// Elastic forcing on the fluid. The two forms differ by a gradient, so they
/// agree after Leray projection.
pub fn elastic_force(phi: &Field, p: &Params, form: ElasticForm) -> VectorField {
    match form {
        ElasticForm::QTimesD => {
            let q = q_force(phi, p);
            let d = director(phi);
            let qd = |i: usize| dealias(&q.zip_with(&d[i], |a, b| -a * b), p.dealias);
            VectorField::new(qd(0), qd(1))
        }
        ElasticForm::DivergenceSigmaE => elastic_stress(phi, p).divergence(p.dealias),
    }
}

/// `E = ½‖v‖² + (K/2)‖Δφ‖² + ∫F(∇φ)`.
pub fn total_energy(s: &State, p: &Params) -> f64 {
    let d = director(&s.phi);
    energy_from_parts(&s.v, &s.phi, [d[0].physical(), d[1].physical()], p)
}

fn energy_from_parts(v: &VectorField, phi: &Field, d: [&[f64]; 2], p: &Params) -> f64 {
    let kinetic = 0.5 * {
        let norm = vector_l2_norm(v);
        norm * norm
    };
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
    let inv = 1.0 / (4.0 * p.epsilon * p.epsilon);
    let penalty: f64 = d[0]
        .iter()
        .zip(d[1])
        .map(|(x, y)| {
            let s = x * x + y * y - 1.0;
            s * s * inv
        })
        .sum::<f64>()
        * grid.cell_area();
    kinetic + 0.5 * p.k * bending + penalty
}

pub fn dissipation(s: &State, p: &Params) -> DissipationSplit {
    Terms::new(s, p).dissipation(p)
}

/// Every derived quantity of a state needed by the stepper and the
/// diagnostics, computed once.
pub(crate) struct Terms {
    pub grid: Arc<Grid>,
    /// `grad_v[i][j] = ∂_j v_i`, physical.
    pub grad_v: [[Vec<f64>; 2]; 2],
    /// `d = ∇φ`, physical.
    pub d: [Vec<f64>; 2],
    /// Dealiased penalty force, spectral.
    pub f_hat: [Vec<Complex64>; 2],
    pub q: Field,
}

impl Terms {
    pub fn new(s: &State, p: &Params) -> Self {
        let grid = Arc::clone(s.grid());
        let gv = velocity_gradient(&s.v);
        let grad_v = gv.map(|row| row.map(Field::into_physical));
        let d_field = director(&s.phi);
        let f_hat = dealiased_penalty(&d_field, p);
        let d = d_field.into_components().map(Field::into_physical);
        let q = q_spectral(&s.phi, &f_hat, p);
        Self {
            grid,
            grad_v,
            d,
            f_hat,
            q,
        }
    }

    fn d_slices(&self) -> [&[f64]; 2] {
        [&self.d[0], &self.d[1]]
    }

    fn grad_slices(&self) -> [[&[f64]; 2]; 2] {
        [
            [&self.grad_v[0][0], &self.grad_v[0][1]],
            [&self.grad_v[1][0], &self.grad_v[1][1]],
        ]
    }

    pub fn energy(&self, s: &State, p: &Params) -> f64 {
        energy_from_parts(&s.v, &s.phi, self.d_slices(), p)
    }

    pub fn dissipation(&self, p: &Params) -> DissipationSplit {
        let cell = self.grid.cell_area();
        let (mut a1, mut a5) = (0.0, 0.0);
        if p.mu1 != 0.0 || p.mu5 != 0.0 {
            let g = self.grad_slices();
            for idx in 0..self.grid.len() {
                let (d1, d2) = (self.d[0][idx], self.d[1][idx]);
                let e11 = g[0][0][idx];
                let e22 = g[1][1][idx];
                let e12 = 0.5 * (g[0][1][idx] + g[1][0][idx]);
                let dd1 = e11 * d1 + e12 * d2;
                let dd2 = e12 * d1 + e22 * d2;
                let ddd = d1 * dd1 + d2 * dd2;
                a1 += ddd * ddd;
                a5 += dd1 * dd1 + dd2 * dd2;
            }
        }
        let grad_sq: f64 = self
            .grad_v
            .iter()
            .flatten()
            .map(|c| c.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            * cell;
        let q = l2_norm(&self.q);
        DissipationSplit {
            mu1: p.mu1 * a1 * cell,
            mu4: 0.5 * p.mu4 * grad_sq,
            mu5: 2.0 * p.mu5 * a5 * cell,
            q: p.lambda * q * q,
        }
    }

    /// Explicit momentum forcing before projection:
    /// `−(v·∇)v − Q d + ∇·σ̃ᵈ`, each composite product dealiased once.
    pub fn momentum_forcing(&self, v: &VectorField, p: &Params) -> VectorField {
        let grid = &self.grid;
        let (v1, v2) = (v[0].physical(), v[1].physical());
        let q = self.q.physical();
        let g = self.grad_slices();
        let mut w1 = Vec::with_capacity(grid.len());
        let mut w2 = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let adv1 = v1[idx] * g[0][0][idx] + v2[idx] * g[0][1][idx];
            let adv2 = v1[idx] * g[1][0][idx] + v2[idx] * g[1][1][idx];
            w1.push(-adv1 - q[idx] * self.d[0][idx]);
            w2.push(-adv2 - q[idx] * self.d[1][idx]);
        }
        let mut forcing = VectorField::new(
            dealias(&Field::from_physical(grid, w1), p.dealias),
            dealias(&Field::from_physical(grid, w2), p.dealias),
        );
        if p.mu1 != 0.0 || p.mu5 != 0.0 {
            let [s11, s12, s22] = viscous_stress_pointwise(g, self.d_slices(), p.mu1, p.mu5);
            let s12 = Field::from_physical(grid, s12);
            let sigma = StressTensor::new([
                [Field::from_physical(grid, s11), s12.clone()],
                [s12, Field::from_physical(grid, s22)],
            ]);
            forcing = &forcing + &sigma.divergence(p.dealias);
        }
        forcing
    }

    /// Explicit part of the layer equation: `−v·∇φ + λ∇·f(d)`.
    pub fn layer_forcing(&self, v: &VectorField, p: &Params) -> Field {
        let grid = &self.grid;
        let (v1, v2) = (v[0].physical(), v[1].physical());
        let transport: Vec<f64> = (0..grid.len())
            .map(|idx| -(v1[idx] * self.d[0][idx] + v2[idx] * self.d[1][idx]))
            .collect();
        let transport = dealias(&Field::from_physical(grid, transport), p.dealias);
        let n = grid.n();
        let k = grid.odd_wavenumbers();
        let t_hat = transport.spectral();
        let mut out = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            for i2 in 0..n {
                let idx = i1 * n + i2;
                let div =
                    Complex64::new(0.0, k[i1]) * self.f_hat[0][idx] + Complex64::new(0.0, k[i2]) * self.f_hat[1][idx];
                out.push(t_hat[idx] + div * p.lambda);
            }
        }
        Field::from_spectral(grid, out)
    }

    pub fn max_abs_grad_phi(&self) -> f64 {
        self.d[0]
            .iter()
            .zip(&self.d[1])
            .fold(0.0_f64, |m, (a, b)| m.max(libm::sqrt(a * a + b * b)))
    }
}

/// `‖φ‖_{H²}` with `(1 + |k|²)²` weights.
pub fn phi_h2(phi: &Field) -> f64 {
    hs_norm(phi, 2.0)
}
