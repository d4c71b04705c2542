//! Energy-law auditing, the higher-order functional `A(t)`, convergence
//! tracking and decay-rate fitting.

use alloc::vec::Vec;

use crate::model::{grad_l2_norm, phi_h2, Params, State, Terms};
use crate::spectral::{hs_norm, vector_hs_norm, Field};
use crate::{Error, Result};

/// Per-record scalars of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Total energy.
    pub energy: f64,
    pub d_mu1: f64,
    pub d_mu4: f64,
    pub d_mu5: f64,
    pub d_q: f64,
    /// `‖∇v‖`
    pub grad_v_l2: f64,
    /// `‖Q‖`
    pub q_l2: f64,
    /// `‖∇v‖² + α‖Q‖²`
    pub a: f64,
    pub mean_v: [f64; 2],
    pub mean_phi: f64,
    /// `‖φ‖_{H²}`
    pub phi_h2: f64,
    /// `‖∇·v‖ / ‖∇v‖`; not part of the exported time series.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub divergence: f64,
}

impl DiagnosticsRecord {
    pub fn compute(s: &State, p: &Params, alpha: f64) -> Self {
        Self::from_terms(s, &Terms::new(s, p), p, alpha)
    }

    pub(crate) fn from_terms(s: &State, terms: &Terms, p: &Params, alpha: f64) -> Self {
        let split = terms.dissipation(p);
        let grad_v_l2 = grad_l2_norm(&s.v);
        let q_l2 = crate::spectral::l2_norm(&terms.q);
        Self {
            t: s.t,
            energy: terms.energy(s, p),
            d_mu1: split.mu1,
            d_mu4: split.mu4,
            d_mu5: split.mu5,
            d_q: split.q,
            grad_v_l2,
            q_l2,
            a: grad_v_l2 * grad_v_l2 + alpha * q_l2 * q_l2,
            mean_v: s.v.mean(),
            mean_phi: s.phi.mean(),
            phi_h2: phi_h2(&s.phi),
            divergence: s.divergence_residual(),
        }
    }

    pub fn total_dissipation(&self) -> f64 {
        self.d_mu1 + self.d_mu4 + self.d_mu5 + self.d_q
    }
}

/// `α = λμ₄ / (16 K M²)`.
pub fn alpha_for_bound(p: &Params, m: f64) -> f64 {
    p.lambda() * p.mu4() / (16.0 * p.k() * m * m)
}

/// `α` with `M = max(1, ‖∇φ‖_∞)` taken from the given state.
pub(crate) fn default_alpha(p: &Params, terms: &Terms) -> f64 {
    alpha_for_bound(p, terms.max_abs_grad_phi().max(1.0))
}

pub fn alpha_for_state(s: &State, p: &Params) -> f64 {
    default_alpha(p, &Terms::new(s, p))
}

/// `A = ‖∇v‖² + α‖Q‖²`.
pub fn a_functional(s: &State, p: &Params, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", alloc::format!("must be > 0, got {alpha}")));
    }
    let g = grad_l2_norm(&s.v);
    let q = crate::spectral::l2_norm(&crate::model::q_force(&s.phi, p));
    Ok(g * g + alpha * q * q)
}

/// Time quadrature for the dissipation term of the discrete energy law.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// `(E_{m+1} − E_m)/Δt + D(t_m)`
    #[default]
    Left,
    /// `(E_{m+1} − E_m)/Δt + (D(t_m) + D(t_{m+1}))/2`
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub dt: f64,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

/// Residual of the energy law between consecutive, uniformly spaced records.
pub fn energy_audit(records: &[DiagnosticsRecord], quadrature: Quadrature) -> Result<EnergyAudit> {
    if records.len() < 2 {
        return Err(Error::Precondition(alloc::format!(
            "energy audit needs at least 2 records, got {}",
            records.len()
        )));
    }
    let dt = records[1].t - records[0].t;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSpacing { index: 1 });
    }
    let mut residuals = Vec::with_capacity(records.len() - 1);
    for (m, pair) in records.windows(2).enumerate() {
        let step = pair[1].t - pair[0].t;
        if (step - dt).abs() > 1e-6 * dt {
            return Err(Error::NonUniformSpacing { index: m + 1 });
        }
        let rate = (pair[1].energy - pair[0].energy) / dt;
        let dissipation = match quadrature {
            Quadrature::Left => pair[0].total_dissipation(),
            Quadrature::Trapezoid => 0.5 * (pair[0].total_dissipation() + pair[1].total_dissipation()),
        };
        residuals.push(rate + dissipation);
    }
    let max_abs = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let mean_abs = residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64;
    Ok(EnergyAudit {
        dt,
        residuals,
        max_abs,
        mean_abs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DecayModel {
    /// `C (1+t)^{−p}`
    Algebraic,
    /// `C e^{−rt}`
    Exponential,
}

/// Least-squares decay fit of a positive series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateFit {
    pub model: DecayModel,
    /// `p` for the algebraic model, the rate `r` for the exponential one.
    pub exponent: f64,
    /// `θ = p / (1 + 2p)`, present for an algebraic fit with `p > 0`.
    pub theta_implied: Option<f64>,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    /// Log of the fitted prefactor `C`.
    pub log_prefactor: f64,
    pub points: usize,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        r_squared: r_squared.clamp(0.0, 1.0),
    })
}

/// Fits `log(value)` against `log(1+t)` and against `t` over `window` and
/// keeps the model with the larger `r²`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b && a > -1.0) {
        return Err(Error::Series(alloc::format!("degenerate window [{a}, {b}]")));
    }
    let points: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= a && t <= b).collect();
    if points.len() < 10 {
        return Err(Error::Series(alloc::format!(
            "window [{a}, {b}] holds {} points, need at least 10",
            points.len()
        )));
    }
    if let Some(&(t, v)) = points.iter().find(|&&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Series(alloc::format!("value {v} at t = {t} is not positive")));
    }
    let ys: Vec<f64> = points.iter().map(|&(_, v)| libm::log(v)).collect();
    let log_t: Vec<f64> = points.iter().map(|&(t, _)| libm::log1p(t)).collect();
    let ts: Vec<f64> = points.iter().map(|&(t, _)| t).collect();
    let degenerate = || Error::Series(alloc::format!("window [{a}, {b}] has no spread in t"));
    let algebraic = least_squares(&log_t, &ys).ok_or_else(degenerate)?;
    let exponential = least_squares(&ts, &ys).ok_or_else(degenerate)?;
    let fit = if algebraic.r_squared > exponential.r_squared {
        let p = -algebraic.slope;
        RateFit {
            model: DecayModel::Algebraic,
            exponent: p,
            theta_implied: (p > 0.0 && p.is_finite()).then(|| p / (1.0 + 2.0 * p)),
            fit_window: window,
            r_squared: algebraic.r_squared,
            log_prefactor: algebraic.intercept,
            points: points.len(),
        }
    } else {
        RateFit {
            model: DecayModel::Exponential,
            exponent: -exponential.slope,
            theta_implied: None,
            fit_window: window,
            r_squared: exponential.r_squared,
            log_prefactor: exponential.intercept,
            points: points.len(),
        }
    };
    Ok(fit)
}

/// Tail window of a decaying series: the later half (in time) of the
/// stretch where values stay above `floor`. `None` when fewer than ten
/// points would remain.
pub fn tail_window(series: &[(f64, f64)], floor: f64) -> Option<(f64, f64)> {
    let last = series.iter().rposition(|&(_, v)| v > floor)?;
    let above: Vec<f64> = series[..=last]
        .iter()
        .filter(|&&(_, v)| v > floor)
        .map(|&(t, _)| t)
        .collect();
    let (start, end) = (*above.first()?, *above.last()?);
    let mid = 0.5 * (start + end);
    let count = above.iter().filter(|&&t| t >= mid).count();
    (count >= 10).then_some((mid, end))
}

/// Distance of a run from an equilibrium over time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    /// `‖v‖_{H¹}`
    pub v_h1: Vec<f64>,
    /// `‖φ − φ∞‖_{H⁴}`
    pub phi_h4: Vec<f64>,
    pub final_v_h1: f64,
    pub final_phi_h4: f64,
    pub v_fit: Option<RateFit>,
    pub phi_fit: Option<RateFit>,
}

/// Values at or below this are treated as round-off when choosing fit windows.
pub const NOISE_FLOOR: f64 = 1e-11;

/// `‖v‖_{H¹}` and `‖φ − φ∞‖_{H⁴}` along the given states, with decay fits on
/// the tails.
pub fn convergence_report(states: &[State], phi_inf: &Field) -> Result<ConvergenceReport> {
    let first = states
        .first()
        .ok_or_else(|| Error::Precondition("convergence report needs at least one state".into()))?;
    let (traj_mean, eq_mean) = (first.phi.mean(), phi_inf.mean());
    if (traj_mean - eq_mean).abs() > 1e-10 * (1.0 + eq_mean.abs()) {
        return Err(Error::MeanMismatch {
            trajectory: traj_mean,
            equilibrium: eq_mean,
        });
    }
    let mut times = Vec::with_capacity(states.len());
    let mut v_h1 = Vec::with_capacity(states.len());
    let mut phi_h4 = Vec::with_capacity(states.len());
    for s in states {
        times.push(s.t);
        v_h1.push(vector_hs_norm(&s.v, 1.0));
        phi_h4.push(hs_norm(&(&s.phi - phi_inf), 4.0));
    }
    let fit = |values: &[f64]| {
        let series: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
        tail_window(&series, NOISE_FLOOR).and_then(|w| fit_decay_rate(&series, w).ok())
    };
    Ok(ConvergenceReport {
        final_v_h1: *v_h1.last().unwrap_or(&0.0),
        final_phi_h4: *phi_h4.last().unwrap_or(&0.0),
        v_fit: fit(&v_h1),
        phi_fit: fit(&phi_h4),
        times,
        v_h1,
        phi_h4,
    })
}
