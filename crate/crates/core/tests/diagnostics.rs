use std::f64::consts::PI;

use smaflow_core::diagnostics::{
    a_functional, alpha_for_bound, convergence_report, energy_audit, fit_decay_rate, tail_window, DecayModel,
    Quadrature,
};
use smaflow_core::init::{random_band_scalar, taylor_green};
use smaflow_core::integrator::run;
use smaflow_core::model::{grad_l2_norm, q_force};
use smaflow_core::spectral::l2_norm;
use smaflow_core::{make_grid, DiagnosticsRecord, Error, Field, Params, State, StepConfig, VectorField};

fn series(f: impl Fn(f64) -> f64, t0: f64, t1: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / (count - 1) as f64;
            (t, f(t))
        })
        .collect()
}

#[test]
fn default_alpha_arithmetic() {
    let p = Params::new(0.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(alpha_for_bound(&p, 2.0), 1.0 / 64.0);
}

#[test]
fn a_functional_examples() {
    let g = make_grid(16).unwrap();
    let p = Params::default();
    assert_eq!(a_functional(&State::equilibrium(&g, 0.2), &p, 1.0).unwrap(), 0.0);

    let tg = State::new(taylor_green(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
    // ‖∇v‖² = 8π² ‖v‖² with ‖v‖² = 1/2.
    let a = a_functional(&tg, &p, 1.0).unwrap();
    assert!((a - 4.0 * PI * PI).abs() < 1e-11, "{a}");
    assert!(a_functional(&tg, &p, 0.0).is_err());
}

#[test]
fn record_a_column_is_consistent_with_its_parts() {
    let g = make_grid(16).unwrap();
    let p = Params::new(0.1, 1.0, 0.1, 1.0, 1.0, 0.5).unwrap();
    let phi = random_band_scalar(&g, 3, 0.1, 1).unwrap();
    let s = State::new(taylor_green(&g, 0.3), phi, 0.0).unwrap();
    let alpha = 0.37;
    let r = DiagnosticsRecord::compute(&s, &p, alpha);
    assert!((r.a - (r.grad_v_l2.powi(2) + alpha * r.q_l2.powi(2))).abs() <= 1e-14 * r.a);
    assert!((r.a - a_functional(&s, &p, alpha).unwrap()).abs() <= 1e-12 * r.a);
    assert!((r.grad_v_l2 - grad_l2_norm(&s.v)).abs() <= 1e-14);
    assert!((r.q_l2 - l2_norm(&q_force(&s.phi, &p))).abs() <= 1e-12 * r.q_l2);
}

#[test]
fn equilibrium_trajectory_audits_to_zero() {
    let g = make_grid(16).unwrap();
    let traj = run(
        &State::equilibrium(&g, 0.1),
        &Params::default(),
        &StepConfig::new(1e-3, 0.02).unwrap(),
    )
    .unwrap();
    let audit = energy_audit(&traj.records, Quadrature::Left).unwrap();
    assert_eq!(audit.residuals.len(), 20);
    assert!(audit.max_abs <= 1e-12);
}

#[test]
fn stokes_audit_matches_scalar_recurrence() {
    let g = make_grid(16).unwrap();
    let v = VectorField::new(Field::from_fn(&g, |_, y| (2.0 * PI * y).sin()), Field::zeros(&g));
    let s0 = State::new(v, Field::zeros(&g), 0.0).unwrap();
    let p = Params::new(0.0, 0.8, 0.0, 1.0, 1.0, 1.0).unwrap();
    let dt = 1e-3;
    let traj = run(&s0, &p, &StepConfig::new(dt, 0.05).unwrap()).unwrap();
    let audit = energy_audit(&traj.records, Quadrature::Left).unwrap();
    // E_m = E_0 ρ^{2m} + 1/4, D_m = 2ν|k|² (E_m − 1/4), ρ = 1/(1 + dt ν|k|²).
    let nu_k2 = 0.5 * p.mu4() * (2.0 * PI).powi(2);
    let rho: f64 = 1.0 / (1.0 + dt * nu_k2);
    let kinetic0 = 0.25;
    for (m, r) in audit.residuals.iter().enumerate() {
        let e = kinetic0 * rho.powi(2 * m as i32);
        let expect = e * (rho * rho - 1.0) / dt + 2.0 * nu_k2 * e;
        assert!((r - expect).abs() <= 1e-9 * expect.abs(), "m {m}: {r} vs {expect}");
    }
}

#[test]
fn audit_rejects_short_or_uneven_series() {
    let rec = |t| DiagnosticsRecord {
        t,
        ..Default::default()
    };
    assert!(matches!(
        energy_audit(&[rec(0.0)], Quadrature::Left),
        Err(Error::Precondition(_))
    ));
    let uneven = [rec(0.0), rec(0.1), rec(0.3)];
    assert!(matches!(
        energy_audit(&uneven, Quadrature::Left),
        Err(Error::NonUniformSpacing { index: 2 })
    ));
}

#[test]
fn algebraic_fit_recovers_exponent_and_theta() {
    let s = series(|t| 3.0 * (1.0 + t).powf(-2.0), 0.0, 50.0, 200);
    let fit = fit_decay_rate(&s, (1.0, 50.0)).unwrap();
    assert_eq!(fit.model, DecayModel::Algebraic);
    assert!((fit.exponent - 2.0).abs() <= 1e-6);
    assert!((fit.theta_implied.unwrap() - 0.4).abs() <= 1e-6);
    assert!(fit.r_squared > 0.999_999);
    assert!((fit.log_prefactor - 3f64.ln()).abs() < 1e-6);
}

#[test]
fn exponential_fit_recovers_rate() {
    let s = series(|t| 0.5 * (-3.0 * t).exp(), 0.0, 5.0, 100);
    let fit = fit_decay_rate(&s, (0.0, 5.0)).unwrap();
    assert_eq!(fit.model, DecayModel::Exponential);
    assert!((fit.exponent - 3.0).abs() <= 1e-6);
    assert_eq!(fit.theta_implied, None);
}

#[test]
fn fit_rejects_bad_input() {
    let s = series(|t| (-t).exp(), 0.0, 1.0, 20);
    assert!(fit_decay_rate(&s, (0.5, 0.5)).is_err());
    assert!(fit_decay_rate(&s, (0.0, 0.3)).is_err());
    let mut bad = s.clone();
    bad[5].1 = 0.0;
    assert!(matches!(fit_decay_rate(&bad, (0.0, 1.0)), Err(Error::Series(_))));
}

#[test]
fn tail_window_skips_round_off() {
    let mut s = series(|t| (-t).exp(), 0.0, 30.0, 301);
    for p in s.iter_mut().filter(|p| p.0 > 20.0) {
        p.1 = 0.0;
    }
    let (a, b) = tail_window(&s, 1e-11).unwrap();
    assert!((a - 10.0).abs() < 1e-9 && (b - 20.0).abs() < 1e-9);
    assert_eq!(tail_window(&s[..5], 1e-11), None);
}

#[test]
fn convergence_report_cases() {
    let g = make_grid(16).unwrap();
    let eq = State::equilibrium(&g, 0.25);
    let report = convergence_report(&[eq.clone(), eq.clone()], &Field::constant(&g, 0.25)).unwrap();
    assert!(report.v_h1.iter().chain(&report.phi_h4).all(|&x| x <= 1e-12));
    assert!(report.v_fit.is_none());

    let err = convergence_report(&[eq], &Field::constant(&g, 0.5)).unwrap_err();
    assert!(matches!(err, Error::MeanMismatch { .. }));
    assert!(convergence_report(&[], &Field::zeros(&g)).is_err());
}
