mod common;

use std::f64::consts::PI;

use common::{max_abs, sine_x1};
use smaflow_core::init::{random_band_scalar, random_band_velocity, taylor_green};
use smaflow_core::integrator::{explicit_tendency, imex_step, run, Stepper};
use smaflow_core::model::total_energy;
use smaflow_core::spectral::{l2_norm, vector_l2_norm};
use smaflow_core::{make_grid, Complex64, Error, Field, Params, Scheme, State, StepConfig, VectorField};

fn generic_params() -> Params {
    Params::new(0.1, 1.0, 0.1, 1.0, 1.0, 0.5).unwrap()
}

fn generic_state(n: usize, amplitude: f64) -> State {
    let g = make_grid(n).unwrap();
    let v = random_band_velocity(&g, 2, amplitude, 21).unwrap();
    let phi = random_band_scalar(&g, 2, amplitude, 22).unwrap();
    State::new(v, phi, 0.0).unwrap()
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let g = make_grid(16).unwrap();
    let s = State::equilibrium(&g, 0.7);
    let p = generic_params();
    let t = explicit_tendency(&s, &p);
    assert!(vector_l2_norm(&t.velocity) < 1e-15 && l2_norm(&t.layer) < 1e-15);
    for scheme in [Scheme::Imex1, Scheme::Imex2] {
        let c = StepConfig::new(1e-3, 1.0).unwrap().with_scheme(scheme);
        let next = imex_step(&s, &p, &c).unwrap();
        assert!(max_abs(next.v[0].physical()) < 1e-14 && max_abs(next.v[1].physical()) < 1e-14);
        assert!(next.phi.physical().iter().all(|x| (x - 0.7).abs() < 1e-14));
        assert_eq!(next.t, 1e-3);
    }
}

#[test]
fn taylor_green_advection_is_a_gradient() {
    let g = make_grid(32).unwrap();
    let s = State::new(taylor_green(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
    let p = Params::new(0.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    let t = explicit_tendency(&s, &p);
    assert!(vector_l2_norm(&t.velocity) <= 1e-11);
}

#[test]
fn layer_tendency_matches_closed_form() {
    let g = make_grid(32).unwrap();
    let a = 0.1;
    let p = Params::new(0.0, 1.0, 0.0, 1.0, 2.0, 1.0).unwrap();
    let s = State::new(VectorField::zeros(&g), sine_x1(&g, a), 0.0).unwrap();
    let t = explicit_tendency(&s, &p);
    let c = 2.0 * PI * a;
    let expect = common::samples(32, |x, _| {
        let th = 2.0 * PI * x;
        2.0 * 2.0 * PI * (c * th.sin() - 3.0 * c.powi(3) * th.cos().powi(2) * th.sin())
    });
    assert!(common::max_abs_diff(t.layer.physical(), &expect) < 1e-11);
}

fn single_velocity_mode(n: usize, i1: usize, i2: usize) -> State {
    let g = make_grid(n).unwrap();
    // Solenoidal mode: v ∥ k⊥ with k = (0, k2) gives v = (a(x2), 0).
    assert_eq!(i1, 0);
    let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
    c[i2] = Complex64::new(0.0, -0.5);
    c[n - i2] = Complex64::new(0.0, 0.5);
    let v = VectorField::new(Field::from_spectral(&g, c), Field::zeros(&g));
    State::new(v, Field::zeros(&g), 0.0).unwrap()
}

#[test]
fn stokes_mode_follows_scalar_recurrence() {
    let n = 16;
    let p = Params::new(0.0, 1.3, 0.0, 1.0, 1.0, 1.0).unwrap();
    let dt = 1e-3;
    let c = StepConfig::new(dt, 1.0).unwrap();
    let mut stepper = Stepper::new(p, &c).unwrap();
    let s0 = single_velocity_mode(n, 0, 2);
    let k2 = (2.0 * PI * 2.0f64).powi(2);
    let factor = 1.0 / (1.0 + dt * 0.5 * p.mu4() * k2);
    let a0 = s0.v[0].spectral()[2];
    let mut s = s0;
    for m in 1..=200 {
        s = stepper.step(&s).unwrap();
        let expect = a0 * factor.powi(m);
        let got = s.v[0].spectral()[2];
        assert!(
            (got - expect).norm_sqr().sqrt() <= 1e-13 * a0.norm_sqr().sqrt(),
            "step {m}: {got} vs {expect}"
        );
    }
}

#[test]
fn implicit_update_follows_per_mode_formula() {
    let s = generic_state(16, 0.1);
    let p = generic_params();
    let dt = 2e-3;
    let c = StepConfig::new(dt, 1.0).unwrap();
    let tend = explicit_tendency(&s, &p);
    let next = imex_step(&s, &p, &c).unwrap();
    let g = s.grid().clone();
    let n = g.n();
    let (phi, nphi, out) = (s.phi.spectral(), tend.layer.spectral(), next.phi.spectral());
    let (v, nv, vout) = (s.v[1].spectral(), tend.velocity[1].spectral(), next.v[1].spectral());
    for i1 in 0..n {
        for i2 in 0..n {
            let idx = i1 * n + i2;
            if idx == 0 {
                assert!((out[0] - phi[0]).norm_sqr().sqrt() <= 1e-17);
                continue;
            }
            let k2 = g.k_squared(i1, i2);
            let expect = (phi[idx] + nphi[idx] * dt) / (1.0 + dt * p.lambda() * p.k() * k2 * k2);
            assert!((out[idx] - expect).norm_sqr().sqrt() <= 1e-15, "phi mode {idx}");
            let expect = (v[idx] + nv[idx] * dt) / (1.0 + dt * 0.5 * p.mu4() * k2);
            assert!((vout[idx] - expect).norm_sqr().sqrt() <= 1e-15, "v mode {idx}");
        }
    }
}

#[test]
fn zero_horizon_keeps_only_the_initial_record() {
    let s = generic_state(16, 0.1);
    let c = StepConfig::new(1e-3, 0.0).unwrap();
    let traj = run(&s, &generic_params(), &c).unwrap();
    assert_eq!(traj.records.len(), 1);
    assert_eq!(traj.records[0].t, 0.0);
    assert_eq!(traj.final_state.t, 0.0);
}

#[test]
fn taylor_green_energy_tracks_exact_decay() {
    let g = make_grid(32).unwrap();
    let p = Params::new(0.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    let s0 = State::new(taylor_green(&g, 1.0), Field::zeros(&g), 0.0).unwrap();
    // Backward Euler would lose ~0.8% of the kinetic energy by t = 0.05 at
    // this step; the second-order scheme stays well inside 0.1%.
    let mut c = StepConfig::new(1e-4, 0.05).unwrap().with_scheme(Scheme::Imex2);
    c.snapshot_every = 50;
    let traj = run(&s0, &p, &c).unwrap();
    let ke0 = 0.25;
    for (_, s) in &traj.snapshots {
        let ke = 0.5 * vector_l2_norm(&s.v).powi(2);
        let exact = ke0 * (-8.0 * PI * PI * p.mu4() * s.t).exp();
        assert!((ke - exact).abs() <= 1e-3 * exact, "t {}: {ke} vs {exact}", s.t);
    }
}

#[test]
fn generic_run_dissipates_and_conserves() {
    let s0 = generic_state(32, 0.1);
    let p = generic_params();
    let c = StepConfig::new(1e-4, 0.05).unwrap();
    let traj = run(&s0, &p, &c).unwrap();
    assert_eq!(traj.records.len(), 501);
    let r0 = traj.records[0];
    for pair in traj.records.windows(2) {
        assert!(pair[1].t > pair[0].t);
        assert!(pair[1].energy <= pair[0].energy + 1e-8);
    }
    for r in &traj.records {
        assert!((r.mean_v[0] - r0.mean_v[0]).abs() <= 1e-12);
        assert!((r.mean_v[1] - r0.mean_v[1]).abs() <= 1e-12);
        assert!((r.mean_phi - r0.mean_phi).abs() <= 1e-12);
        assert!(r.divergence <= 1e-11, "divergence {}", r.divergence);
    }
    assert_eq!(total_energy(&s0, &p), r0.energy);
}

#[test]
fn runs_are_deterministic() {
    let s0 = generic_state(16, 0.1);
    let c = StepConfig::new(1e-3, 0.02).unwrap().with_scheme(Scheme::Imex2);
    let a = run(&s0, &generic_params(), &c).unwrap();
    let b = run(&s0, &generic_params(), &c).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.phi.physical(), b.final_state.phi.physical());
}

#[test]
fn blow_up_is_reported_with_partial_trajectory() {
    let g = make_grid(16).unwrap();
    let p = Params::new(0.0, 1.0, 0.0, 1e-3, 1.0, 0.05).unwrap();
    let phi = random_band_scalar(&g, 3, 5.0, 1).unwrap();
    let s0 = State::new(VectorField::zeros(&g), phi, 0.0).unwrap();
    let c = StepConfig::new(0.5, 100.0).unwrap();
    let failure = run(&s0, &p, &c).unwrap_err();
    match failure.error {
        Error::Divergence { step, value, .. } => {
            assert!(step >= 1);
            assert!(!value.is_finite());
        }
        other => panic!("unexpected error {other}"),
    }
    assert!(!failure.partial.records.is_empty());
}

#[test]
fn step_config_rejects_bad_values() {
    assert!(StepConfig::new(0.0, 1.0).is_err());
    assert!(StepConfig::new(1e-3, -1.0).is_err());
    let mut c = StepConfig::new(1e-3, 1.0).unwrap();
    c.diag_every = 0;
    assert!(c.validate().is_err());
    assert_eq!(StepConfig::new(0.1, 1.0).unwrap().steps_from(0.0), 10);
    assert_eq!(StepConfig::new(0.3, 1.0).unwrap().steps_from(0.0), 4);
    assert!("imex3".parse::<Scheme>().is_err());
}

/// Max-norm distance between final states of two runs.
fn distance(a: &State, b: &State) -> f64 {
    let dv = vector_l2_norm(&(&a.v - &b.v));
    dv + l2_norm(&(&a.phi - &b.phi))
}

fn temporal_order(scheme: Scheme) -> f64 {
    let s0 = generic_state(16, 0.1);
    // Small λ keeps dt·λK|k|⁴ moderate: Crank–Nicolson does not damp stiff
    // modes, and their ringing would mask the asymptotic order.
    let p = Params::new(0.1, 1.0, 0.1, 1.0, 0.01, 1.0).unwrap();
    let t_end = 0.2;
    let solve = |dt: f64| {
        let mut c = StepConfig::new(dt, t_end).unwrap().with_scheme(scheme);
        c.diag_every = 1_000_000;
        run(&s0, &p, &c).unwrap().final_state
    };
    let dt = 1e-3;
    let reference = solve(dt / 16.0);
    let e1 = distance(&solve(dt), &reference);
    let e2 = distance(&solve(dt / 2.0), &reference);
    (e1 / e2).log2()
}

#[test]
fn imex1_is_first_order() {
    let slope = temporal_order(Scheme::Imex1);
    assert!((slope - 1.0).abs() <= 0.25, "slope {slope}");
}

#[test]
fn imex2_is_second_order() {
    let slope = temporal_order(Scheme::Imex2);
    assert!((slope - 2.0).abs() <= 0.25, "slope {slope}");
}
