mod common;

use common::*;
use mrac_core::adaptive::*;
use mrac_core::design::NominalDesign;
use mrac_core::lti::{realize_wm, Polynomial};
use mrac_core::sim::{ParamInit, RefInput, Rk4, Simulation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn spd(p: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, p * p).prop_map(move |v| {
        let l = DMatrix::from_vec(p, p, v);
        &l * l.transpose() + DMatrix::identity(p, p) * 0.1
    })
}

fn vec_of(p: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, p)
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn normalization_and_rate_bounds(
        (gamma_mat, zeta, theta) in (1usize..=8).prop_flat_map(|p| (spd(p), vec_of(p, 100.0), vec_of(p, 100.0))),
        e in -50.0..50.0f64,
        rho in -5.0..5.0f64,
        wm in -100.0..100.0f64,
        gamma in 0.01..10.0f64,
        sign in prop_oneof![Just(1.0), Just(-1.0)],
    ) {
        let est = estimation_error(e, rho, &theta, &zeta, wm);
        prop_assert!(est.m >= 1.0);
        let zn = zeta.iter().map(|z| z * z).sum::<f64>().sqrt();
        prop_assert!(zn <= est.m && est.xi.abs() <= est.m);
        prop_assert_eq!(est.eps, e + rho * est.xi);

        let gains = Gains::new(gamma_mat, gamma, sign).unwrap();
        let (td, rd) = adaptation_rates(&est, &zeta, &gains);
        let bound = gains.gamma_norm() * est.eps.abs() / est.m * (zn / est.m);
        prop_assert!(td.norm() <= bound * (1.0 + 1e-12) + 1e-300);
        prop_assert!(bound <= gains.gamma_norm() * est.eps.abs() / est.m * (1.0 + 1e-12));
        prop_assert!(rd.abs() <= gamma * est.eps.abs() / est.m * (1.0 + 1e-12));
    }

    #[test]
    fn lyapunov_is_a_positive_definite_weighted_norm(
        (gamma_mat, theta_star, dtheta) in (1usize..=6).prop_flat_map(|p| (spd(p), vec_of(p, 10.0), vec_of(p, 1.0))),
        rho_star in prop_oneof![0.1..3.0f64, -3.0..-0.1f64],
        drho in -1.0..1.0f64,
        gamma in 0.1..10.0f64,
    ) {
        let nominal = NominalDesign {
            scheme: Scheme::SfbXm,
            theta_star: DVector::from_vec(theta_star.clone()),
            rho_star,
        };
        let gains = Gains::new(gamma_mat.clone(), gamma, 1.0).unwrap();
        prop_assert_eq!(lyapunov_v(&theta_star, rho_star, &nominal, &gains), 0.0);
        let theta: Vec<f64> = theta_star.iter().zip(&dtheta).map(|(a, b)| a + b).collect();
        let v = lyapunov_v(&theta, rho_star + drho, &nominal, &gains);
        let d = DVector::from_vec(dtheta);
        let want = rho_star.abs() * d.dot(&(gamma_mat.try_inverse().unwrap() * &d)) + drho * drho / gamma;
        prop_assert!(v >= 0.0);
        prop_assert!((v - want).abs() <= 1e-8 * want.max(1e-12));
    }
}

fn zeta_outputs(sim: &Simulation, state: &[f64]) -> Vec<f64> {
    let c = sim.controller();
    let ctrl = &state[sim.layout().controller.clone()];
    let view = c.view(ctrl);
    let wm = realize_wm(&sim.scenario().pm, c.param_dim()).unwrap();
    wm.outputs(view.zeta_states()).collect()
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |a, b| a.max(b.abs()))
}

/// V along adaptive runs of the aircraft: no step increases it beyond the
/// integrator tolerance, and the running L² integral of ε/m stays below V(0)/2.
#[test]
fn lyapunov_decreases_for_every_scheme() {
    for scheme in Scheme::ALL {
        let mut sc = aircraft_scenario(scheme, RefInput::Sines(vec![(300.0, 0.3)]));
        sc.horizon = 40.0;
        let tr = Simulation::new(sc).unwrap().integrate();
        let m = tr.metrics();
        assert!(m.completed);
        let worst = tr
            .v
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].max(1.0))
            .fold(0.0_f64, f64::max);
        assert!(worst <= 1e-8, "{scheme}: relative V increase {worst:e}");
        assert!(m.l2_integral <= m.v0 / 2.0 + 1e-6 * 40.0, "{scheme}: {m:?}");
    }
}

#[test]
fn lyapunov_decreases_on_random_small_plants() {
    use rand::{rngs::StdRng, Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..6 {
        let den = Polynomial::from_roots(&[rng.random_range(-3.0..-0.3), rng.random_range(-3.0..-0.3)]);
        let zero = rng.random_range(-3.0..-0.3);
        let plant = canonical(rng.random_range(0.5..2.0), &Polynomial::from_roots(&[zero]), &den);
        let dm = Polynomial::from_roots(&[rng.random_range(-3.0..-0.5), rng.random_range(-3.0..-0.5)]);
        let reference = canonical(1.0, &Polynomial::one(), &dm);
        for scheme in Scheme::ALL {
            let mut sc = small_scenario(plant.clone(), reference.clone(), scheme, 1);
            sc.adapt = true;
            sc.gamma = mrac_core::sim::GammaSpec::Scalar(rng.random_range(0.5..5.0));
            sc.gamma_rho = rng.random_range(0.5..5.0);
            sc.theta0 = ParamInit::Scale(rng.random_range(0.5..1.5));
            sc.horizon = 20.0;
            let tr = Simulation::new(sc).unwrap().integrate();
            let m = tr.metrics();
            let worst = tr
                .v
                .windows(2)
                .map(|w| (w[1] - w[0]) / w[0].max(1.0))
                .fold(0.0_f64, f64::max);
            assert!(m.completed && worst <= 1e-8, "{scheme}: {worst:e}");
            assert!(m.l2_integral <= m.v0 / 2.0 + 1e-6 * 20.0);
        }
    }
}

#[test]
fn swap_term_vanishes_for_constant_parameters() {
    for scheme in Scheme::ALL {
        let mut sc = aircraft_scenario(scheme, RefInput::Const(300.0));
        sc.adapt = false;
        sc.horizon = 20.0;
        let sim = Simulation::new(sc).unwrap();
        let mut state = sim.initial_state();
        let dim = state.len();
        let mut d = vec![0.0; dim];
        let mut om = vec![0.0; sim.controller().param_dim()];
        let mut om2 = om.clone();
        let mut rk = Rk4::new(dim);
        let mut worst = 0.0_f64;
        for k in 0..5000 {
            let t = k as f64 * 1e-3;
            let s = sim.derivative(t, &state, &mut d, &mut om);
            worst = worst.max(s.xi.abs());
            rk.step_with_k1(|tt, x, dx| { sim.derivative(tt, x, dx, &mut om2); }, t, &mut state, 1e-3, &d.clone());
        }
        // exact up to rounding of the identical filter arithmetic
        assert!(worst < 1e-9, "{scheme}: {worst:e}");
    }
}

/// From perturbed ζ and ξ filter states, with θ frozen, ξ is the free
/// response of `W_m = 1/(s+1)^2` and decays like `t e^{-t}`.
#[test]
fn swap_term_decays_at_the_slowest_pm_root() {
    let mut sc = aircraft_scenario(Scheme::OfbYm, RefInput::Const(300.0));
    sc.adapt = false;
    let sim = Simulation::new(sc).unwrap();
    let lay = sim.controller().layout().clone();
    let off = sim.layout().controller.start;
    let mut state = sim.initial_state();
    for (k, i) in lay.zeta.clone().chain(lay.xi.clone()).enumerate() {
        state[off + i] = ((k * 37 % 11) as f64 - 5.0) * 0.1;
    }
    let dim = state.len();
    let (mut d, mut om) = (vec![0.0; dim], vec![0.0; 15]);
    let mut om2 = om.clone();
    let mut rk = Rk4::new(dim);
    let h = 1e-3;
    let mut samples = Vec::new();
    for k in 0..=20_000 {
        let t = k as f64 * h;
        let s = sim.derivative(t, &state, &mut d, &mut om);
        if k % 100 == 0 {
            samples.push((t, s.xi));
        }
        let k1 = d.clone();
        rk.step_with_k1(|tt, x, dx| { sim.derivative(tt, x, dx, &mut om2); }, t, &mut state, h, &k1);
    }
    assert!(samples[0].1.abs() > 0.1);
    // envelope fit of log|ξ| - log(1 + t) on t in [2, 20]
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, x)| *t >= 2.0 && x.abs() > 1e-14)
        .map(|(t, x)| (*t, x.abs().ln() - (1.0 + t).ln()))
        .collect();
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let slope = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum::<f64>()
        / pts.iter().map(|(t, _)| (t - mt).powi(2)).sum::<f64>();
    assert!((slope + 1.0).abs() < 0.15, "decay rate {slope}");
    let last = samples.last().unwrap().1.abs();
    assert!(last < 1e-6 * samples[0].1.abs());
}

/// `ε = ρ* θ̃ᵀζ + ρ̃ ξ + δ` along an adaptive run, with δ the decaying effect
/// of a nonzero initial plant state.
#[test]
fn estimation_error_has_the_linear_form() {
    let run = |x0: Option<DVector<f64>>| {
        let mut sc = aircraft_scenario(Scheme::OfbYm, RefInput::Const(300.0));
        sc.x0 = x0;
        sc.horizon = 60.0;
        let sim = Simulation::new(sc).unwrap();
        let nominal = sim.design().nominal.clone();
        let mut state = sim.initial_state();
        let dim = state.len();
        let (mut d, mut om) = (vec![0.0; dim], vec![0.0; 15]);
        let mut om2 = om.clone();
        let mut rk = Rk4::new(dim);
        let h = 1e-3;
        let mut delta = Vec::new();
        let mut eps_scale = 0.0_f64;
        for k in 0..=60_000 {
            let t = k as f64 * h;
            let s = sim.derivative(t, &state, &mut d, &mut om);
            if k % 50 == 0 {
                let zeta = zeta_outputs(&sim, &state);
                let theta = &state[sim.theta_range()];
                let rho = state[sim.rho_index()];
                let lin: f64 = nominal.rho_star
                    * theta.iter().zip(nominal.theta_star.iter()).zip(&zeta).map(|((a, b), z)| (a - b) * z).sum::<f64>()
                    + (rho - nominal.rho_star) * s.xi;
                delta.push((t, s.eps - lin));
                eps_scale = eps_scale.max(s.eps.abs());
            }
            let k1 = d.clone();
            rk.step_with_k1(|tt, x, dx| { sim.derivative(tt, x, dx, &mut om2); }, t, &mut state, h, &k1);
        }
        (delta, eps_scale)
    };

    let (delta, scale) = run(None);
    let worst = max_abs(delta.iter().map(|(_, d)| *d));
    assert!(worst <= 1e-8 * scale, "zero initial state: δ {worst:e}, ε scale {scale:e}");

    let (delta, _) = run(Some(DVector::from_column_slice(&[0.0, 0.0, 0.0, 0.05])));
    let early = max_abs(delta.iter().filter(|(t, _)| *t < 5.0).map(|(_, d)| *d));
    let late = max_abs(delta.iter().filter(|(t, _)| *t > 50.0).map(|(_, d)| *d));
    assert!(early > 1e-4, "δ too small to test: {early:e}");
    assert!(late < 1e-3 * early, "δ did not decay: {early:e} -> {late:e}");
}

#[test]
fn regressor_layouts() {
    assert_eq!(
        Scheme::ALL.map(|s| s.param_dim(4)),
        [9, 12, 12, 15]
    );
    let meas = Measurements { x: Some(&[2.0]), y: 2.0, x_m: Some(&[3.0]), y_m: 3.0, u_m: 4.0 };
    let w = build_regressor(Scheme::SfbXm, 1, &meas, &FilterSignals::default()).unwrap();
    assert_eq!(w.as_slice(), &[2.0, 3.0, 4.0]);

    let (o1, o2, ou, oy) = ([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [8.0, 9.0, 10.0], [11.0, 12.0, 13.0]);
    let meas = Measurements { x: None, y: 7.0, x_m: None, y_m: 14.0, u_m: 15.0 };
    let f = FilterSignals { omega1: &o1, omega2: &o2, omega_um: &ou, omega_ym: &oy };
    let w = build_regressor(Scheme::OfbYm, 4, &meas, &f).unwrap();
    let want: Vec<f64> = (1..=15).map(f64::from).collect();
    assert_eq!(w.as_slice(), want.as_slice());

    let err = build_regressor(Scheme::OfbXm, 4, &meas, &f).unwrap_err();
    assert!(err.to_string().contains("x_m"), "{err}");
}

#[test]
fn trivial_law_values() {
    assert_eq!(control_output(&[0.0; 3], &[1.0, 2.0, 3.0]), 0.0);
    let est = estimation_error(0.0, 2.0, &[1.0, 1.0], &[0.0, 0.0], 0.0);
    assert_eq!((est.eps, est.xi, est.m), (0.0, 0.0, 1.0));

    let g1 = Gains::scalar(1, 1.0, 1.0, 1.0).unwrap();
    let est = EstimationError { eps: 1.0, xi: 1.0, m: 3f64.sqrt() };
    let (td, rd) = adaptation_rates(&est, &[1.0], &g1);
    assert!((td[0] + 1.0 / 3.0).abs() < 1e-15 && (rd + 1.0 / 3.0).abs() < 1e-15);
    let zero = EstimationError { eps: 0.0, ..est };
    let (td, rd) = adaptation_rates(&zero, &[1.0], &g1);
    assert!(td[0] == 0.0 && rd == 0.0);

    // Γ = 5I, γ = 5: five times the unit-gain rates
    let zeta = [0.3, -1.2, 2.0];
    let est = estimation_error(0.7, -0.02, &[1.0, 2.0, 3.0], &zeta, 0.4);
    let (t1, r1) = adaptation_rates(&est, &zeta, &Gains::scalar(3, 1.0, 1.0, -1.0).unwrap());
    let (t5, r5) = adaptation_rates(&est, &zeta, &Gains::scalar(3, 5.0, 5.0, -1.0).unwrap());
    assert!((t5 - t1 * 5.0).norm() < 1e-14 && (r5 - 5.0 * r1).abs() < 1e-14);

    let nominal = NominalDesign { scheme: Scheme::SfbXm, theta_star: DVector::zeros(3), rho_star: 1.0 };
    let gi = Gains::scalar(3, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(lyapunov_v(&[0.0; 3], 1.0, &nominal, &gi), 0.0);
    assert_eq!(lyapunov_v(&[1.0, 0.0, 0.0], 1.0, &nominal, &gi), 1.0);
}

#[test]
fn first_control_value_is_scaled_nominal() {
    let sc = aircraft_scenario(Scheme::OfbYm, RefInput::Const(300.0));
    let sim = Simulation::new(sc).unwrap();
    let state = sim.initial_state();
    let mut d = vec![0.0; state.len()];
    let mut om = vec![0.0; 15];
    let s = sim.derivative(0.0, &state, &mut d, &mut om);
    // zero filters and states: ω(0) = [0, …, 0, y_m = 0, u_m = 300]
    let th = &sim.design().nominal.theta_star;
    assert_eq!(s.u_m, 300.0);
    assert!((s.u - 1.1 * th[14] * 300.0).abs() < 1e-12);
    let meas = Measurements { x: Some(&[0.0; 4]), y: 0.0, x_m: Some(&[0.0; 4]), y_m: 0.0, u_m: 300.0 };
    let u = sim.controller().control(&meas, &state[sim.layout().controller.clone()], &mut om).unwrap();
    assert_eq!(u, s.u);
    assert!(om[..14].iter().all(|&w| w == 0.0) && om[14] == 300.0);
}
