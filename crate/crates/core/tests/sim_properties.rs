mod common;

use common::*;
use mrac_core::lti::{Polynomial, StateSpace};
use mrac_core::sim::*;
use mrac_core::Scheme;
use nalgebra::DVector;

/// `x' = [[-0.5, 2], [-2, -0.5]] x`, solved in closed form.
fn rotating_decay(t: f64, x0: [f64; 2]) -> [f64; 2] {
    let (s, c) = (2.0 * t).sin_cos();
    let k = (-0.5 * t).exp();
    [k * (c * x0[0] + s * x0[1]), k * (-s * x0[0] + c * x0[1])]
}

fn global_error(h: f64) -> f64 {
    let steps = (10.0 / h).round() as usize;
    let x = integrate_fixed(
        |_, x, d| {
            d[0] = -0.5 * x[0] + 2.0 * x[1];
            d[1] = -2.0 * x[0] - 0.5 * x[1];
        },
        0.0,
        &[1.0, 0.5],
        h,
        steps,
    );
    let want = rotating_decay(steps as f64 * h, [1.0, 0.5]);
    ((x[0] - want[0]).powi(2) + (x[1] - want[1]).powi(2)).sqrt()
}

#[test]
fn rk4_convergence_slope() {
    let hs: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
    let pts: Vec<(f64, f64)> = hs.iter().map(|&h| (h.ln(), global_error(h).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn richardson_ratio_on_closed_loop() {
    // smooth nominal run: e(T) error against a dt/4 reference shrinks ~16x
    // per halving
    let run = |dt: f64| {
        let mut sc = aircraft_scenario(Scheme::OfbXm, RefInput::Sines(vec![(300.0, 0.3)]));
        sc.theta0 = ParamInit::Scale(1.02);
        sc.rho0 = RhoInit::Scale(1.0);
        sc.adapt = false;
        sc.horizon = 4.0;
        sc.dt = dt;
        *Simulation::new(sc).unwrap().integrate().y.last().unwrap()
    };
    let fine = run(0.0025 / 4.0);
    let e1 = (run(0.01) - fine).abs();
    let e2 = (run(0.005) - fine).abs();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio} ({e1:e}, {e2:e})");
}

#[test]
fn integration_is_deterministic() {
    let bytes = || {
        let mut sc = aircraft_scenario(Scheme::OfbYm, RefInput::Sines(vec![(300.0, 0.3), (250.0, 0.5)]));
        sc.horizon = 5.0;
        let tr = Simulation::new(sc).unwrap().integrate();
        let mut out = Vec::new();
        tr.write_csv(&mut out, 1).unwrap();
        out
    };
    let a = bytes();
    assert!(a.len() > 5000 * 20);
    assert_eq!(a, bytes());
}

#[test]
fn zero_input_keeps_the_loop_at_rest() {
    for scheme in Scheme::ALL {
        let mut sc = aircraft_scenario(scheme, RefInput::Const(0.0));
        sc.horizon = 5.0;
        let tr = Simulation::new(sc).unwrap().integrate();
        for series in [&tr.y, &tr.y_m, &tr.e, &tr.u, &tr.u_m, &tr.eps_over_m] {
            assert!(series.iter().all(|&v| v == 0.0), "{scheme}");
        }
        assert!(tr.v.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn state_layout_of_the_case_study() {
    let sim = Simulation::new(aircraft_scenario(Scheme::OfbYm, RefInput::Const(300.0))).unwrap();
    // 4 + 4 + 4·3 filters + 15·2 ζ + 2 ξ + 15 θ + 1 ρ
    assert_eq!(sim.state_dim(), 68);
    assert_eq!(sim.layout().x, 0..4);
    assert_eq!(sim.layout().x_m, 4..8);
    assert_eq!(sim.theta_range(), 52..67);
    assert_eq!(sim.rho_index(), 67);

    let expect = [(Scheme::SfbXm, 4 + 4 + 9 * 2 + 2 + 9 + 1), (Scheme::SfbYm, 8 + 6 + 12 * 2 + 2 + 12 + 1), (Scheme::OfbXm, 8 + 6 + 12 * 2 + 2 + 12 + 1)];
    for (scheme, dim) in expect {
        let sim = Simulation::new(aircraft_scenario(scheme, RefInput::Const(300.0))).unwrap();
        assert_eq!(sim.state_dim(), dim, "{scheme}");
    }
}

#[test]
fn leader_signals_stay_within_their_envelope() {
    // The stabilized leader driven by a bounded input: after the transient
    // ‖x_m‖ never exceeds 10× its late-time envelope.
    let mut sc = aircraft_scenario(Scheme::OfbYm, RefInput::Sines(vec![(300.0, 0.3), (250.0, 0.5), (200.0, 0.7)]));
    sc.adapt = false;
    sc.theta0 = ParamInit::Scale(1.0);
    sc.horizon = 100.0;
    let tr = Simulation::new(sc).unwrap().integrate();
    let late = tr.t.iter().zip(&tr.y_m).filter(|(t, _)| **t > 50.0).fold(0.0_f64, |m, (_, y)| m.max(y.abs()));
    let all = tr.y_m.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    assert!(late > 0.0 && all <= 10.0 * late, "{all} vs {late}");
    assert!(tr.metrics().bounded);
}

#[test]
fn reference_input_values() {
    assert_eq!(RefInput::Const(300.0).eval(17.3), 300.0);
    let s = RefInput::Sines(vec![(300.0, 0.3), (250.0, 0.5), (200.0, 0.7)]);
    assert_eq!(s.eval(0.0), 0.0);
    let one = RefInput::Sines(vec![(300.0, 0.3)]);
    assert!((one.eval(std::f64::consts::PI / 0.6) - 300.0).abs() < 1e-12);
}

#[test]
fn zero_trace_metrics() {
    let mut tr = Trace::with_capacity(Scheme::SfbXm, 0.1, 10);
    for k in 0..10 {
        tr.push(k as f64 * 0.1, &Signals { m: 1.0, ..Signals::default() }, 0.0, 0.0, 0.0);
    }
    let m = tr.metrics();
    assert_eq!(
        (m.tail_rms_e, m.max_abs_e, m.v_violation_max, m.l2_integral, m.v0),
        (0.0, 0.0, 0.0, 0.0, 0.0)
    );
    assert_eq!(m.bounds, SignalBounds::default());
}

#[test]
fn wrong_sign_divergence_returns_partial_trace() {
    let plant = StateSpace::from_rows(&[&[1.0]], &[1.0], &[1.0]).unwrap();
    let reference = StateSpace::from_rows(&[&[-1.0]], &[1.0], &[1.0]).unwrap();
    let sc = Scenario {
        plant,
        design_tf: None,
        reference,
        k1m: DVector::zeros(1),
        ref_input: RefInput::Const(1.0),
        scheme: Scheme::SfbXm,
        pm: Polynomial::new(vec![1.0, 1.0]),
        lambda: None,
        lambda_e: None,
        gamma: GammaSpec::Scalar(10.0),
        gamma_rho: 10.0,
        sign_kp: -1.0,
        theta0: ParamInit::Value(DVector::zeros(3)),
        rho0: RhoInit::Value(1.0),
        x0: None,
        xm0: None,
        horizon: 50.0,
        dt: 1e-3,
        adapt: true,
    };
    let tr = Simulation::new(sc.clone()).unwrap().integrate();
    let div = tr.diverged.as_ref().expect("wrong sign should diverge");
    assert!(div.t < 50.0);
    assert!(!tr.completed() && !tr.metrics().completed);
    let mut csv = Vec::new();
    tr.write_csv(&mut csv, 10).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("# partial trace"));

    let mut right = sc;
    right.sign_kp = 1.0;
    let tr = Simulation::new(right).unwrap().integrate();
    assert!(tr.completed());
    let m = tr.metrics();
    assert!(m.bounded && m.tail_rms_e < 0.1 * m.max_abs_e, "{m:?}");
}

#[test]
fn csv_layout() {
    let mut sc = aircraft_scenario(Scheme::SfbXm, RefInput::Const(300.0));
    sc.horizon = 1.0;
    sc.dt = 0.01;
    let tr = Simulation::new(sc).unwrap().integrate();
    assert_eq!(tr.len(), 101);
    let mut out = Vec::new();
    tr.write_csv(&mut out, 7).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    // rows 0, 7, …, 98 plus the final sample
    assert_eq!(lines.len(), 1 + 15 + 1);
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last.len(), 10);
    assert_eq!(last[0], 1.0);
    assert_eq!(last[1], *tr.y.last().unwrap());
}
