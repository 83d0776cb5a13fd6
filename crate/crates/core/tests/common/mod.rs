#![allow(dead_code)]

use mrac_core::lti::{Polynomial, RationalTF, StateSpace};
use mrac_core::sim::{GammaSpec, ParamInit, RefInput, RhoInit, Scenario};
use mrac_core::Scheme;
use nalgebra::{DMatrix, DVector, RowDVector};

pub const A_A: [[f64; 4]; 4] = [
    [-0.026373, 0.12687, -12.926, -32.169],
    [-0.25009, -0.80174, 220.55, -0.16307],
    [0.000171, -0.00754, -0.5510, -0.000334],
    [0.0, 0.0, 1.0, 0.0],
];
pub const B_A: [f64; 4] = [0.010887, -0.18577, -0.022966, 0.0];
pub const C_A: [f64; 4] = [0.0, 0.0, 0.0, 1.0];
pub const K_1M: [f64; 4] = [0.003614, -0.306976, 262.056954, 999.941914];

pub fn aircraft() -> StateSpace {
    let rows: Vec<&[f64]> = A_A.iter().map(|r| r.as_slice()).collect();
    StateSpace::from_rows(&rows, &B_A, &C_A).unwrap()
}

/// The published transfer function with its two misprinted coefficients
/// corrected (`0.0989 s` and `-0.0012`).
pub fn printed_tf() -> RationalTF {
    let num = Polynomial::new(vec![-0.0012, -0.0176, -0.023]);
    let den = Polynomial::new(vec![0.0651, 0.0989, 2.1744, 1.3791, 1.0]);
    RationalTF::new(num, den).unwrap()
}

pub fn aircraft_scenario(scheme: Scheme, v_m: RefInput) -> Scenario {
    Scenario {
        plant: aircraft(),
        design_tf: None,
        reference: aircraft(),
        k1m: DVector::from_column_slice(&K_1M),
        ref_input: v_m,
        scheme,
        pm: Polynomial::shifted_power(1.0, 2),
        lambda: Some(Polynomial::shifted_power(2.0, 3)),
        lambda_e: Some(Polynomial::shifted_power(2.0, 3)),
        gamma: GammaSpec::Scalar(5.0),
        gamma_rho: 5.0,
        sign_kp: -1.0,
        theta0: ParamInit::Scale(1.1),
        rho0: RhoInit::Scale(1.1),
        x0: None,
        xm0: None,
        horizon: 200.0,
        dt: 1e-3,
        adapt: true,
    }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Controllable canonical realization of `gain · num/den` (`den` monic,
/// `deg num < deg den`).
pub fn canonical(gain: f64, num: &Polynomial, den: &Polynomial) -> StateSpace {
    let n = den.degree().unwrap();
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            1.0
        } else if i == n - 1 {
            -den.coeff(j)
        } else {
            0.0
        }
    });
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let c = RowDVector::from_fn(n, |_, j| gain * num.coeff(j));
    StateSpace::new(a, b, c).unwrap()
}

/// Frozen nominal scenario for small test systems: `P_m = (s+1)^{n*}`,
/// `Λ = (s+2)^{n-1}`, `Λe = (s+3)^{n-1}`, no leader feedback.
pub fn small_scenario(plant: StateSpace, reference: StateSpace, scheme: Scheme, n_star: usize) -> Scenario {
    let n = plant.order();
    let kp = plant.markov_parameters(n_star)[n_star - 1];
    Scenario {
        plant,
        design_tf: None,
        k1m: DVector::zeros(n),
        reference,
        ref_input: RefInput::Sines(vec![(1.0, 0.7), (0.5, 1.9)]),
        scheme,
        pm: Polynomial::shifted_power(1.0, n_star),
        lambda: Some(Polynomial::shifted_power(2.0, n - 1)),
        lambda_e: Some(Polynomial::shifted_power(3.0, n - 1)),
        gamma: GammaSpec::Scalar(1.0),
        gamma_rho: 1.0,
        sign_kp: kp.signum(),
        theta0: ParamInit::Scale(1.0),
        rho0: RhoInit::Scale(1.0),
        x0: None,
        xm0: None,
        horizon: 10.0,
        dt: 1e-3,
        adapt: false,
    }
}
