use std::ops::Range;

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use super::rk4::Rk4;
use super::scenario::Scenario;
use super::trace::{Divergence, Trace};
use crate::adaptive::{lyapunov_v, Controller, Measurements};
use crate::design::SchemeDesign;
use crate::error::{Error, Result};
use crate::lti::resolvent_apply;

/// States beyond this magnitude are treated as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e10;

/// Offsets inside the closed-loop state `[x | x_m | controller]`; the
/// controller part follows [`crate::adaptive::ControllerLayout`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimLayout {
    pub x: Range<usize>,
    pub x_m: Range<usize>,
    pub controller: Range<usize>,
}

/// Instantaneous closed-loop signals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Signals {
    pub y: f64,
    pub y_m: f64,
    pub e: f64,
    pub u: f64,
    pub u_m: f64,
    pub v_m: f64,
    pub eps: f64,
    pub xi: f64,
    pub m: f64,
}

/// Linear model of the nominal loop (frozen `θ`) from `v_m` to `y` and `y_m`.
#[derive(Debug, Clone)]
pub struct LinearLoop {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c_y: RowDVector<f64>,
    pub c_ym: RowDVector<f64>,
}

impl LinearLoop {
    /// `(H_y(s), H_ym(s))`.
    pub fn eval(&self, s: Complex64) -> Option<(Complex64, Complex64)> {
        let x = resolvent_apply(&self.a, &self.b, s)?;
        let dot = |c: &RowDVector<f64>| c.iter().zip(x.iter()).map(|(ci, xi)| xi * *ci).sum();
        Some((dot(&self.c_y), dot(&self.c_ym)))
    }

    /// Largest `|H_y/(P_m H_ym) − W_m| / |W_m|` over `freqs`, i.e. how far the
    /// loop from `r_m = P_m[y_m]` to `y` is from `W_m`.
    pub fn wm_residual(&self, freqs: &[f64]) -> f64 {
        freqs
            .iter()
            .map(|&w| match self.eval(Complex64::new(0.0, w)) {
                Some((hy, hym)) if hym.norm() > 0.0 => (hy / hym - 1.0).norm(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// A scenario wired into one ODE.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    design: SchemeDesign,
    controller: Controller,
    layout: SimLayout,
    theta0: DVector<f64>,
    rho0: f64,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let design = scenario.validate()?;
        Self::with_design(scenario, design)
    }

    /// Uses an already computed design (it must belong to `scenario`).
    pub fn with_design(scenario: Scenario, design: SchemeDesign) -> Result<Self> {
        if design.scheme != scenario.scheme {
            return Err(Error::Malformed(format!(
                "design is for {}, scenario runs {}",
                design.scheme, scenario.scheme
            )));
        }
        let n = scenario.order();
        let controller = Controller::new(
            scenario.scheme,
            n,
            &scenario.pm,
            scenario.lambda.as_ref(),
            scenario.lambda_e.as_ref(),
            scenario.gains()?,
            scenario.adapt,
        )?;
        let (theta0, rho0) = scenario.initial_estimates(&design.nominal)?;
        let layout = SimLayout {
            x: 0..n,
            x_m: n..2 * n,
            controller: 2 * n..2 * n + controller.layout().dim(),
        };
        Ok(Simulation {
            scenario,
            design,
            controller,
            layout,
            theta0,
            rho0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn design(&self) -> &SchemeDesign {
        &self.design
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn layout(&self) -> &SimLayout {
        &self.layout
    }

    pub fn state_dim(&self) -> usize {
        self.layout.controller.end
    }

    /// Global range of `θ` in the closed-loop state.
    pub fn theta_range(&self) -> Range<usize> {
        let off = self.layout.controller.start;
        let t = &self.controller.layout().theta;
        off + t.start..off + t.end
    }

    pub fn rho_index(&self) -> usize {
        self.layout.controller.start + self.controller.layout().rho
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.state_dim()];
        if let Some(x0) = &self.scenario.x0 {
            s[self.layout.x.clone()].copy_from_slice(x0.as_slice());
        }
        if let Some(xm0) = &self.scenario.xm0 {
            s[self.layout.x_m.clone()].copy_from_slice(xm0.as_slice());
        }
        let c = self
            .controller
            .initial_state(self.theta0.as_slice(), self.rho0)
            .expect("theta0 length checked at construction");
        s[self.layout.controller.clone()].copy_from_slice(&c);
        s
    }

    /// Closed-loop derivative at time `t`; `omega` is scratch of length `p`
    /// and holds `ζ` on return.
    pub fn derivative(&self, t: f64, state: &[f64], out: &mut [f64], omega: &mut [f64]) -> Signals {
        self.rhs(self.scenario.ref_input.eval(t), state, out, omega)
    }

    /// Closed-loop derivative for a given leader input `v_m`.
    pub fn rhs(&self, v_m: f64, state: &[f64], out: &mut [f64], omega: &mut [f64]) -> Signals {
        let sc = &self.scenario;
        let l = &self.layout;
        let x = &state[l.x.clone()];
        let xm = &state[l.x_m.clone()];

        let u_m = dot(sc.k1m.as_slice(), xm) + v_m;
        let y = dot(sc.plant.c.as_slice(), x);
        let y_m = dot(sc.reference.c.as_slice(), xm);

        let meas = Measurements {
            x: Some(x),
            y,
            x_m: Some(xm),
            y_m,
            u_m,
        };
        let cs = self
            .controller
            .derivative(
                &meas,
                &state[l.controller.clone()],
                &mut out[l.controller.clone()],
                omega,
            )
            .expect("controller wiring fixed at construction");

        affine(&sc.plant.a, x, sc.plant.b.as_slice(), cs.u, &mut out[l.x.clone()]);
        affine(&sc.reference.a, xm, sc.reference.b.as_slice(), u_m, &mut out[l.x_m.clone()]);

        Signals {
            y,
            y_m,
            e: cs.e,
            u: cs.u,
            u_m,
            v_m,
            eps: cs.est.eps,
            xi: cs.est.xi,
            m: cs.est.m,
        }
    }

    /// Lyapunov diagnostic at a closed-loop state.
    pub fn lyapunov(&self, state: &[f64]) -> f64 {
        lyapunov_v(
            &state[self.theta_range()],
            state[self.rho_index()],
            &self.design.nominal,
            self.controller.gains(),
        )
    }

    /// Runs the scenario with fixed-step RK4, logging every step. On a
    /// non-finite or runaway state the partial trace is returned with
    /// [`Trace::diverged`] set.
    pub fn integrate(&self) -> Trace {
        let steps = self.scenario.steps();
        let dt = self.scenario.dt;
        let dim = self.state_dim();
        let mut state = self.initial_state();
        let mut k1 = vec![0.0; dim];
        let mut omega = vec![0.0; self.controller.param_dim()];
        let mut omega2 = omega.clone();
        let mut rk = Rk4::new(dim);
        let mut trace = Trace::with_capacity(self.scenario.scheme, dt, steps + 1);

        for k in 0..=steps {
            let t = k as f64 * dt;
            if let Some(detail) = check_state(&state) {
                trace.diverged = Some(Divergence { t, detail });
                break;
            }
            let sig = self.derivative(t, &state, &mut k1, &mut omega);
            let theta_norm = dot(&state[self.theta_range()], &state[self.theta_range()]).sqrt();
            trace.push(t, &sig, theta_norm, state[self.rho_index()], self.lyapunov(&state));
            if k == steps {
                break;
            }
            rk.step_with_k1(
                |tt, s, d| {
                    self.derivative(tt, s, d, &mut omega2);
                },
                t,
                &mut state,
                dt,
                &k1,
            );
        }
        trace
    }

    /// Linearizes the loop with `θ` frozen at `theta` by probing the
    /// right-hand side. The coordinates exclude `θ` and `ρ`.
    pub fn nominal_loop(&self, theta: &[f64]) -> Result<LinearLoop> {
        let th = self.theta_range();
        if theta.len() != th.len() {
            return Err(Error::Dimension(format!(
                "theta has {} entries, expected {}",
                theta.len(),
                th.len()
            )));
        }
        let q = th.start;
        let dim = self.state_dim();
        let mut base = vec![0.0; dim];
        base[th.clone()].copy_from_slice(theta);
        base[self.rho_index()] = self.design.nominal.rho_star;
        let mut out = vec![0.0; dim];
        let mut omega = vec![0.0; theta.len()];

        let mut a = DMatrix::zeros(q, q);
        for j in 0..q {
            let mut s = base.clone();
            s[j] = 1.0;
            self.rhs(0.0, &s, &mut out, &mut omega);
            a.set_column(j, &DVector::from_column_slice(&out[..q]));
        }
        self.rhs(1.0, &base, &mut out, &mut omega);
        let b = DVector::from_column_slice(&out[..q]);

        let mut c_y = RowDVector::zeros(q);
        let mut c_ym = RowDVector::zeros(q);
        for (i, j) in self.layout.x.clone().enumerate() {
            c_y[j] = self.scenario.plant.c[i];
        }
        for (i, j) in self.layout.x_m.clone().enumerate() {
            c_ym[j] = self.scenario.reference.c[i];
        }
        Ok(LinearLoop { a, b, c_y, c_ym })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = A x + b u`
fn affine(a: &DMatrix<f64>, x: &[f64], b: &[f64], u: f64, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = b[i] * u;
        for (j, xj) in x.iter().enumerate() {
            acc += a[(i, j)] * xj;
        }
        *o = acc;
    }
}

fn check_state(state: &[f64]) -> Option<String> {
    let (i, v) = state
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || v.abs() > DIVERGENCE_BOUND)?;
    Some(if v.is_finite() {
        format!("state component {i} reached {v:e}, beyond {DIVERGENCE_BOUND:e}")
    } else {
        format!("state component {i} is {v}")
    })
}
