use std::ops::Range;

use super::laws::{
    adaptation_rates_into, build_regressor_into, control_output, estimation_error,
    EstimationError, FilterSignals, Gains, Measurements,
};
use super::Scheme;
use crate::error::{Error, Result};
use crate::lti::{realize_filter_bank, realize_wm, FilterBank, Polynomial, VectorFilter};

/// Offsets of the controller's states inside a flat vector:
/// `[ω1 | ω2 | ω_um | ω_ym | ζ | ξ-channel | θ | ρ]`.
///
/// `ω1`, `ω2` exist only for output feedback, `ω_um`, `ω_ym` only for the
/// `y_m`-based schemes. `ζ` holds `p` copies of `W_m` and the `ξ` channel one
/// more copy fed with `θᵀω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerLayout {
    pub omega1: Range<usize>,
    pub omega2: Range<usize>,
    pub omega_um: Range<usize>,
    pub omega_ym: Range<usize>,
    pub zeta: Range<usize>,
    pub xi: Range<usize>,
    pub theta: Range<usize>,
    pub rho: usize,
}

impl ControllerLayout {
    pub fn new(scheme: Scheme, n: usize, pm_degree: usize) -> Self {
        let p = scheme.param_dim(n);
        let mut at = 0;
        let mut take = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        let ofb = if scheme.state_feedback() { 0 } else { n - 1 };
        let ym = if scheme.uses_reference_state() { 0 } else { n - 1 };
        let omega1 = take(ofb);
        let omega2 = take(ofb);
        let omega_um = take(ym);
        let omega_ym = take(ym);
        let zeta = take(p * pm_degree);
        let xi = take(pm_degree);
        let theta = take(p);
        let rho = take(1).start;
        ControllerLayout {
            omega1,
            omega2,
            omega_um,
            omega_ym,
            zeta,
            xi,
            theta,
            rho,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho + 1
    }
}

/// Borrowed view of a controller state vector.
#[derive(Debug, Clone, Copy)]
pub struct ControllerState<'a> {
    pub layout: &'a ControllerLayout,
    pub data: &'a [f64],
}

impl<'a> ControllerState<'a> {
    pub fn theta(&self) -> &'a [f64] {
        &self.data[self.layout.theta.clone()]
    }

    pub fn rho(&self) -> f64 {
        self.data[self.layout.rho]
    }

    pub fn filters(&self) -> FilterSignals<'a> {
        FilterSignals {
            omega1: &self.data[self.layout.omega1.clone()],
            omega2: &self.data[self.layout.omega2.clone()],
            omega_um: &self.data[self.layout.omega_um.clone()],
            omega_ym: &self.data[self.layout.omega_ym.clone()],
        }
    }

    pub fn zeta_states(&self) -> &'a [f64] {
        &self.data[self.layout.zeta.clone()]
    }

    /// Current output of the `W_m[θᵀω]` channel.
    pub fn wm_theta_omega(&self) -> f64 {
        self.data[self.layout.xi.start]
    }
}

/// What the controller produced at one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSignals {
    pub u: f64,
    pub e: f64,
    pub est: EstimationError,
}

/// One adaptive controller: filters, regressor, control law and adaptive laws.
#[derive(Debug, Clone)]
pub struct Controller {
    scheme: Scheme,
    n: usize,
    lambda_bank: Option<FilterBank>,
    lambda_e_bank: Option<FilterBank>,
    zeta: VectorFilter,
    layout: ControllerLayout,
    gains: Gains,
    adapt: bool,
}

impl Controller {
    /// `lambda` is needed by output-feedback schemes, `lambda_e` by the
    /// `y_m`-based ones. With `adapt = false`, `θ` and `ρ` stay frozen.
    pub fn new(
        scheme: Scheme,
        n: usize,
        pm: &Polynomial,
        lambda: Option<&Polynomial>,
        lambda_e: Option<&Polynomial>,
        gains: Gains,
        adapt: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("plant order must be >= 1".into()));
        }
        let p = scheme.param_dim(n);
        if gains.dim() != p {
            return Err(Error::Dimension(format!(
                "Gamma is {0}x{0}, {scheme} with n = {n} needs {p}x{p}",
                gains.dim()
            )));
        }
        let bank = |poly: Option<&Polynomial>, what: &str| -> Result<FilterBank> {
            if n < 2 {
                return Err(Error::Dimension(format!(
                    "{scheme} needs plant order n >= 2 (filters a(s)/{what} are empty for n = 1)"
                )));
            }
            let poly = poly.ok_or_else(|| Error::MissingComponent {
                scheme: scheme.to_string(),
                what: format!("filter polynomial {what}"),
            })?;
            if poly.degree() != Some(n - 1) {
                return Err(Error::Malformed(format!(
                    "{what} must have degree n - 1 = {}, got {poly}",
                    n - 1
                )));
            }
            realize_filter_bank(poly)
        };
        let lambda_bank = if scheme.state_feedback() {
            None
        } else {
            Some(bank(lambda, "Lambda")?)
        };
        let lambda_e_bank = if scheme.uses_reference_state() {
            None
        } else {
            Some(bank(lambda_e, "Lambda_e")?)
        };
        let zeta = realize_wm(pm, p)?;
        let layout = ControllerLayout::new(scheme, n, zeta.channel_dim());
        Ok(Controller {
            scheme,
            n,
            lambda_bank,
            lambda_e_bank,
            zeta,
            layout,
            gains,
            adapt,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn param_dim(&self) -> usize {
        self.scheme.param_dim(self.n)
    }

    pub fn layout(&self) -> &ControllerLayout {
        &self.layout
    }

    pub fn gains(&self) -> &Gains {
        &self.gains
    }

    pub fn adapting(&self) -> bool {
        self.adapt
    }

    pub fn view<'a>(&'a self, data: &'a [f64]) -> ControllerState<'a> {
        ControllerState {
            layout: &self.layout,
            data,
        }
    }

    /// Zero filter states with the given initial estimates.
    pub fn initial_state(&self, theta0: &[f64], rho0: f64) -> Result<Vec<f64>> {
        if theta0.len() != self.param_dim() {
            return Err(Error::Dimension(format!(
                "theta(0) has {} entries, {} needs {}",
                theta0.len(),
                self.scheme,
                self.param_dim()
            )));
        }
        let mut s = vec![0.0; self.layout.dim()];
        s[self.layout.theta.clone()].copy_from_slice(theta0);
        s[self.layout.rho] = rho0;
        Ok(s)
    }

    /// Control input for the current state, leaving `ω` in `omega`.
    pub fn control(&self, meas: &Measurements<'_>, state: &[f64], omega: &mut [f64]) -> Result<f64> {
        let view = self.view(state);
        build_regressor_into(self.scheme, self.n, meas, &view.filters(), omega)?;
        Ok(control_output(view.theta(), omega))
    }

    /// Evaluates the control law and writes every controller state derivative
    /// into `dstate`. `omega` is scratch of length `p` and holds `ζ` on return.
    pub fn derivative(
        &self,
        meas: &Measurements<'_>,
        state: &[f64],
        dstate: &mut [f64],
        omega: &mut [f64],
    ) -> Result<ControlSignals> {
        let l = &self.layout;
        let u = self.control(meas, state, omega)?;
        let view = self.view(state);

        if let Some(bank) = &self.lambda_bank {
            bank.derivative(&state[l.omega1.clone()], u, &mut dstate[l.omega1.clone()]);
            bank.derivative(&state[l.omega2.clone()], meas.y, &mut dstate[l.omega2.clone()]);
        }
        if let Some(bank) = &self.lambda_e_bank {
            bank.derivative(&state[l.omega_um.clone()], meas.u_m, &mut dstate[l.omega_um.clone()]);
            bank.derivative(&state[l.omega_ym.clone()], meas.y_m, &mut dstate[l.omega_ym.clone()]);
        }
        let zs = &state[l.zeta.clone()];
        self.zeta.derivative(zs, omega, &mut dstate[l.zeta.clone()]);
        self.zeta
            .channel()
            .derivative(&state[l.xi.clone()], u, &mut dstate[l.xi.clone()]);

        // ζ is the vector of W_m channel outputs; reuse `omega` to hold it
        for (o, z) in omega.iter_mut().zip(self.zeta.outputs(zs)) {
            *o = z;
        }
        let e = meas.y - meas.y_m;
        let est = estimation_error(e, view.rho(), view.theta(), omega, view.wm_theta_omega());

        if self.adapt {
            let rho_dot = adaptation_rates_into(&est, omega, &self.gains, &mut dstate[l.theta.clone()]);
            dstate[l.rho] = rho_dot;
        } else {
            dstate[l.theta.clone()].fill(0.0);
            dstate[l.rho] = 0.0;
        }
        Ok(ControlSignals { u, e, est })
    }
}
