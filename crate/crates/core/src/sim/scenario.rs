use nalgebra::{DMatrix, DVector};

use crate::adaptive::{Gains, Scheme};
use crate::design::{check_minimum_phase, design_scheme, DesignInputs, NominalDesign, SchemeDesign};
use crate::error::{Error, Result};
use crate::lti::{char_poly, is_hurwitz, tf_from_ss, Polynomial, RationalTF, StateSpace};

/// Leader input `v_m(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RefInput {
    Const(f64),
    /// `Σ a_i sin(w_i t)` given as `(a_i, w_i)` pairs.
    Sines(Vec<(f64, f64)>),
}

impl RefInput {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RefInput::Const(v) => *v,
            RefInput::Sines(terms) => terms.iter().map(|(a, w)| a * (w * t).sin()).sum(),
        }
    }
}

/// Initial value of `θ`: a multiple of `θ*` or an explicit vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamInit {
    Scale(f64),
    Value(DVector<f64>),
}

/// Initial value of `ρ`: a multiple of `ρ*` or an explicit number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoInit {
    Scale(f64),
    Value(f64),
}

/// Adaptation gain matrix `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSpec {
    /// `g·I_p`, sized for whichever scheme runs.
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

/// A complete closed-loop experiment.
///
/// The leader is stabilized by its own state feedback
/// `u_m = k_1mᵀ x_m + v_m`; the controller only sees `(A_m, b_m, c_m)` through
/// the signals `x_m`, `y_m` and `u_m`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub plant: StateSpace,
    /// Transfer function used for output-feedback design instead of the one
    /// computed from `plant` (e.g. a rounded published model).
    pub design_tf: Option<RationalTF>,
    pub reference: StateSpace,
    pub k1m: DVector<f64>,
    pub ref_input: RefInput,
    pub scheme: Scheme,
    pub pm: Polynomial,
    pub lambda: Option<Polynomial>,
    pub lambda_e: Option<Polynomial>,
    pub gamma: GammaSpec,
    pub gamma_rho: f64,
    pub sign_kp: f64,
    pub theta0: ParamInit,
    pub rho0: RhoInit,
    /// Zero when absent.
    pub x0: Option<DVector<f64>>,
    pub xm0: Option<DVector<f64>>,
    pub horizon: f64,
    pub dt: f64,
    /// When false, `θ` and `ρ` stay at their initial values.
    pub adapt: bool,
}

impl Scenario {
    pub fn order(&self) -> usize {
        self.plant.order()
    }

    /// `A_m + b_m k_1mᵀ`.
    pub fn closed_reference(&self) -> DMatrix<f64> {
        &self.reference.a + &self.reference.b * self.k1m.transpose()
    }

    /// Transfer function the design is based on.
    pub fn plant_tf(&self) -> Result<RationalTF> {
        match &self.design_tf {
            Some(tf) => Ok(tf.clone()),
            None => tf_from_ss(&self.plant),
        }
    }

    pub fn gains(&self) -> Result<Gains> {
        let p = self.scheme.param_dim(self.order());
        match &self.gamma {
            GammaSpec::Scalar(g) => Gains::scalar(p, *g, self.gamma_rho, self.sign_kp),
            GammaSpec::Matrix(m) => Gains::new(m.clone(), self.gamma_rho, self.sign_kp),
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn check_basic(&self) -> Result<()> {
        let n = self.order();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Malformed(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(Error::Malformed(format!(
                "horizon must be at least one step, got {}",
                self.horizon
            )));
        }
        if self.reference.order() != n {
            return Err(Error::Dimension(format!(
                "reference order {} differs from plant order {n}",
                self.reference.order()
            )));
        }
        if self.k1m.len() != n {
            return Err(Error::Dimension(format!("k_1m has {} entries, expected {n}", self.k1m.len())));
        }
        for (name, v) in [("x0", &self.x0), ("xm0", &self.xm0)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Dimension(format!("{name} has {} entries, expected {n}", v.len())));
                }
            }
        }
        if let Some(tf) = &self.design_tf {
            if tf.order() != n {
                return Err(Error::Dimension(format!(
                    "design transfer function has order {}, plant has {n}",
                    tf.order()
                )));
            }
        }
        if let RefInput::Sines(terms) = &self.ref_input {
            if terms.iter().any(|(a, w)| !a.is_finite() || !w.is_finite()) {
                return Err(Error::Malformed("non-finite sine term in ref_input".into()));
            }
        }
        Ok(())
    }

    /// (A2) surrogate: the leader's closed loop `A_m + b_m k_1mᵀ` is Hurwitz.
    pub fn check_reference_stable(&self) -> Result<()> {
        let cp = char_poly(&self.closed_reference());
        if !is_hurwitz(&cp)? {
            return Err(Error::a2(format!(
                "reference closed loop A_m + b_m k_1m^T is not Hurwitz (char poly {cp})"
            )));
        }
        Ok(())
    }

    /// Checks the scenario and runs the nominal design for its scheme.
    pub fn validate(&self) -> Result<SchemeDesign> {
        self.check_basic()?;
        let tf = self.plant_tf()?;
        check_minimum_phase(&tf)?;
        self.check_reference_stable()?;
        self.gains()?;
        let design = design_scheme(
            &DesignInputs {
                plant: &self.plant,
                plant_tf: self.design_tf.as_ref(),
                reference: &self.reference,
                pm: &self.pm,
                lambda: self.lambda.as_ref(),
                lambda_e: self.lambda_e.as_ref(),
            },
            self.scheme,
        )?;
        Ok(design)
    }

    /// Resolves `θ(0)` and `ρ(0)` against a nominal design.
    pub fn initial_estimates(&self, nominal: &NominalDesign) -> Result<(DVector<f64>, f64)> {
        let theta = match &self.theta0 {
            ParamInit::Scale(s) => &nominal.theta_star * *s,
            ParamInit::Value(v) => {
                if v.len() != nominal.theta_star.len() {
                    return Err(Error::Dimension(format!(
                        "theta0 has {} entries, {} needs {}",
                        v.len(),
                        nominal.scheme,
                        nominal.theta_star.len()
                    )));
                }
                v.clone()
            }
        };
        let rho = match self.rho0 {
            RhoInit::Scale(s) => s * nominal.rho_star,
            RhoInit::Value(v) => v,
        };
        Ok((theta, rho))
    }
}
