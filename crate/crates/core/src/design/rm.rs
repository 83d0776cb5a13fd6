//! Parametrizations of the unavailable signal `r_m = P_m(s)[y_m]` in terms
//! of measured reference-system signals.

use nalgebra::DVector;

use super::matching::check_pm;
use super::ObserverDesign;
use crate::error::{Error, Result};
use crate::lti::{Polynomial, StateSpace};

/// `r_m = α1ᵀ x_m + α2 u_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmParamXm {
    pub alpha1: DVector<f64>,
    /// Zero when the reference relative degree exceeds the plant's.
    pub alpha2: f64,
}

/// `r_m = β1ᵀ ω_um + β2ᵀ ω_ym + β20 y_m + α2 u_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmParamYm {
    pub beta1: DVector<f64>,
    pub beta2: DVector<f64>,
    pub beta20: f64,
    pub alpha2: f64,
}

/// Relative degree of the reference system, or an (A2) error when its
/// transfer function vanishes.
pub fn reference_relative_degree(reference: &StateSpace) -> Result<usize> {
    reference
        .relative_degree()
        .ok_or_else(|| Error::a2("reference transfer function c_m (sI - A_m)^{-1} b_m is zero"))
}

/// `α1ᵀ = c_m A_m^{n*} + p_{n*-1} c_m A_m^{n*-1} + ... + p_0 c_m` and
/// `α2 = c_m A_m^{n*-1} b_m` (only when `n_m* = n*`).
pub fn rm_param_xm(reference: &StateSpace, pm: &Polynomial, n_star: usize) -> Result<RmParamXm> {
    if n_star == 0 {
        return Err(Error::Malformed("plant relative degree must be >= 1".into()));
    }
    check_pm(pm, n_star)?;
    let nm_star = reference_relative_degree(reference)?;
    if nm_star < n_star {
        return Err(Error::a2(format!(
            "reference relative degree n_m* = {nm_star} is below plant relative degree n* = {n_star}"
        )));
    }
    let n = reference.order();
    let mut row = reference.c.clone();
    let mut alpha1 = DVector::<f64>::zeros(n);
    for i in 0..=n_star {
        alpha1 += row.transpose() * pm.coeff(i);
        if i < n_star {
            row = &row * &reference.a;
        }
    }
    let alpha2 = if nm_star == n_star {
        reference.markov_parameters(n_star)[n_star - 1]
    } else {
        0.0
    };
    Ok(RmParamXm { alpha1, alpha2 })
}

/// Rewrites `α1ᵀ x̂_m` with the observer estimate `x̂_m = Q_m [y_m; w_m + L_r y_m]`.
/// With `ᾱ = Q_mᵀ α1 = [ᾱ1; ᾱ2]`:
/// `β1 = Θ1* ᾱ2`, `β2 = Θ2* ᾱ2`, `β20 = ᾱ2ᵀ L_r + ᾱ1`.
pub fn rm_param_ym(obs: &ObserverDesign, axm: &RmParamXm) -> Result<RmParamYm> {
    let n = obs.order();
    if n < 2 {
        return Err(Error::Dimension(
            "y_m-based parametrization needs n >= 2 (no ω filters for n = 1)".into(),
        ));
    }
    if axm.alpha1.len() != n {
        return Err(Error::Dimension(format!(
            "alpha1 has {} entries, observer order is {n}",
            axm.alpha1.len()
        )));
    }
    let bar = obs.q_m.transpose() * &axm.alpha1;
    let tail: DVector<f64> = bar.rows(1, n - 1).into_owned();
    Ok(RmParamYm {
        beta1: &obs.theta1 * &tail,
        beta2: &obs.theta2 * &tail,
        beta20: tail.dot(&obs.l_r) + bar[0],
        alpha2: axm.alpha2,
    })
}
