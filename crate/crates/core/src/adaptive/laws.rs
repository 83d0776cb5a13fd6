use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::Scheme;
use crate::design::NominalDesign;
use crate::error::{Error, Result};

/// Adaptation gains `Γ = Γᵀ > 0`, `γ > 0` and the known sign of `k_p`.
#[derive(Debug, Clone)]
pub struct Gains {
    gamma_mat: DMatrix<f64>,
    gamma: f64,
    sign_kp: f64,
    chol: Cholesky<f64, Dyn>,
}

impl Gains {
    pub fn new(gamma_mat: DMatrix<f64>, gamma: f64, sign_kp: f64) -> Result<Self> {
        if !gamma_mat.is_square() || gamma_mat.nrows() == 0 {
            return Err(Error::Dimension("Gamma must be a nonempty square matrix".into()));
        }
        if (&gamma_mat - gamma_mat.transpose()).amax() > 1e-12 * gamma_mat.amax().max(1.0) {
            return Err(Error::Malformed("Gamma is not symmetric".into()));
        }
        let chol = Cholesky::new(gamma_mat.clone())
            .ok_or_else(|| Error::Malformed("Gamma is not positive definite".into()))?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Malformed(format!("gamma must be positive, got {gamma}")));
        }
        if sign_kp != 1.0 && sign_kp != -1.0 {
            return Err(Error::Malformed(format!("sign(k_p) must be +1 or -1, got {sign_kp}")));
        }
        Ok(Gains {
            gamma_mat,
            gamma,
            sign_kp,
            chol,
        })
    }

    /// `Γ = g·I_p`.
    pub fn scalar(p: usize, g: f64, gamma: f64, sign_kp: f64) -> Result<Self> {
        Self::new(DMatrix::identity(p, p) * g, gamma, sign_kp)
    }

    pub fn gamma_mat(&self) -> &DMatrix<f64> {
        &self.gamma_mat
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sign_kp(&self) -> f64 {
        self.sign_kp
    }

    pub fn dim(&self) -> usize {
        self.gamma_mat.nrows()
    }

    /// Spectral norm of `Γ` (its largest eigenvalue).
    pub fn gamma_norm(&self) -> f64 {
        self.gamma_mat
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
    }
}

/// Measured signals available to the controller at one instant.
#[derive(Debug, Clone, Copy, Default)]
pub struct Measurements<'a> {
    pub x: Option<&'a [f64]>,
    pub y: f64,
    pub x_m: Option<&'a [f64]>,
    pub y_m: f64,
    pub u_m: f64,
}

/// Filter outputs entering the regressor. Empty slices for filters the
/// scheme does not use.
#[derive(Debug, Clone, Copy, Default)]
pub struct FilterSignals<'a> {
    pub omega1: &'a [f64],
    pub omega2: &'a [f64],
    pub omega_um: &'a [f64],
    pub omega_ym: &'a [f64],
}

fn need<'a>(scheme: Scheme, v: Option<&'a [f64]>, name: &str, n: usize) -> Result<&'a [f64]> {
    match v {
        Some(s) if s.len() == n => Ok(s),
        Some(s) => Err(Error::Dimension(format!(
            "{name} has {} entries, expected {n}",
            s.len()
        ))),
        None => Err(Error::MissingSignal {
            scheme: scheme.to_string(),
            signal: name.to_string(),
        }),
    }
}

fn filt<'a>(scheme: Scheme, v: &'a [f64], name: &str, n: usize) -> Result<&'a [f64]> {
    if v.len() == n {
        Ok(v)
    } else if v.is_empty() {
        Err(Error::MissingSignal {
            scheme: scheme.to_string(),
            signal: name.to_string(),
        })
    } else {
        Err(Error::Dimension(format!(
            "{name} has {} entries, expected {n}",
            v.len()
        )))
    }
}

/// Stacks `ω` in the order of the scheme's `θ*` layout into `out`:
///
/// - SFB_XM: `[x, x_m, u_m]`
/// - SFB_YM: `[x, ω_um, ω_ym, y_m, u_m]`
/// - OFB_XM: `[ω1, ω2, y, x_m, u_m]`
/// - OFB_YM: `[ω1, ω2, y, ω_um, ω_ym, y_m, u_m]`
pub fn build_regressor_into(
    scheme: Scheme,
    n: usize,
    meas: &Measurements<'_>,
    filters: &FilterSignals<'_>,
    out: &mut [f64],
) -> Result<()> {
    let p = scheme.param_dim(n);
    if out.len() != p {
        return Err(Error::Dimension(format!(
            "regressor buffer has {} entries, {scheme} needs {p}",
            out.len()
        )));
    }
    let mut parts: Vec<&[f64]> = Vec::with_capacity(7);
    let y = [meas.y];
    let y_m = [meas.y_m];
    let u_m = [meas.u_m];
    if scheme.state_feedback() {
        parts.push(need(scheme, meas.x, "x", n)?);
    } else {
        parts.push(filt(scheme, filters.omega1, "omega1", n - 1)?);
        parts.push(filt(scheme, filters.omega2, "omega2", n - 1)?);
        parts.push(&y);
    }
    if scheme.uses_reference_state() {
        parts.push(need(scheme, meas.x_m, "x_m", n)?);
    } else {
        parts.push(filt(scheme, filters.omega_um, "omega_um", n - 1)?);
        parts.push(filt(scheme, filters.omega_ym, "omega_ym", n - 1)?);
        parts.push(&y_m);
    }
    parts.push(&u_m);
    let mut k = 0;
    for part in parts {
        out[k..k + part.len()].copy_from_slice(part);
        k += part.len();
    }
    debug_assert_eq!(k, p);
    Ok(())
}

pub fn build_regressor(
    scheme: Scheme,
    n: usize,
    meas: &Measurements<'_>,
    filters: &FilterSignals<'_>,
) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(scheme.param_dim(n));
    build_regressor_into(scheme, n, meas, filters, out.as_mut_slice())?;
    Ok(out)
}

/// `u = θᵀω`.
pub fn control_output(theta: &[f64], omega: &[f64]) -> f64 {
    debug_assert_eq!(theta.len(), omega.len());
    theta.iter().zip(omega).map(|(a, b)| a * b).sum()
}

/// Estimation error, swap term and normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationError {
    pub eps: f64,
    pub xi: f64,
    pub m: f64,
}

/// `ξ = θᵀζ − W_m[θᵀω]`, `ε = e + ρξ`, `m = sqrt(1 + ζᵀζ + ξ²)`.
pub fn estimation_error(
    e: f64,
    rho: f64,
    theta: &[f64],
    zeta: &[f64],
    wm_theta_omega: f64,
) -> EstimationError {
    let xi = control_output(theta, zeta) - wm_theta_omega;
    let zz: f64 = zeta.iter().map(|z| z * z).sum();
    EstimationError {
        eps: e + rho * xi,
        xi,
        m: (1.0 + zz + xi * xi).sqrt(),
    }
}

/// Writes `θ' = −Γ sign(k_p) ζ ε/m²` into `theta_dot` and returns `ρ' = −γ ξ ε/m²`.
pub fn adaptation_rates_into(
    est: &EstimationError,
    zeta: &[f64],
    gains: &Gains,
    theta_dot: &mut [f64],
) -> f64 {
    let m2 = est.m * est.m;
    let k = -gains.sign_kp * est.eps / m2;
    let g = &gains.gamma_mat;
    for (i, td) in theta_dot.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, z) in zeta.iter().enumerate() {
            acc += g[(i, j)] * z;
        }
        *td = k * acc;
    }
    -gains.gamma * est.xi * est.eps / m2
}

pub fn adaptation_rates(
    est: &EstimationError,
    zeta: &[f64],
    gains: &Gains,
) -> (DVector<f64>, f64) {
    let mut td = DVector::zeros(zeta.len());
    let rd = adaptation_rates_into(est, zeta, gains, td.as_mut_slice());
    (td, rd)
}

/// `V = |ρ*| θ̃ᵀ Γ⁻¹ θ̃ + ρ̃²/γ`.
pub fn lyapunov_v(theta: &[f64], rho: f64, nominal: &NominalDesign, gains: &Gains) -> f64 {
    let dt = DVector::from_iterator(
        theta.len(),
        theta.iter().zip(nominal.theta_star.iter()).map(|(a, b)| a - b),
    );
    let w = gains.chol.solve(&dt);
    let dr = rho - nominal.rho_star;
    nominal.rho_star.abs() * dt.dot(&w) + dr * dr / gains.gamma
}
