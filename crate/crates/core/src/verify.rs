//! Internal-consistency report for a scenario: standing assumptions,
//! matching residuals, observer and parametrization residuals, and the
//! frequency response of the nominal loop.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::design::{
    output_matching_residual, sample_frequencies, state_matching_residual, NominalDesign,
    OutputFbMatch, SchemeDesign, StateFbMatch,
};
use crate::error::Error;
use crate::lti::{char_poly, is_hurwitz, resolvent_apply, Polynomial};
use crate::sim::{Scenario, Simulation};

/// Residual threshold used by every numeric check.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Residual, or 0/1 for yes/no checks.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl Check {
    fn residual(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value <= threshold,
            note: String::new(),
        }
    }

    fn flag(name: &str, ok: bool, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: ok,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// True when a failed check is one of the standing assumptions.
    pub fn assumption_failed(&self) -> bool {
        self.failures()
            .any(|c| c.name.starts_with("(A1)") || c.name.starts_with("(A2)"))
    }

    fn push(&mut self, c: Check) -> bool {
        let ok = c.pass;
        self.checks.push(c);
        ok
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.pass { "ok  " } else { "FAIL" };
            if c.threshold == 0.0 {
                write!(f, "{status} {}", c.name)?;
            } else {
                write!(f, "{status} {:<40} {:.3e} (<= {:.0e})", c.name, c.value, c.threshold)?;
            }
            if !c.note.is_empty() {
                write!(f, "  [{}]", c.note)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn max_rel_over<F: Fn(Complex64) -> (Complex64, Complex64)>(f: F) -> f64 {
    sample_frequencies()
        .into_iter()
        .map(|w| {
            let (got, want) = f(Complex64::new(0.0, w));
            (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

fn a_vec(s: Complex64, m: usize) -> Vec<Complex64> {
    (0..m).map(|i| s.powi(i as i32)).collect()
}

/// `vᵀ a(s)` for coefficient vector `v`.
fn poly_row(v: &[f64], s: Complex64) -> Complex64 {
    v.iter().zip(a_vec(s, v.len())).map(|(c, p)| p * *c).sum()
}

fn design_checks(report: &mut Report, sc: &Scenario, d: &SchemeDesign) {
    let reference = &sc.reference;
    let pm = &sc.pm;
    // r_m = P_m[y_m] = α1ᵀ x_m + α2 u_m
    let alpha = max_rel_over(|s| {
        let x = resolvent_apply(&reference.a, &reference.b, s).unwrap_or_default();
        let got: Complex64 = d
            .axm
            .alpha1
            .iter()
            .zip(x.iter())
            .map(|(a, xi)| xi * *a)
            .sum::<Complex64>()
            + d.axm.alpha2;
        (got, pm.eval_complex(s) * reference.eval(s))
    });
    report.push(Check::residual("alpha parametrization (freq)", alpha, VERIFY_TOL));

    if let (Some(obs), Some(aym)) = (&d.obs, &d.aym) {
        let cp = char_poly(&obs.f);
        let scale = obs.lambda_e.max_abs_coeff();
        let pole_res = (0..=obs.lambda_e.degree().unwrap_or(0))
            .map(|i| (cp.coeff(i) - obs.lambda_e.coeff(i)).abs())
            .fold(0.0, f64::max)
            / scale;
        report.push(Check::residual("observer poles char(F) - Lambda_e", pole_res, VERIFY_TOL));

        let le = &obs.lambda_e;
        for (name, g, theta) in [
            ("observer Theta1 (freq)", &obs.g_um, &obs.theta1),
            ("observer Theta2 (freq)", &obs.g_ym, &obs.theta2),
        ] {
            let res = (0..g.len())
                .map(|i| {
                    max_rel_over(|s| {
                        let w = resolvent_apply(&obs.f, g, s).unwrap_or_default();
                        let row: Vec<f64> = theta.column(i).iter().copied().collect();
                        (w[i], poly_row(&row, s) / le.eval_complex(s))
                    })
                })
                .fold(0.0, f64::max);
            report.push(Check::residual(name, res, VERIFY_TOL));
        }

        let beta = max_rel_over(|s| {
            let gm = reference.eval(s);
            let lam = le.eval_complex(s);
            let got = poly_row(aym.beta1.as_slice(), s) / lam
                + poly_row(aym.beta2.as_slice(), s) / lam * gm
                + aym.beta20 * gm
                + aym.alpha2;
            (got, pm.eval_complex(s) * gm)
        });
        report.push(Check::residual("beta parametrization (freq)", beta, VERIFY_TOL));
    }
}

/// Splits the feedback part of a `θ*` back into matching components.
fn matching_parts(
    sc: &Scenario,
    n: usize,
    nominal: &NominalDesign,
) -> (Option<OutputFbMatch>, Option<StateFbMatch>) {
    let th = &nominal.theta_star;
    if sc.scheme.state_feedback() {
        let k1 = DVector::from_iterator(n, th.iter().take(n).copied());
        (None, Some(StateFbMatch { k1, k2: 1.0 / nominal.rho_star }))
    } else {
        let m = n - 1;
        (
            Some(OutputFbMatch {
                theta1: th.rows(0, m).into_owned(),
                theta2: th.rows(m, m).into_owned(),
                theta20: th[2 * m],
                theta3: 1.0 / nominal.rho_star,
            }),
            None,
        )
    }
}

fn assumption_checks(report: &mut Report, sc: &Scenario) -> Option<()> {
    let tf = match sc.plant_tf() {
        Ok(tf) => tf,
        Err(e) => {
            report.push(Check::flag("(A1) plant transfer function nonzero", false, e.to_string()));
            return None;
        }
    };
    let mut ok = true;
    let z_ok = tf.num.degree() == Some(0) || is_hurwitz(&tf.num).unwrap_or(false);
    ok &= report.push(Check::flag(
        "(A1) plant minimum phase",
        z_ok,
        format!("Z(s) = {}", tf.num),
    ));
    let n_star = tf.relative_degree();
    ok &= report.push(Check::flag(
        "(A1) relative degree n* >= 1",
        n_star >= 1,
        format!("n* = {n_star}"),
    ));
    report.push(Check::flag(
        "(A1) sign(k_p) matches plant model",
        tf.gain.signum() == sc.sign_kp,
        format!("k_p = {:.6e}, scenario sign {}", tf.gain, sc.sign_kp),
    ));
    let ref_ok = sc.check_reference_stable();
    ok &= report.push(Check::flag(
        "(A2) reference closed loop Hurwitz",
        ref_ok.is_ok(),
        ref_ok.err().map(|e| e.to_string()).unwrap_or_default(),
    ));
    let nm = sc.reference.relative_degree();
    ok &= report.push(Check::flag(
        "(A2) reference relative degree n_m* >= n*",
        nm.is_some_and(|nm| nm >= n_star),
        match nm {
            Some(nm) => format!("n_m* = {nm}, n* = {n_star}"),
            None => "reference transfer function is zero".into(),
        },
    ));
    let pm_ok = sc.pm.degree() == Some(n_star)
        && sc.pm.is_monic()
        && is_hurwitz(&sc.pm).unwrap_or(false);
    ok &= report.push(Check::flag(
        "P_m monic Hurwitz of degree n*",
        pm_ok,
        format!("P_m(s) = {}", sc.pm),
    ));
    ok.then_some(())
}

fn poly_ok(p: &Option<Polynomial>, deg: usize) -> bool {
    p.as_ref().is_some_and(|p| {
        p.degree() == Some(deg) && p.is_monic() && is_hurwitz(p).unwrap_or(false)
    })
}

/// Runs every check that applies to the scenario's scheme. With
/// `certificate`, the matching and loop checks use its `θ*`/`ρ*` instead of
/// the freshly computed ones and an extra agreement check is added.
pub fn verify(sc: &Scenario, certificate: Option<&NominalDesign>) -> Report {
    let mut report = Report::default();
    if assumption_checks(&mut report, sc).is_none() {
        return report;
    }
    let n = sc.order();
    if !sc.scheme.state_feedback() {
        let ok = n >= 2 && poly_ok(&sc.lambda, n - 1);
        report.push(Check::flag("Lambda monic Hurwitz of degree n-1", ok, ""));
    }
    if !sc.scheme.uses_reference_state() {
        let ok = n >= 2 && poly_ok(&sc.lambda_e, n - 1);
        report.push(Check::flag("Lambda_e monic Hurwitz of degree n-1", ok, ""));
    }
    if !report.passed() {
        return report;
    }

    let design = match sc.validate() {
        Ok(d) => d,
        Err(e) => {
            let name = match &e {
                Error::Assumption { assumption, .. } => format!("{assumption} design"),
                _ => "design".to_string(),
            };
            report.push(Check::flag(&name, false, e.to_string()));
            return report;
        }
    };

    let nominal = match certificate {
        Some(cert) => {
            let same_len = cert.theta_star.len() == design.nominal.theta_star.len();
            let diff = if same_len {
                let scale = design.nominal.theta_star.amax().max(f64::MIN_POSITIVE);
                ((&cert.theta_star - &design.nominal.theta_star).amax() / scale).max(
                    (cert.rho_star - design.nominal.rho_star).abs()
                        / design.nominal.rho_star.abs(),
                )
            } else {
                f64::INFINITY
            };
            report.push(Check::residual("certificate agrees with design", diff, VERIFY_TOL));
            if !same_len {
                return report;
            }
            cert.clone()
        }
        None => design.nominal.clone(),
    };

    let tf = design.plant_tf.clone();
    let (ofb, sfb) = matching_parts(sc, n, &nominal);
    if let (Some(o), Some(lambda)) = (ofb, sc.lambda.as_ref()) {
        let res = output_matching_residual(&tf, lambda, &sc.pm, &o);
        report.push(Check::residual("output matching residual", res, VERIFY_TOL));
    }
    if let Some(s) = sfb {
        let res = state_matching_residual(&sc.plant, &s, &sc.pm);
        report.push(Check::residual("state matching residual (freq)", res, VERIFY_TOL));
    }
    design_checks(&mut report, sc, &design);

    match Simulation::with_design(sc.clone(), design)
        .and_then(|sim| sim.nominal_loop(nominal.theta_star.as_slice()))
    {
        Ok(lp) => {
            let res = lp.wm_residual(&sample_frequencies());
            report.push(Check::residual("nominal loop vs W_m (freq)", res, VERIFY_TOL));
        }
        Err(e) => {
            report.push(Check::flag("nominal loop vs W_m (freq)", false, e.to_string()));
        }
    }
    report
}
