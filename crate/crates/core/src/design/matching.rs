//! Plant–model matching: the output-feedback polynomial identity and the
//! state-feedback transfer-function identity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{
    is_hurwitz, place_state_feedback, tf_from_ss, Polynomial, RationalTF, StateSpace,
};

/// Matched output-feedback parameters `θ1*, θ2*, θ20*, θ3*`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFbMatch {
    pub theta1: DVector<f64>,
    pub theta2: DVector<f64>,
    pub theta20: f64,
    pub theta3: f64,
}

/// Matched state-feedback parameters `k1*, k2*`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFbMatch {
    pub k1: DVector<f64>,
    pub k2: f64,
}

/// `a(s)^T v = v_0 + v_1 s + ... + v_{n-2} s^{n-2}`
fn a_dot(v: &DVector<f64>) -> Polynomial {
    Polynomial::new(v.iter().copied().collect())
}

/// Checks the plant side of (A1) that can be read off a transfer function:
/// strictly stable zeros.
pub fn check_minimum_phase(g: &RationalTF) -> Result<()> {
    if g.num.degree().unwrap_or(0) >= 1 && !is_hurwitz(&g.num)? {
        return Err(Error::a1(format!(
            "plant zeros are not all stable: Z(s) = {}",
            g.num
        )));
    }
    Ok(())
}

fn check_design_poly(p: &Polynomial, degree: usize, name: &str) -> Result<()> {
    if p.degree() != Some(degree) {
        return Err(Error::Dimension(format!(
            "{name} has degree {:?}, expected {degree}",
            p.degree()
        )));
    }
    if !p.is_monic() {
        return Err(Error::Malformed(format!("{name} = {p} is not monic")));
    }
    if degree >= 1 && !is_hurwitz(p)? {
        return Err(Error::NotHurwitz {
            what: format!("{name} = {p}"),
        });
    }
    Ok(())
}

pub(crate) fn check_pm(pm: &Polynomial, n_star: usize) -> Result<()> {
    check_design_poly(pm, n_star, "P_m")
}

pub(crate) fn check_lambda(lambda: &Polynomial, n: usize, name: &str) -> Result<()> {
    check_design_poly(lambda, n - 1, name)
}

/// Solves
///
/// ```text
/// θ1ᵀ a(s) P(s) + (θ2ᵀ a(s) + θ20 Λ(s)) k_p Z(s) = Λ(s) (P(s) - k_p θ3 Z(s) P_m(s))
/// ```
///
/// with `θ3 = 1/k_p` fixed first, as a square linear system in the
/// `2n - 1` remaining unknowns (coefficients of `s^0 .. s^{2n-2}`).
pub fn solve_output_matching(
    g: &RationalTF,
    lambda: &Polynomial,
    pm: &Polynomial,
) -> Result<OutputFbMatch> {
    let n = g.order();
    if n < 2 {
        return Err(Error::Dimension(
            "output-feedback matching needs plant order n >= 2 (the a(s) filters are empty for n = 1)"
                .into(),
        ));
    }
    let n_star = g.relative_degree();
    check_minimum_phase(g)?;
    check_lambda(lambda, n, "Lambda")?;
    check_pm(pm, n_star)?;

    let kp = g.gain;
    let theta3 = 1.0 / kp;
    let rhs_poly = lambda * &(&g.den - &(&g.num * pm));
    let size = 2 * n - 1;
    let mut m = DMatrix::<f64>::zeros(size, size);
    for i in 0..n - 1 {
        let si = Polynomial::monomial(i);
        m.set_column(i, &DVector::from_vec((&si * &g.den).padded(size)));
        m.set_column(
            n - 1 + i,
            &DVector::from_vec((&si * &g.num).scale(kp).padded(size)),
        );
    }
    m.set_column(
        2 * n - 2,
        &DVector::from_vec((lambda * &g.num).scale(kp).padded(size)),
    );
    let rhs = DVector::from_vec(rhs_poly.padded(size));

    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::a1("matching system is singular: Z(s) and P(s) are not coprime"))?;
    let cond = crate::lti::condition_number(&m);
    if cond > crate::lti::COND_SINGULAR {
        return Err(Error::a1(format!(
            "matching system is numerically singular (condition {cond:e}): Z(s) and P(s) nearly share a root"
        )));
    }

    Ok(OutputFbMatch {
        theta1: sol.rows(0, n - 1).into_owned(),
        theta2: sol.rows(n - 1, n - 1).into_owned(),
        theta20: sol[2 * n - 2],
        theta3,
    })
}

/// Largest coefficient gap between the two sides of the output matching
/// identity, relative to the largest coefficient of any term.
pub fn output_matching_residual(
    g: &RationalTF,
    lambda: &Polynomial,
    pm: &Polynomial,
    m: &OutputFbMatch,
) -> f64 {
    let kp = g.gain;
    let t1 = &a_dot(&m.theta1) * &g.den;
    let t2 = (&(&a_dot(&m.theta2) + &lambda.scale(m.theta20)) * &g.num).scale(kp);
    let r1 = lambda * &g.den;
    let r2 = (lambda * &(&g.num * pm)).scale(kp * m.theta3);
    let diff = &(&t1 + &t2) - &(&r1 - &r2);
    let scale = [&t1, &t2, &r1, &r2]
        .iter()
        .map(|p| p.max_abs_coeff())
        .fold(f64::MIN_POSITIVE, f64::max);
    diff.max_abs_coeff() / scale
}

/// `k1*` places `det(sI - A - b k1ᵀ) = Z(s) P_m(s)`; `k2* = 1/k_p`.
pub fn solve_state_matching(sys: &StateSpace, pm: &Polynomial) -> Result<StateFbMatch> {
    let g = tf_from_ss(sys)?;
    check_minimum_phase(&g)?;
    check_pm(pm, g.relative_degree())?;
    let target = &g.num * pm;
    let k1 = place_state_feedback(&sys.a, &sys.b, &target)?.gain;
    Ok(StateFbMatch { k1, k2: 1.0 / g.gain })
}

/// 20 logarithmically spaced frequencies over `[1e-2, 1e2]` rad/s.
pub fn sample_frequencies() -> Vec<f64> {
    log_frequencies(1e-2, 1e2, 20)
}

pub fn log_frequencies(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count.max(2) - 1) as f64).exp())
        .collect()
}

/// Largest `|c (jw - A - b k1ᵀ)^{-1} b k2 - W_m(jw)| / |W_m(jw)|` over the
/// sample frequencies.
pub fn state_matching_residual(sys: &StateSpace, m: &StateFbMatch, pm: &Polynomial) -> f64 {
    let closed = StateSpace {
        a: &sys.a + &sys.b * m.k1.transpose(),
        b: sys.b.clone(),
        c: sys.c.clone(),
    };
    sample_frequencies()
        .into_iter()
        .map(|w| {
            let s = Complex64::new(0.0, w);
            let wm = Complex64::new(1.0, 0.0) / pm.eval_complex(s);
            (closed.eval(s) * m.k2 - wm).norm() / wm.norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_integrator_state_matching() {
        let sys = StateSpace::from_rows(&[&[0.0]], &[1.0], &[1.0]).unwrap();
        let m = solve_state_matching(&sys, &Polynomial::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(m.k1[0], -1.0);
        assert_eq!(m.k2, 1.0);
    }

    #[test]
    fn non_minimum_phase_rejected() {
        let g = RationalTF::new(
            Polynomial::new(vec![-1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -2.0, -3.0]),
        )
        .unwrap();
        let err = solve_output_matching(
            &g,
            &Polynomial::shifted_power(2.0, 2),
            &Polynomial::shifted_power(1.0, 2),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Assumption {
                assumption: crate::Assumption::A1,
                ..
            }
        ));
    }

    #[test]
    fn common_factor_is_singular() {
        let g = RationalTF::new(
            Polynomial::from_roots(&[-1.0]),
            Polynomial::from_roots(&[-1.0, -2.0, -3.0]),
        )
        .unwrap();
        let err = solve_output_matching(
            &g,
            &Polynomial::shifted_power(2.0, 2),
            &Polynomial::shifted_power(1.0, 2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Assumption { .. }), "{err}");
    }

    #[test]
    fn first_order_plant_rejected_for_output_feedback() {
        let g = RationalTF::new(Polynomial::one(), Polynomial::new(vec![1.0, 1.0])).unwrap();
        assert!(matches!(
            solve_output_matching(&g, &Polynomial::one(), &Polynomial::new(vec![1.0, 1.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn wrong_pm_degree() {
        let g = RationalTF::new(Polynomial::one(), Polynomial::from_roots(&[-1.0, -2.0])).unwrap();
        assert!(solve_output_matching(&g, &Polynomial::new(vec![2.0, 1.0]), &Polynomial::new(vec![1.0, 1.0])).is_err());
    }

    #[test]
    fn theta3_is_reciprocal_gain() {
        let g = RationalTF::new(
            Polynomial::new(vec![-0.0012, -0.0176, -0.023]),
            Polynomial::from_descending(&[1.0, 1.3791, 2.1744, 0.0989, 0.0651]),
        )
        .unwrap();
        let m = solve_output_matching(
            &g,
            &Polynomial::shifted_power(2.0, 3),
            &Polynomial::shifted_power(1.0, 2),
        )
        .unwrap();
        assert_eq!(m.theta3, 1.0 / -0.023);
        assert!((m.theta3 - -43.478261).abs() < 1e-6);
        assert!(output_matching_residual(&g, &Polynomial::shifted_power(2.0, 3), &Polynomial::shifted_power(1.0, 2), &m) < 1e-8);
    }
}
