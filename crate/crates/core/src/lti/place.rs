//! Pole placement by Ackermann's formula.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, RowDVector};

use super::{condition_number, Polynomial};
use crate::error::{Error, Result};

/// Condition numbers above this are reported; the gains are still returned.
pub const COND_WARN: f64 = 1e12;
/// Controllability/observability matrices worse than this are rank deficient.
pub const COND_SINGULAR: f64 = 1e15;

/// Observer gain with its conditioning record.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub gain: DVector<f64>,
    pub cond: f64,
}

/// `p(M) = sum_i p_i M^i` by Horner's rule.
pub fn poly_of_matrix(p: &Polynomial, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for &c in p.coeffs().iter().rev() {
        acc = &acc * m + DMatrix::<f64>::identity(n, n) * c;
    }
    acc
}

fn check_target(desired: &Polynomial, n: usize) -> Result<()> {
    if desired.degree() != Some(n) {
        return Err(Error::Dimension(format!(
            "desired polynomial has degree {:?}, expected {n}",
            desired.degree()
        )));
    }
    if !desired.is_monic() {
        return Err(Error::Malformed("desired polynomial must be monic".into()));
    }
    Ok(())
}

/// Gain `L` with `det(sI - (A22 - L A12)) = desired`.
///
/// Ackermann's formula on the dual pair: `L = desired(A22) O^{-1} e_n`
/// where `O` stacks `A12 A22^i`. The linear solve uses partial pivoting.
pub fn place_observer_gain(
    a22: &DMatrix<f64>,
    a12: &RowDVector<f64>,
    desired: &Polynomial,
) -> Result<Placement> {
    let n = a22.nrows();
    if a22.ncols() != n || a12.len() != n {
        return Err(Error::Dimension(format!(
            "A22 is {}x{}, A12 has {} entries",
            a22.nrows(),
            a22.ncols(),
            a12.len()
        )));
    }
    check_target(desired, n)?;

    let mut obs = DMatrix::<f64>::zeros(n, n);
    let mut row = a12.clone();
    for i in 0..n {
        obs.set_row(i, &row);
        row = &row * a22;
    }
    let cond = condition_number(&obs);
    if !cond.is_finite() || cond > COND_SINGULAR {
        return Err(Error::Unobservable(format!(
            "observability matrix condition number {cond:e}"
        )));
    }
    if cond > COND_WARN {
        warn!("observer placement: observability matrix condition number {cond:e}");
    } else {
        debug!("observer placement: observability matrix condition number {cond:e}");
    }
    let mut e_last = DVector::<f64>::zeros(n);
    e_last[n - 1] = 1.0;
    let x = obs
        .lu()
        .solve(&e_last)
        .ok_or_else(|| Error::Unobservable("observability matrix is singular".into()))?;
    let gain = poly_of_matrix(desired, a22) * x;
    Ok(Placement { gain, cond })
}

/// Gain `k` with `det(sI - (A + b k^T)) = desired`.
pub fn place_state_feedback(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    desired: &Polynomial,
) -> Result<Placement> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension("A must be square and match b".into()));
    }
    check_target(desired, n)?;

    let mut ctrb = DMatrix::<f64>::zeros(n, n);
    let mut col = b.clone();
    for i in 0..n {
        ctrb.set_column(i, &col);
        col = a * col;
    }
    let cond = condition_number(&ctrb);
    if !cond.is_finite() || cond > COND_SINGULAR {
        return Err(Error::Uncontrollable(format!(
            "controllability matrix condition number {cond:e}"
        )));
    }
    if cond > COND_WARN {
        warn!("state feedback placement: controllability matrix condition number {cond:e}");
    }
    // K = e_n^T C^{-1} desired(A), solved as C^T y = e_n, K = y^T desired(A)
    let mut e_last = DVector::<f64>::zeros(n);
    e_last[n - 1] = 1.0;
    let y = ctrb
        .transpose()
        .lu()
        .solve(&e_last)
        .ok_or_else(|| Error::Uncontrollable("controllability matrix is singular".into()))?;
    let k_row = y.transpose() * poly_of_matrix(desired, a);
    Ok(Placement {
        gain: -k_row.transpose(),
        cond,
    })
}
