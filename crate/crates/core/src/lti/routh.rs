//! Routh–Hurwitz stability test.

use super::Polynomial;
use crate::error::{Error, Result};

/// First-column entries whose magnitude falls below this fraction of the
/// largest coefficient are treated as zero (marginal, hence not Hurwitz).
pub const ROUTH_ZERO_TOL: f64 = 1e-12;

/// First column of the Routh array for `coeffs` (ascending order, leading
/// coefficient last and nonzero). Entries are scaled so the first is 1.
pub fn routh_first_column(coeffs: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
        Error::Malformed("Routh test needs a polynomial of degree >= 1".into())
    })?;
    let lead = coeffs[n];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Malformed(
            "Routh test needs a nonzero leading coefficient".into(),
        ));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Malformed("non-finite polynomial coefficient".into()));
    }

    // descending, normalized to a positive monic leading term
    let a: Vec<f64> = coeffs.iter().rev().map(|c| c / lead).collect();
    let scale = a.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let zero = ROUTH_ZERO_TOL * scale;

    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|k| a.get(2 * k).copied().unwrap_or(0.0)).collect();
    let mut cur: Vec<f64> = (0..width)
        .map(|k| a.get(2 * k + 1).copied().unwrap_or(0.0))
        .collect();

    let mut column = vec![prev[0]];
    for _ in 0..n {
        column.push(cur[0]);
        if column.len() == n + 1 || cur[0].abs() <= zero {
            // done, or a degenerate row: roots on or right of the axis
            break;
        }
        let next: Vec<f64> = (0..width)
            .map(|k| {
                let p1 = prev.get(k + 1).copied().unwrap_or(0.0);
                let c1 = cur.get(k + 1).copied().unwrap_or(0.0);
                (cur[0] * p1 - prev[0] * c1) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    Ok(column)
}

/// True iff every root of `p` has strictly negative real part.
///
/// Decided from the sign pattern of the Routh array; no roots are computed.
/// A (numerically) zero first-column entry counts as a failure, so marginal
/// polynomials are rejected.
pub fn is_hurwitz(p: &Polynomial) -> Result<bool> {
    is_hurwitz_coeffs(p.coeffs())
}

/// As [`is_hurwitz`] for a raw ascending coefficient slice, which may carry
/// an explicit zero leading coefficient (rejected as malformed).
pub fn is_hurwitz_coeffs(coeffs: &[f64]) -> Result<bool> {
    let column = routh_first_column(coeffs)?;
    let n = coeffs.len() - 1;
    let scale = coeffs
        .iter()
        .map(|c| (c / coeffs[n]).abs())
        .fold(0.0_f64, f64::max);
    let zero = ROUTH_ZERO_TOL * scale;
    Ok(column.len() == n + 1 && column.iter().all(|&c| c > zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_cube() {
        assert!(is_hurwitz(&Polynomial::shifted_power(2.0, 3)).unwrap());
    }

    #[test]
    fn unstable_root() {
        assert!(!is_hurwitz(&Polynomial::new(vec![-1.0, 0.0, 1.0])).unwrap());
        assert!(!is_hurwitz(&Polynomial::from_roots(&[-1.0, 0.5, -3.0])).unwrap());
    }

    #[test]
    fn marginal_rejected() {
        // s^2 + 1: imaginary-axis roots
        assert!(!is_hurwitz(&Polynomial::new(vec![1.0, 0.0, 1.0])).unwrap());
        // s (s + 1): root at the origin
        assert!(!is_hurwitz(&Polynomial::new(vec![0.0, 1.0, 1.0])).unwrap());
        // (s^2 + 1)(s + 1) = s^3 + s^2 + s + 1: all coefficients positive,
        // zero row in the array
        assert!(!is_hurwitz(&Polynomial::new(vec![1.0, 1.0, 1.0, 1.0])).unwrap());
    }

    #[test]
    fn negative_leading_coefficient_normalized() {
        let p = Polynomial::shifted_power(1.0, 2).scale(-3.0);
        assert!(is_hurwitz(&p).unwrap());
    }

    #[test]
    fn malformed_inputs() {
        assert!(is_hurwitz_coeffs(&[1.0, 2.0, 0.0]).is_err());
        assert!(is_hurwitz(&Polynomial::constant(2.0)).is_err());
        assert!(is_hurwitz(&Polynomial::zero()).is_err());
    }

    #[test]
    fn stable_but_oscillatory_quartic() {
        // plant denominator of the aircraft example
        let p = Polynomial::from_descending(&[1.0, 1.379113, 2.174655, 0.0989, 0.065059]);
        assert!(is_hurwitz(&p).unwrap());
        // a coefficient pattern that is all positive yet unstable
        let q = Polynomial::from_descending(&[1.0, 1.0, 1.0, 10.0]);
        assert!(!is_hurwitz(&q).unwrap());
    }
}
