use num_complex::Complex64;

use super::{faddeev_leverrier, Polynomial, StateSpace};
use crate::error::{Error, Result};

/// `k_p Z(s) / P(s)` with monic `Z` and `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    pub gain: f64,
    pub num: Polynomial,
    pub den: Polynomial,
}

impl RationalTF {
    /// Normalizes `num` and `den` to monic form, folding their leading
    /// coefficients into the gain.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        if num.is_zero() {
            return Err(Error::Degenerate("zero transfer function".into()));
        }
        if num.degree() > den.degree() {
            return Err(Error::Malformed(format!(
                "improper transfer function: numerator degree {:?} exceeds denominator degree {:?}",
                num.degree(),
                den.degree()
            )));
        }
        Ok(Self {
            gain: num.leading() / den.leading(),
            num: num.monic(),
            den: den.monic(),
        })
    }

    pub fn relative_degree(&self) -> usize {
        relative_degree(self)
    }

    /// Plant order `n = deg P`.
    pub fn order(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s) * self.gain
    }

    pub fn freq_response(&self, w: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, w))
    }

    /// Pole-zero pairs closer than `tol`, found by comparing numerator
    /// values at the denominator's roots. Returned as `(pole, |Z(pole)|)`.
    ///
    /// Nothing is cancelled; this is a diagnostic only.
    pub fn near_cancellations(&self, tol: f64) -> Vec<(Complex64, f64)> {
        let poles = poly_roots(&self.den);
        let zeros = poly_roots(&self.num);
        poles
            .into_iter()
            .filter_map(|p| {
                zeros
                    .iter()
                    .map(|z| (z - p).norm())
                    .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
                    .filter(|&d| d < tol)
                    .map(|d| (p, d))
            })
            .collect()
    }
}

/// `n* = deg(den) - deg(num)`.
pub fn relative_degree(tf: &RationalTF) -> usize {
    tf.den.degree().unwrap_or(0) - tf.num.degree().unwrap_or(0)
}

/// Transfer function of `(A, b, c)`: `P(s) = det(sI - A)` and the numerator
/// `c adj(sI - A) b`, both from the Faddeev–LeVerrier recursion. Common
/// factors are kept.
///
/// Numerator coefficients below `1e-12` of the largest one (relative to
/// `||c|| ||b||`) are treated as zero when locating the leading term.
pub fn tf_from_ss(sys: &StateSpace) -> Result<RationalTF> {
    let n = sys.order();
    let (den, adj) = faddeev_leverrier(&sys.a);
    // adj(sI - A) = sum_k N_k s^(n-1-k); numerator coefficient of s^(n-1-k)
    let mut num = vec![0.0; n];
    for (k, nk) in adj.iter().enumerate() {
        num[n - 1 - k] = (&sys.c * nk * &sys.b)[0];
    }
    let scale = sys.c.norm() * sys.b.norm() * (1.0 + sys.a.norm()).powi(n as i32 - 1);
    let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);
    // The leading term sits at the relative degree; anything above it is
    // rounding noise of exact zeros.
    let lead = match sys.relative_degree() {
        Some(r) => n - r,
        None => {
            return Err(Error::Degenerate(
                "c (sI - A)^{-1} b is identically zero".into(),
            ))
        }
    };
    if num[lead].abs() <= tiny {
        return Err(Error::Degenerate(
            "c (sI - A)^{-1} b is identically zero".into(),
        ));
    }
    num.truncate(lead + 1);
    RationalTF::new(Polynomial::new(num), den)
}

/// Roots of a polynomial from the eigenvalues of its companion matrix.
pub fn poly_roots(p: &Polynomial) -> Vec<Complex64> {
    let Some(d) = p.degree() else { return Vec::new() };
    if d == 0 {
        return Vec::new();
    }
    let m = p.monic();
    let comp = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        if i + 1 == j {
            1.0
        } else if i == d - 1 {
            -m.coeff(j)
        } else {
            0.0
        }
    });
    comp.complex_eigenvalues().iter().copied().collect()
}
