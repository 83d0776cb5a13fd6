use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};

/// Single-input single-output realization `x' = A x + b u`, `y = c x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: RowDVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::Dimension("state dimension must be at least 1".into()));
        }
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, b has {} entries, c has {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Malformed("non-finite entry in (A, b, c)".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Convenience constructor from row-major data.
    pub fn from_rows(a: &[&[f64]], b: &[f64], c: &[f64]) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("A must be square".into()));
        }
        let flat: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(b),
            RowDVector::from_row_slice(c),
        )
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `c A^i b` for `i = 0..count`.
    pub fn markov_parameters(&self, count: usize) -> Vec<f64> {
        let mut v = self.b.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push((&self.c * &v)[0]);
            v = &self.a * v;
        }
        out
    }

    /// Relative degree read off the Markov parameters: the first `i` with
    /// `c A^(i-1) b` nonzero. A parameter counts as zero when it is below
    /// `1e-10 * ||A||^i * ||b|| * ||c||`.
    pub fn relative_degree(&self) -> Option<usize> {
        let n = self.order();
        let na = self.a.norm().max(f64::MIN_POSITIVE);
        let base = self.b.norm() * self.c.norm();
        self.markov_parameters(n)
            .iter()
            .enumerate()
            .find(|(i, m)| m.abs() > 0.0 && m.abs() >= 1e-10 * na.powi(*i as i32) * base)
            .map(|(i, _)| i + 1)
    }

    /// `c (jw I - A)^{-1} b` by a direct complex solve.
    pub fn freq_response(&self, w: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, w))
    }

    /// `c (sI - A)^{-1} b` at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        resolvent_apply(&self.a, &self.b, s)
            .map(|x| {
                self.c
                    .iter()
                    .zip(x.iter())
                    .map(|(ci, xi)| xi * *ci)
                    .sum::<Complex64>()
            })
            .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    }

    /// Controllability matrix `[b, Ab, ..., A^{n-1} b]`.
    pub fn controllability(&self) -> DMatrix<f64> {
        krylov_columns(&self.a, &self.b)
    }

    /// Observability matrix with rows `c, cA, ..., c A^{n-1}`.
    pub fn observability(&self) -> DMatrix<f64> {
        krylov_columns(&self.a.transpose(), &self.c.transpose()).transpose()
    }

    /// Same system in coordinates `z = T x`.
    pub fn transformed(&self, t: &DMatrix<f64>) -> Result<Self> {
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular coordinate change".into()))?;
        Self::new(t * &self.a * &t_inv, t * &self.b, &self.c * t_inv)
    }
}

/// `(sI - A)^{-1} b`, `None` if `s` is an eigenvalue.
pub fn resolvent_apply(a: &DMatrix<f64>, b: &DVector<f64>, s: Complex64) -> Option<DVector<Complex64>> {
    let n = a.nrows();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let d = if i == j { s } else { Complex64::new(0.0, 0.0) };
        d - a[(i, j)]
    });
    let rhs = DVector::<Complex64>::from_fn(n, |i, _| Complex64::new(b[i], 0.0));
    m.lu().solve(&rhs)
}

fn krylov_columns(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    let mut col = v.clone();
    for k in 0..n {
        out.set_column(k, &col);
        col = a * col;
    }
    out
}

/// Characteristic polynomial `det(sI - A)` together with the matrix
/// coefficients of `adj(sI - A) = sum_k N_k s^(n-1-k)`, by the
/// Faddeev–LeVerrier recursion.
pub fn faddeev_leverrier(a: &DMatrix<f64>) -> (Polynomial, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    // descending coefficients c_0 = 1, c_1, ..., c_n
    let mut c = vec![1.0; n + 1];
    let mut adj = Vec::with_capacity(n);
    let mut nk = eye.clone();
    for k in 1..=n {
        adj.push(nk.clone());
        let an = a * &nk;
        c[k] = -an.trace() / k as f64;
        nk = an + &eye * c[k];
    }
    (Polynomial::from_descending(&c), adj)
}

pub fn char_poly(a: &DMatrix<f64>) -> Polynomial {
    faddeev_leverrier(a).0
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
