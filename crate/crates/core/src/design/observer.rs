//! Reduced-order observer for the reference system, written in filter form
//! `w_m = Θ1ᵀ a(s)/Λe(s)[u_m] + Θ2ᵀ a(s)/Λe(s)[y_m]`.

use nalgebra::{DMatrix, DVector, RowDVector};

use super::matching::check_lambda;
use crate::error::{Error, Result};
use crate::lti::{faddeev_leverrier, place_observer_gain, Polynomial, StateSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDesign {
    /// Basis change `x̄ = T x_m` with `x̄_1 = y_m`.
    pub t: DMatrix<f64>,
    /// `Q_m = T^{-1}`.
    pub q_m: DMatrix<f64>,
    /// `Ā = T A_m T^{-1}`
    pub a_bar: DMatrix<f64>,
    /// `B̄ = T b_m`
    pub b_bar: DVector<f64>,
    pub l_r: DVector<f64>,
    /// Observer state matrix `Ā22 - L_r Ā12`.
    pub f: DMatrix<f64>,
    /// Input vector for `u_m`: `B̄2 - L_r B̄1`.
    pub g_um: DVector<f64>,
    /// Input vector for `y_m`: `F L_r + Ā21 - L_r Ā11`.
    pub g_ym: DVector<f64>,
    /// `Θ1*`, so that `(sI - F)^{-1} g_um = Θ1*ᵀ a(s) / Λe(s)`.
    pub theta1: DMatrix<f64>,
    /// `Θ2*`, so that `(sI - F)^{-1} g_ym = Θ2*ᵀ a(s) / Λe(s)`.
    pub theta2: DMatrix<f64>,
    pub lambda_e: Polynomial,
    /// Condition number of the observability matrix used for `L_r`.
    pub cond: f64,
}

impl ObserverDesign {
    pub fn order(&self) -> usize {
        self.t.nrows()
    }

    /// `x̂_m = Q_m [y_m; w_m + L_r y_m]`.
    pub fn estimate(&self, y_m: f64, w_m: &DVector<f64>) -> DVector<f64> {
        let n = self.order();
        let mut z = DVector::zeros(n);
        z[0] = y_m;
        for i in 0..n - 1 {
            z[i + 1] = w_m[i] + self.l_r[i] * y_m;
        }
        &self.q_m * z
    }

    /// Observer dynamics `w' = F w + g_um u_m + g_ym y_m`.
    pub fn w_derivative(&self, w_m: &DVector<f64>, u_m: f64, y_m: f64) -> DVector<f64> {
        &self.f * w_m + &self.g_um * u_m + &self.g_ym * y_m
    }
}

/// Row-completion candidates for `T = [c_m; rows of I]`: the excluded
/// identity column is tried in order of decreasing `|c_m|` entry.
fn completions(c: &RowDVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&i, &j| c[j].abs().total_cmp(&c[i].abs()).then(i.cmp(&j)));
    idx
}

fn basis_change(c: &RowDVector<f64>, skip: usize) -> DMatrix<f64> {
    let n = c.len();
    let mut t = DMatrix::zeros(n, n);
    t.set_row(0, c);
    for (r, j) in (0..n).filter(|&j| j != skip).enumerate() {
        t[(r + 1, j)] = 1.0;
    }
    t
}

/// Coefficient matrix `N` with `adj(sI - F) v = N [1, s, ..., s^{m-1}]ᵀ`.
fn numerator_matrix(adj: &[DMatrix<f64>], v: &DVector<f64>) -> DMatrix<f64> {
    let m = v.len();
    let mut out = DMatrix::zeros(m, m);
    for (k, nk) in adj.iter().enumerate() {
        out.set_column(m - 1 - k, &(nk * v));
    }
    out
}

pub fn reduced_observer_design(
    reference: &StateSpace,
    lambda_e: &Polynomial,
) -> Result<ObserverDesign> {
    let n = reference.order();
    if n < 2 {
        return Err(Error::Dimension(
            "reduced-order observer needs reference order n >= 2".into(),
        ));
    }
    if reference.c.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("reference output map c_m is zero".into()));
    }
    check_lambda(lambda_e, n, "Lambda_e")?;

    let c = &reference.c;
    let mut chosen = None;
    for skip in completions(c) {
        let t = basis_change(c, skip);
        if let Some(q) = t.clone().try_inverse() {
            if c[skip].abs() > 1e-12 * c.amax() {
                chosen = Some((t, q));
                break;
            }
        }
    }
    let (t, q_m) = chosen.ok_or_else(|| {
        Error::Degenerate("no identity-row completion of c_m gives a nonsingular basis".into())
    })?;

    let a_bar = &t * &reference.a * &q_m;
    let b_bar = &t * &reference.b;
    let a11 = a_bar[(0, 0)];
    let a12: RowDVector<f64> = a_bar.row(0).columns(1, n - 1).into_owned();
    let a21: DVector<f64> = a_bar.column(0).rows(1, n - 1).into_owned();
    let a22: DMatrix<f64> = a_bar.view((1, 1), (n - 1, n - 1)).into_owned();
    let b1 = b_bar[0];
    let b2: DVector<f64> = b_bar.rows(1, n - 1).into_owned();

    let placement = place_observer_gain(&a22, &a12, lambda_e).map_err(|e| match e {
        Error::Unobservable(d) => Error::Unobservable(format!("(A_m, c_m): {d}")),
        other => other,
    })?;
    let l_r = placement.gain;
    let f = &a22 - &l_r * &a12;
    let g_um = &b2 - &l_r * b1;
    let g_ym = &f * &l_r + &a21 - &l_r * a11;

    let (_, adj) = faddeev_leverrier(&f);
    let theta1 = numerator_matrix(&adj, &g_um).transpose();
    let theta2 = numerator_matrix(&adj, &g_ym).transpose();

    Ok(ObserverDesign {
        t,
        q_m,
        a_bar,
        b_bar,
        l_r,
        f,
        g_um,
        g_ym,
        theta1,
        theta2,
        lambda_e: lambda_e.clone(),
        cond: placement.cond,
    })
}
