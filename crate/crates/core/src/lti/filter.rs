//! Companion-form realizations of the stable filters used by the
//! controllers: the banks `a(s)/Λ(s)` and the vector filter `W_m(s) = 1/P_m(s)`.

use nalgebra::{DMatrix, DVector};

use super::{is_hurwitz, Polynomial};
use crate::error::{Error, Result};

/// Realization of `[1, s, ..., s^(m-1)]^T / Λ(s)` for monic Hurwitz `Λ` of
/// degree `m`. State `i` is `s^i / Λ(s)` applied to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    /// `λ_0 .. λ_{m-1}` of `Λ(s) = s^m + λ_{m-1} s^{m-1} + ... + λ_0`
    low: Vec<f64>,
    poly: Polynomial,
}

impl FilterBank {
    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    /// Companion matrix `A_f`.
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| {
            if i + 1 == j {
                1.0
            } else if i == m - 1 {
                -self.low[j]
            } else {
                0.0
            }
        })
    }

    /// Input vector `b_f = e_m`.
    pub fn b_vector(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        b[self.dim() - 1] = 1.0;
        b
    }

    /// Writes `A_f x + b_f input` into `out`.
    #[inline]
    pub fn derivative(&self, x: &[f64], input: f64, out: &mut [f64]) {
        let m = self.low.len();
        out[..m - 1].copy_from_slice(&x[1..m]);
        let mut acc = input;
        for (l, xi) in self.low.iter().zip(x) {
            acc -= l * xi;
        }
        out[m - 1] = acc;
    }
}

/// Builds the filter bank for `Λ(s)`; rejects non-monic or unstable `Λ`.
pub fn realize_filter_bank(lambda: &Polynomial) -> Result<FilterBank> {
    let m = match lambda.degree() {
        Some(d) if d >= 1 => d,
        _ => {
            return Err(Error::Malformed(
                "filter polynomial must have degree >= 1".into(),
            ))
        }
    };
    if !lambda.is_monic() {
        return Err(Error::Malformed(format!("filter polynomial {lambda} is not monic")));
    }
    if !is_hurwitz(lambda)? {
        return Err(Error::NotHurwitz {
            what: format!("filter polynomial {lambda}"),
        });
    }
    Ok(FilterBank {
        low: lambda.coeffs()[..m].to_vec(),
        poly: lambda.clone(),
    })
}

/// `q` independent copies of `W_m(s) = 1/P_m(s)`. Channel `i` occupies
/// states `i*d .. (i+1)*d` with `d = deg P_m`; its output is the first of
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFilter {
    channel: FilterBank,
    q: usize,
}

impl VectorFilter {
    pub fn channels(&self) -> usize {
        self.q
    }

    /// States per channel.
    pub fn channel_dim(&self) -> usize {
        self.channel.dim()
    }

    pub fn dim(&self) -> usize {
        self.q * self.channel.dim()
    }

    /// The single-channel realization.
    pub fn channel(&self) -> &FilterBank {
        &self.channel
    }

    pub fn output(&self, states: &[f64], i: usize) -> f64 {
        states[i * self.channel.dim()]
    }

    pub fn outputs<'a>(&'a self, states: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        states.chunks_exact(self.channel.dim()).map(|c| c[0])
    }

    pub fn derivative(&self, states: &[f64], inputs: &[f64], out: &mut [f64]) {
        let d = self.channel.dim();
        for ((x, dx), &u) in states
            .chunks_exact(d)
            .zip(out.chunks_exact_mut(d))
            .zip(inputs)
        {
            self.channel.derivative(x, u, dx);
        }
    }
}

pub fn realize_wm(pm: &Polynomial, q: usize) -> Result<VectorFilter> {
    if q == 0 {
        return Err(Error::Dimension("vector filter needs at least one channel".into()));
    }
    Ok(VectorFilter {
        channel: realize_filter_bank(pm)?,
        q,
    })
}
