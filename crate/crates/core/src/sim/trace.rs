use std::io::{self, Write};

use super::simulation::Signals;
use crate::adaptive::Scheme;

pub const CSV_HEADER: &str = "t,y,y_m,e,u,u_m,theta_norm,rho,eps_over_m,V";

/// Where and why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub t: f64,
    pub detail: String,
}

/// Logged time series, one entry per integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub scheme: Scheme,
    pub dt: f64,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub y_m: Vec<f64>,
    pub e: Vec<f64>,
    pub u: Vec<f64>,
    pub u_m: Vec<f64>,
    pub theta_norm: Vec<f64>,
    pub rho: Vec<f64>,
    pub eps_over_m: Vec<f64>,
    pub v: Vec<f64>,
    pub diverged: Option<Divergence>,
}

impl Trace {
    pub fn with_capacity(scheme: Scheme, dt: f64, n: usize) -> Self {
        let col = || Vec::with_capacity(n);
        Trace {
            scheme,
            dt,
            t: col(),
            y: col(),
            y_m: col(),
            e: col(),
            u: col(),
            u_m: col(),
            theta_norm: col(),
            rho: col(),
            eps_over_m: col(),
            v: col(),
            diverged: None,
        }
    }

    pub fn push(&mut self, t: f64, s: &Signals, theta_norm: f64, rho: f64, v: f64) {
        self.t.push(t);
        self.y.push(s.y);
        self.y_m.push(s.y_m);
        self.e.push(s.e);
        self.u.push(s.u);
        self.u_m.push(s.u_m);
        self.theta_norm.push(theta_norm);
        self.rho.push(rho);
        self.eps_over_m.push(s.eps / s.m);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn completed(&self) -> bool {
        self.diverged.is_none()
    }

    fn row(&self, k: usize) -> [f64; 10] {
        [
            self.t[k],
            self.y[k],
            self.y_m[k],
            self.e[k],
            self.u[k],
            self.u_m[k],
            self.theta_norm[k],
            self.rho[k],
            self.eps_over_m[k],
            self.v[k],
        ]
    }

    /// Writes every `stride`-th sample (and always the last one) as CSV. A
    /// partial trace starts with a `#` comment line saying where it stopped.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> io::Result<()> {
        let stride = stride.max(1);
        if let Some(d) = &self.diverged {
            writeln!(w, "# partial trace: diverged at t = {:e}: {}", d.t, d.detail)?;
        }
        writeln!(w, "{CSV_HEADER}")?;
        let last = self.len().saturating_sub(1);
        for k in (0..self.len()).filter(|&k| k % stride == 0 || k == last) {
            let row = self.row(k);
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{v:e}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn metrics(&self) -> Metrics {
        metrics(self)
    }
}

/// Largest magnitudes seen per signal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SignalBounds {
    pub y: f64,
    pub y_m: f64,
    pub u: f64,
    pub u_m: f64,
    pub theta_norm: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// RMS of `e` over the last 20% of the logged time span.
    pub tail_rms_e: f64,
    pub max_abs_e: f64,
    pub bounds: SignalBounds,
    /// Every logged signal finite and below the divergence bound.
    pub bounded: bool,
    /// `max_k (V_{k+1} − V_k)₊`.
    pub v_violation_max: f64,
    /// Trapezoidal `∫ ε²/m² dt`.
    pub l2_integral: f64,
    pub v0: f64,
    pub completed: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

pub fn metrics(tr: &Trace) -> Metrics {
    let n = tr.len();
    let t_end = tr.t.last().copied().unwrap_or(0.0);
    let t0 = tr.t.first().copied().unwrap_or(0.0);
    let tail_start = t0 + 0.8 * (t_end - t0);
    let tail: Vec<f64> = tr
        .t
        .iter()
        .zip(&tr.e)
        .filter(|(t, _)| **t >= tail_start - 1e-9 * t_end.abs().max(1.0))
        .map(|(_, e)| *e)
        .collect();
    let tail_rms_e = if tail.is_empty() {
        0.0
    } else {
        (tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64).sqrt()
    };
    let bounds = SignalBounds {
        y: max_abs(&tr.y),
        y_m: max_abs(&tr.y_m),
        u: max_abs(&tr.u),
        u_m: max_abs(&tr.u_m),
        theta_norm: max_abs(&tr.theta_norm),
        rho: max_abs(&tr.rho),
    };
    let bound = super::simulation::DIVERGENCE_BOUND;
    let bounded = [&tr.y, &tr.y_m, &tr.e, &tr.u, &tr.u_m, &tr.theta_norm, &tr.rho]
        .iter()
        .all(|c| c.iter().all(|v| v.is_finite() && v.abs() <= bound));
    let v_violation_max = tr
        .v
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max);
    let mut l2 = 0.0;
    for k in 1..n {
        let a = tr.eps_over_m[k - 1];
        let b = tr.eps_over_m[k];
        l2 += 0.5 * (tr.t[k] - tr.t[k - 1]) * (a * a + b * b);
    }
    Metrics {
        tail_rms_e,
        max_abs_e: max_abs(&tr.e),
        bounds,
        bounded,
        v_violation_max,
        l2_integral: l2,
        v0: tr.v.first().copied().unwrap_or(0.0),
        completed: tr.completed(),
    }
}
