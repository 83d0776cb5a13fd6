//! Design certificates: a human summary followed by a machine-readable
//! `key = values` block at 17 significant digits.

use std::fmt::Write as _;

use mrac_core::design::{
    output_matching_residual, state_matching_residual, NominalDesign, SchemeDesign,
};
use mrac_core::sim::Scenario;
use mrac_core::Scheme;
use nalgebra::{DMatrix, DVector};

use crate::scenario_file::ParseError;

pub const MARKER: &str = "[certificate]";

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn full_list(v: &[f64]) -> String {
    v.iter().map(|x| full(*x)).collect::<Vec<_>>().join(", ")
}

fn full_matrix(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| full_list(&m.row(i).iter().copied().collect::<Vec<_>>()))
        .collect::<Vec<_>>()
        .join("; ")
}

fn short(v: f64) -> String {
    format!("{v:.6}")
}

fn short_list(v: &DVector<f64>) -> String {
    let items: Vec<String> = v.iter().map(|x| short(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn residual(sc: &Scenario, d: &SchemeDesign) -> Option<f64> {
    match (&d.ofb, &d.sfb) {
        (Some(o), _) => sc
            .lambda
            .as_ref()
            .map(|l| output_matching_residual(&d.plant_tf, l, &sc.pm, o)),
        (_, Some(s)) => Some(state_matching_residual(&sc.plant, s, &sc.pm)),
        _ => None,
    }
}

/// Human-readable summary (6 decimals).
pub fn human_summary(sc: &Scenario, d: &SchemeDesign) -> String {
    let mut s = String::new();
    let tf = &d.plant_tf;
    let _ = writeln!(s, "{} design, n = {}, n* = {}", d.scheme, d.n, d.n_star);
    let _ = writeln!(s, "  k_p            {}", short(tf.gain));
    let _ = writeln!(s, "  Z(s)           {}", tf.num);
    let _ = writeln!(s, "  P(s)           {}", tf.den);
    if let Some(o) = &d.ofb {
        let _ = writeln!(s, "  theta1*        {}", short_list(&o.theta1));
        let _ = writeln!(s, "  theta2*        {}", short_list(&o.theta2));
        let _ = writeln!(s, "  theta20*       {}", short(o.theta20));
        let _ = writeln!(s, "  theta3*        {}", short(o.theta3));
    }
    if let Some(m) = &d.sfb {
        let _ = writeln!(s, "  k1*            {}", short_list(&m.k1));
        let _ = writeln!(s, "  k2*            {}", short(m.k2));
    }
    let _ = writeln!(s, "  alpha1         {}", short_list(&d.axm.alpha1));
    let _ = writeln!(s, "  alpha2         {}", short(d.axm.alpha2));
    if let (Some(obs), Some(b)) = (&d.obs, &d.aym) {
        let _ = writeln!(s, "  L_r            {}", short_list(&obs.l_r));
        for (name, m) in [("Theta1*", &obs.theta1), ("Theta2*", &obs.theta2)] {
            for i in 0..m.nrows() {
                let row = m.row(i).transpose();
                let label = if i == 0 { name } else { "" };
                let _ = writeln!(s, "  {label:<14} {}", short_list(&row));
            }
        }
        let _ = writeln!(s, "  beta1          {}", short_list(&b.beta1));
        let _ = writeln!(s, "  beta2          {}", short_list(&b.beta2));
        let _ = writeln!(s, "  beta20         {}", short(b.beta20));
    }
    let _ = writeln!(s, "  theta*         {}", short_list(&d.nominal.theta_star));
    let _ = writeln!(s, "  rho*           {}", short(d.nominal.rho_star));
    if let Some(r) = residual(sc, d) {
        let _ = writeln!(s, "  matching residual {r:.3e}");
    }
    s
}

/// Machine-readable block, starting with [`MARKER`].
pub fn machine_block(sc: &Scenario, d: &SchemeDesign) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MARKER}");
    let _ = writeln!(s, "scheme = {}", d.scheme);
    let _ = writeln!(s, "n = {}", d.n);
    let _ = writeln!(s, "n_star = {}", d.n_star);
    let _ = writeln!(s, "k_p = {}", full(d.plant_tf.gain));
    let _ = writeln!(s, "theta_star = {}", full_list(d.nominal.theta_star.as_slice()));
    let _ = writeln!(s, "rho_star = {}", full(d.nominal.rho_star));
    if let Some(o) = &d.ofb {
        let _ = writeln!(s, "theta1 = {}", full_list(o.theta1.as_slice()));
        let _ = writeln!(s, "theta2 = {}", full_list(o.theta2.as_slice()));
        let _ = writeln!(s, "theta20 = {}", full(o.theta20));
        let _ = writeln!(s, "theta3 = {}", full(o.theta3));
    }
    if let Some(m) = &d.sfb {
        let _ = writeln!(s, "k1 = {}", full_list(m.k1.as_slice()));
        let _ = writeln!(s, "k2 = {}", full(m.k2));
    }
    let _ = writeln!(s, "alpha1 = {}", full_list(d.axm.alpha1.as_slice()));
    let _ = writeln!(s, "alpha2 = {}", full(d.axm.alpha2));
    if let (Some(obs), Some(b)) = (&d.obs, &d.aym) {
        let _ = writeln!(s, "l_r = {}", full_list(obs.l_r.as_slice()));
        let _ = writeln!(s, "Theta1 = {}", full_matrix(&obs.theta1));
        let _ = writeln!(s, "Theta2 = {}", full_matrix(&obs.theta2));
        let _ = writeln!(s, "beta1 = {}", full_list(b.beta1.as_slice()));
        let _ = writeln!(s, "beta2 = {}", full_list(b.beta2.as_slice()));
        let _ = writeln!(s, "beta20 = {}", full(b.beta20));
    }
    if let Some(r) = residual(sc, d) {
        let _ = writeln!(s, "matching_residual = {}", full(r));
    }
    s
}

const KNOWN: &[&str] = &[
    "scheme",
    "n",
    "n_star",
    "k_p",
    "theta_star",
    "rho_star",
    "theta1",
    "theta2",
    "theta20",
    "theta3",
    "k1",
    "k2",
    "alpha1",
    "alpha2",
    "l_r",
    "Theta1",
    "Theta2",
    "beta1",
    "beta2",
    "beta20",
    "matching_residual",
];

fn perr(line: usize, key: Option<&str>, msg: impl Into<String>) -> ParseError {
    ParseError {
        line: Some(line),
        key: key.map(str::to_string),
        message: msg.into(),
    }
}

/// Reads `scheme`, `theta_star` and `rho_star` from a certificate. Lines
/// before [`MARKER`] (the human summary) are skipped when the marker exists.
pub fn parse_certificate(text: &str) -> Result<NominalDesign, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| l.trim() == MARKER)
        .map(|i| i + 1)
        .unwrap_or(0);
    let mut scheme = None;
    let mut theta = None;
    let mut rho = None;
    for (i, raw) in lines.iter().enumerate().skip(start) {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| perr(lineno, None, "expected 'key = value'"))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN.contains(&k) {
            return Err(perr(lineno, Some(k), "unknown certificate key"));
        }
        let num = |s: &str| -> Result<f64, ParseError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| perr(lineno, Some(k), format!("'{}' is not a number", s.trim())))
        };
        match k {
            "scheme" => {
                scheme = Some(
                    v.parse::<Scheme>()
                        .map_err(|e| perr(lineno, Some(k), e.to_string()))?,
                )
            }
            "theta_star" => {
                let vals = v.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                theta = Some(DVector::from_vec(vals));
            }
            "rho_star" => rho = Some(num(v)?),
            _ => {}
        }
    }
    let missing = |k: &str| ParseError {
        line: None,
        key: Some(k.into()),
        message: "missing from certificate".into(),
    };
    let scheme = scheme.ok_or_else(|| missing("scheme"))?;
    let theta_star = theta.ok_or_else(|| missing("theta_star"))?;
    let rho_star = rho.ok_or_else(|| missing("rho_star"))?;
    Ok(NominalDesign {
        scheme,
        theta_star,
        rho_star,
    })
}
