//! Strict INI-style scenario files.
//!
//! ```text
//! [plant]
//! A = -1, 0; 0, -2        # row-major, rows separated by ';'
//! b = 1, 1
//! c = 1, 0
//! design_num = ...        # optional, ascending coefficients
//! design_den = ...        # optional, together with design_num
//!
//! [reference]
//! A, b, c as above
//! k1m = ...
//! input = const 300       # or: sines 300,0.3; 250,0.5
//!
//! [design]
//! scheme = OFB_YM
//! pm = 1, 2, 1            # ascending: s^2 + 2s + 1
//! lambda = 8, 12, 6, 1    # output-feedback schemes
//! lambda_e = 8, 12, 6, 1  # y_m-based schemes
//!
//! [adaptation]
//! gamma = 5               # Gamma = gamma * I
//! gamma_rho = 5
//! sign_kp = -1
//! theta0 = scale 1.1      # or: values v1, v2, ...
//! rho0 = scale 1.1        # or: value v
//! frozen = false          # optional
//!
//! [sim]
//! horizon = 200
//! dt = 0.001
//! x0 = 0, 0
//! xm0 = 0, 0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use mrac_core::lti::{Polynomial, RationalTF, StateSpace};
use mrac_core::sim::{GammaSpec, ParamInit, RefInput, RhoInit, Scenario};
use mrac_core::Scheme;
use nalgebra::{DMatrix, DVector, RowDVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "key '{k}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

const SECTIONS: &[(&str, &[&str])] = &[
    ("plant", &["A", "b", "c", "design_num", "design_den"]),
    ("reference", &["A", "b", "c", "k1m", "input"]),
    ("design", &["scheme", "pm", "lambda", "lambda_e"]),
    (
        "adaptation",
        &["gamma", "gamma_rho", "sign_kp", "theta0", "rho0", "frozen"],
    ),
    ("sim", &["horizon", "dt", "x0", "xm0"]),
];

#[derive(Debug)]
struct Entry {
    line: usize,
    value: String,
}

/// Raw `section.key -> value` map with line numbers.
#[derive(Debug, Default)]
struct Raw {
    entries: BTreeMap<(String, String), Entry>,
}

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        key: key.map(str::to_string),
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Raw, ParseError> {
    let mut raw = Raw::default();
    let mut section: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(Some(lineno), None, "unterminated section header"))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(err(Some(lineno), None, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(Some(lineno), None, "expected 'key = value'"))?;
        let key = key.trim();
        let sec = section
            .as_deref()
            .ok_or_else(|| err(Some(lineno), Some(key), "key outside of any section"))?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(
                Some(lineno),
                Some(key),
                format!("unknown key in [{sec}]"),
            ));
        }
        let slot = (sec.to_string(), key.to_string());
        if let Some(prev) = raw.entries.get(&slot) {
            return Err(err(
                Some(lineno),
                Some(key),
                format!("duplicate key in [{sec}] (first set on line {})", prev.line),
            ));
        }
        raw.entries.insert(
            slot,
            Entry {
                line: lineno,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(raw)
}

struct Reader {
    raw: Raw,
}

impl Reader {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.raw.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn require(&self, sec: &str, key: &str) -> Result<&Entry, ParseError> {
        self.get(sec, key)
            .ok_or_else(|| err(None, Some(key), format!("missing required key in [{sec}]")))
    }

    fn number(&self, sec: &str, key: &str) -> Result<f64, ParseError> {
        let e = self.require(sec, key)?;
        parse_number(&e.value).map_err(|m| err(Some(e.line), Some(key), m))
    }

    fn vector(&self, sec: &str, key: &str) -> Result<Vec<f64>, ParseError> {
        let e = self.require(sec, key)?;
        parse_list(&e.value).map_err(|m| err(Some(e.line), Some(key), m))
    }

    fn matrix(&self, sec: &str, key: &str) -> Result<DMatrix<f64>, ParseError> {
        let e = self.require(sec, key)?;
        parse_matrix(&e.value).map_err(|m| err(Some(e.line), Some(key), m))
    }

    fn poly(&self, sec: &str, key: &str) -> Result<Polynomial, ParseError> {
        let e = self.require(sec, key)?;
        let v = parse_list(&e.value).map_err(|m| err(Some(e.line), Some(key), m))?;
        Ok(Polynomial::new(v))
    }

    fn state_space(&self, sec: &str) -> Result<StateSpace, ParseError> {
        let a = self.matrix(sec, "A")?;
        let b = self.vector(sec, "b")?;
        let c = self.vector(sec, "c")?;
        let line = self.get(sec, "A").map(|e| e.line);
        StateSpace::new(a, DVector::from_vec(b), RowDVector::from_vec(c))
            .map_err(|e| err(line, Some("A"), format!("[{sec}] {e}")))
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(parse_number).collect()
}

fn parse_matrix(s: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_list).collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(format!(
            "row {} has {} entries, row 1 has {cols}",
            i + 1,
            r.len()
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn parse_input(s: &str) -> Result<RefInput, String> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("const") {
        return Ok(RefInput::Const(parse_number(v)?));
    }
    if let Some(rest) = s.strip_prefix("sines") {
        let terms = rest
            .split(';')
            .map(|t| match parse_list(t)?.as_slice() {
                [a, w] => Ok((*a, *w)),
                _ => Err(format!("sine term '{}' must be 'amplitude,frequency'", t.trim())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(RefInput::Sines(terms));
    }
    Err(format!("expected 'const <v>' or 'sines a,w; ...', got '{s}'"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got '{other}'")),
    }
}

/// Command-line overrides applied before the per-scheme key checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub scheme: Option<Scheme>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

pub fn parse_scenario(text: &str, ov: &Overrides) -> Result<Scenario, ParseError> {
    let r = Reader { raw: tokenize(text)? };

    let plant = r.state_space("plant")?;
    let design_tf = match (r.get("plant", "design_num"), r.get("plant", "design_den")) {
        (None, None) => None,
        (Some(_), None) => {
            return Err(err(None, Some("design_den"), "required together with design_num"))
        }
        (None, Some(_)) => {
            return Err(err(None, Some("design_num"), "required together with design_den"))
        }
        (Some(ne), Some(_)) => {
            let num = r.poly("plant", "design_num")?;
            let den = r.poly("plant", "design_den")?;
            Some(
                RationalTF::new(num, den)
                    .map_err(|e| err(Some(ne.line), Some("design_num"), e.to_string()))?,
            )
        }
    };

    let reference = r.state_space("reference")?;
    let k1m = DVector::from_vec(r.vector("reference", "k1m")?);
    let input = r.require("reference", "input")?;
    let ref_input = parse_input(&input.value).map_err(|m| err(Some(input.line), Some("input"), m))?;

    let scheme = match ov.scheme {
        Some(s) => s,
        None => {
            let e = r.require("design", "scheme")?;
            e.value
                .parse::<Scheme>()
                .map_err(|x| err(Some(e.line), Some("scheme"), x.to_string()))?
        }
    };
    let pm = r.poly("design", "pm")?;
    let lambda = if scheme.state_feedback() {
        r.get("design", "lambda").map(|_| r.poly("design", "lambda")).transpose()?
    } else {
        Some(r.poly("design", "lambda")?)
    };
    let lambda_e = if scheme.uses_reference_state() {
        r.get("design", "lambda_e").map(|_| r.poly("design", "lambda_e")).transpose()?
    } else {
        Some(r.poly("design", "lambda_e")?)
    };

    let gamma = GammaSpec::Scalar(r.number("adaptation", "gamma")?);
    let gamma_rho = r.number("adaptation", "gamma_rho")?;
    let sign_kp = r.number("adaptation", "sign_kp")?;
    if sign_kp != 1.0 && sign_kp != -1.0 {
        let line = r.get("adaptation", "sign_kp").map(|e| e.line);
        return Err(err(line, Some("sign_kp"), "must be 1 or -1"));
    }
    let t0 = r.require("adaptation", "theta0")?;
    let theta0 = parse_theta0(&t0.value).map_err(|m| err(Some(t0.line), Some("theta0"), m))?;
    let r0 = r.require("adaptation", "rho0")?;
    let rho0 = parse_rho0(&r0.value).map_err(|m| err(Some(r0.line), Some("rho0"), m))?;
    let frozen = match r.get("adaptation", "frozen") {
        Some(e) => parse_bool(&e.value).map_err(|m| err(Some(e.line), Some("frozen"), m))?,
        None => false,
    };

    let horizon = match ov.horizon {
        Some(h) => h,
        None => r.number("sim", "horizon")?,
    };
    let dt = match ov.dt {
        Some(d) => d,
        None => r.number("sim", "dt")?,
    };
    let x0 = DVector::from_vec(r.vector("sim", "x0")?);
    let xm0 = DVector::from_vec(r.vector("sim", "xm0")?);

    Ok(Scenario {
        plant,
        design_tf,
        reference,
        k1m,
        ref_input,
        scheme,
        pm,
        lambda,
        lambda_e,
        gamma,
        gamma_rho,
        sign_kp,
        theta0,
        rho0,
        x0: Some(x0),
        xm0: Some(xm0),
        horizon,
        dt,
        adapt: !frozen,
    })
}

fn parse_theta0(s: &str) -> Result<ParamInit, String> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("scale") {
        Ok(ParamInit::Scale(parse_number(v)?))
    } else if let Some(v) = s.strip_prefix("values") {
        Ok(ParamInit::Value(DVector::from_vec(parse_list(v)?)))
    } else {
        Err(format!("expected 'scale <k>' or 'values v1, v2, ...', got '{s}'"))
    }
}

fn parse_rho0(s: &str) -> Result<RhoInit, String> {
    let s = s.trim();
    if let Some(v) = s.strip_prefix("scale") {
        Ok(RhoInit::Scale(parse_number(v)?))
    } else if let Some(v) = s.strip_prefix("value") {
        Ok(RhoInit::Value(parse_number(v)?))
    } else {
        Err(format!("expected 'scale <k>' or 'value <v>', got '{s}'"))
    }
}

pub fn load_scenario(path: &Path, ov: &Overrides) -> Result<Scenario, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(None, None, format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text, ov)
}
