use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use mrac_core::sim::{Simulation, Trace};
use mrac_core::verify::verify;
use mrac_core::Error;

use crate::certificate::{human_summary, machine_block, parse_certificate};
use crate::scenario_file::{load_scenario, Overrides, ParseError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_ASSUMPTION: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn parse(path: &Path, e: ParseError) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn core(path: &Path, e: Error) -> Self {
        let code = match e {
            Error::Malformed(_) => EXIT_PARSE,
            Error::NonFinite { .. } => EXIT_DIVERGED,
            _ => EXIT_ASSUMPTION,
        };
        CliError {
            code,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

pub fn design(
    path: &Path,
    ov: &Overrides,
    out_path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<u8, CliError> {
    let sc = load_scenario(path, ov).map_err(|e| CliError::parse(path, e))?;
    let d = sc.validate().map_err(|e| CliError::core(path, e))?;
    let block = machine_block(&sc, &d);
    let text = format!("{}\n{block}", human_summary(&sc, &d));
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))?;
    if let Some(p) = out_path {
        std::fs::write(p, block).map_err(|e| CliError::io(p, e))?;
    }
    Ok(EXIT_OK)
}

pub fn verify_cmd(
    path: &Path,
    ov: &Overrides,
    certificate: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<u8, CliError> {
    let sc = load_scenario(path, ov).map_err(|e| CliError::parse(path, e))?;
    let cert = match certificate {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(parse_certificate(&text).map_err(|e| CliError::parse(p, e))?)
        }
        None => None,
    };
    if let Some(c) = &cert {
        if c.scheme != sc.scheme {
            return Err(CliError {
                code: EXIT_PARSE,
                message: format!("certificate is for {}, scenario runs {}", c.scheme, sc.scheme),
            });
        }
    }
    let report = verify(&sc, cert.as_ref());
    write!(stdout, "{report}").map_err(|e| CliError::io(path, e))?;
    if report.passed() {
        writeln!(stdout, "all checks passed").map_err(|e| CliError::io(path, e))?;
        Ok(EXIT_OK)
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        writeln!(stdout, "failed: {}", names.join("; ")).map_err(|e| CliError::io(path, e))?;
        Ok(EXIT_ASSUMPTION)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub overrides: Overrides,
    pub out: Option<PathBuf>,
    pub stride: usize,
    pub jobs: usize,
}

/// One-line summary of a finished run.
pub fn metrics_line(trace: &Trace) -> String {
    let m = trace.metrics();
    let mut s = format!(
        "scheme={} samples={} completed={} tail_rms_e={:.6e} max_abs_e={:.6e} v_violation_max={:.6e} l2_eps_over_m={:.6e} v0={:.6e} bounded={}",
        trace.scheme,
        trace.len(),
        m.completed,
        m.tail_rms_e,
        m.max_abs_e,
        m.v_violation_max,
        m.l2_integral,
        m.v0,
        m.bounded
    );
    if let Some(d) = &trace.diverged {
        s.push_str(&format!(" diverged_at={:e}", d.t));
    }
    s
}

fn run_one(path: &Path, opts: &RunOptions, csv: Option<&Path>) -> Result<(u8, String), CliError> {
    let sc = load_scenario(path, &opts.overrides).map_err(|e| CliError::parse(path, e))?;
    let sim = Simulation::new(sc).map_err(|e| CliError::core(path, e))?;
    let trace = sim.integrate();
    if let Some(p) = csv {
        let f = File::create(p).map_err(|e| CliError::io(p, e))?;
        let mut w = BufWriter::new(f);
        trace
            .write_csv(&mut w, opts.stride)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(p, e))?;
    }
    let code = if trace.completed() { EXIT_OK } else { EXIT_DIVERGED };
    Ok((code, metrics_line(&trace)))
}

/// Runs each scenario; with several files `--out` names a directory that
/// receives `<stem>.csv` per scenario. Returns the largest exit code.
pub fn run(paths: &[PathBuf], opts: &RunOptions, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let many = paths.len() > 1;
    let csv_for = |p: &Path| -> Option<PathBuf> {
        let out = opts.out.as_ref()?;
        if many {
            let stem = p.file_stem().unwrap_or_default();
            Some(out.join(stem).with_extension("csv"))
        } else {
            Some(out.clone())
        }
    };
    if many {
        if let Some(dir) = &opts.out {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }

    type Slot = Mutex<Option<Result<(u8, String), CliError>>>;
    let results: Vec<Slot> = paths.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = opts.jobs.clamp(1, paths.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = paths.get(i) else { break };
                let r = run_one(p, opts, csv_for(p).as_deref());
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });

    let mut code = EXIT_OK;
    for (p, slot) in paths.iter().zip(results) {
        match slot.into_inner().unwrap().expect("every scenario was run") {
            Ok((c, line)) => {
                code = code.max(c);
                let prefix = if many { format!("{}: ", p.display()) } else { String::new() };
                writeln!(stdout, "{prefix}{line}").map_err(|e| CliError::io(p, e))?;
            }
            Err(e) if many => {
                code = code.max(e.code);
                writeln!(stdout, "{}", e.message).map_err(|x| CliError::io(p, x))?;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(code)
}
