use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mrac_cli::commands::{self, RunOptions};
use mrac_cli::scenario_file::Overrides;
use mrac_core::Scheme;

#[derive(Parser)]
#[command(name = "mrac", version, about = "Adaptive output tracking: design, simulate and verify scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and print the nominal parameters
    Design {
        scenario: PathBuf,
        /// Also write the machine-readable block to this file
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Simulate the closed loop and write a CSV trace
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// CSV file, or a directory when several scenarios are given
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep every N-th sample in the CSV
        #[arg(long, default_value_t = 10)]
        stride: usize,
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Scenarios simulated in parallel
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check assumptions and design residuals
    Verify {
        scenario: PathBuf,
        /// Check this design certificate instead of the freshly computed design
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_PARSE } else { 0 });
        }
    };
    let mut stdout = io::stdout().lock();
    let result = match cli.command {
        Command::Design {
            scenario,
            out,
            scheme,
        } => {
            let ov = Overrides {
                scheme,
                ..Default::default()
            };
            commands::design(&scenario, &ov, out.as_deref(), &mut stdout)
        }
        Command::Run {
            scenarios,
            out,
            stride,
            scheme,
            dt,
            horizon,
            jobs,
        } => {
            let opts = RunOptions {
                overrides: Overrides {
                    scheme,
                    dt,
                    horizon,
                },
                out,
                stride,
                jobs,
            };
            commands::run(&scenarios, &opts, &mut stdout)
        }
        Command::Verify {
            scenario,
            design,
            scheme,
        } => {
            let ov = Overrides {
                scheme,
                ..Default::default()
            };
            commands::verify_cmd(&scenario, &ov, design.as_deref(), &mut stdout)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
