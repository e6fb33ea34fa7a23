// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! `oqec`: correctability checks for subsystem codes under continuous
//! dynamics.
//!
//! Exit codes: 0 when every expectation holds, 1 when one fails, 2 on
//! malformed input or a numerical error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use oqec::harness::generate::{random_scenario, InstanceKind, InstanceRequest};
use oqec::harness::report::{Report, Status};
use oqec::harness::runner::{evolve, run_path, Overrides};
use oqec::harness::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "oqec",
    version,
    about = "Correctability of subsystem codes under continuous dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of one or more scenarios and write reports.
    Check {
        /// Scenario file; repeat to run a batch in parallel.
        #[arg(long = "scenario", required = true)]
        scenarios: Vec<PathBuf>,
        /// Report file, or a directory when several scenarios are given.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-check CSV time series.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit the uncorrected state and fidelity series of a scenario as CSV.
    Evolve {
        #[arg(long)]
        scenario: PathBuf,
        /// CSV file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory to write `<name>_evolve.csv` into.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a random scenario with a known verdict.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 5)]
        d_s: usize,
        #[arg(long, default_value_t = 2)]
        d_a: usize,
        #[arg(long, default_value_t = 2)]
        d_b: usize,
        /// Kraus operators, jump operators or interaction terms.
        #[arg(long, default_value_t = 2)]
        n_ops: usize,
        #[arg(long, default_value_t = 2)]
        d_e: usize,
        /// Perturbation strength; positive values break correctability.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenario file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print a report.
    Report {
        /// Report JSON written by `check`.
        path: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    NoiselessSubsystem,
    TrackedDrift,
    GaugeCoupled,
    CorrectableChannel,
    GenericChannel,
}

impl From<Kind> for InstanceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::NoiselessSubsystem => InstanceKind::NoiselessSubsystem,
            Kind::TrackedDrift => InstanceKind::TrackedDrift,
            Kind::GaugeCoupled => InstanceKind::GaugeCoupled,
            Kind::CorrectableChannel => InstanceKind::CorrectableChannel,
            Kind::GenericChannel => InstanceKind::GenericChannel,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check {
            scenarios,
            out,
            csv,
            tol,
            seed,
        } => check(
            &scenarios,
            out.as_deref(),
            csv.as_deref(),
            Overrides { tol, seed },
        ),
        Command::Evolve {
            scenario,
            out,
            csv,
            seed,
        } => report_error(evolve_cmd(&scenario, out.as_deref(), csv.as_deref(), seed)),
        Command::Gen {
            kind,
            d_s,
            d_a,
            d_b,
            n_ops,
            d_e,
            eps,
            seed,
            out,
        } => {
            let req = InstanceRequest {
                kind: kind.into(),
                d_s,
                d_a,
                d_b,
                n_ops,
                d_e,
                eps,
                seed,
            };
            report_error(
                random_scenario(&req)
                    .map_err(|e| e.to_string())
                    .and_then(|s| write_text(out.as_deref(), &s.to_json())),
            )
        }
        Command::Report { path } => report_error(
            std::fs::read_to_string(&path)
                .map_err(|e| format!("{}: {e}", path.display()))
                .and_then(|text| Report::from_json(&text).map_err(|e| e.to_string()))
                .map(|r| print!("{}", r.render())),
        ),
    };
    ExitCode::from(code as u8)
}

fn report_error(result: Result<(), String>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            Status::Error.exit_code()
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| e.to_string())
        }
    }
}

fn check(
    scenarios: &[PathBuf],
    out: Option<&Path>,
    csv: Option<&Path>,
    overrides: Overrides,
) -> i32 {
    let batch = scenarios.len() > 1;
    let results: Vec<(PathBuf, Result<Report, String>)> = scenarios
        .par_iter()
        .map(|path| {
            let report = run_path(path, &overrides).map_err(|e| e.to_string());
            (path.clone(), report)
        })
        .collect();
    let mut status = Status::Passed;
    for (path, result) in results {
        let report = match result {
            Ok(report) => report,
            Err(e) => {
                eprintln!("error: {e}");
                status = status.combine(Status::Error);
                continue;
            }
        };
        print!("{}", report.render());
        status = status.combine(report.status);
        let target = match (out, batch) {
            (Some(dir), true) => {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    eprintln!("error: {}: {e}", dir.display());
                    status = status.combine(Status::Error);
                    continue;
                }
                Some(dir.join(report_file_name(&path)))
            }
            (Some(file), false) => Some(file.to_path_buf()),
            (None, _) => None,
        };
        if let Some(target) = target {
            if let Err(e) = std::fs::write(&target, report.to_json()) {
                eprintln!("error: {}: {e}", target.display());
                status = status.combine(Status::Error);
            }
        }
        if let Some(dir) = csv {
            if let Err(e) = report.write_csv_dir(dir) {
                eprintln!("error: {e}");
                status = status.combine(Status::Error);
            }
        }
    }
    status.exit_code()
}

fn report_file_name(scenario: &Path) -> String {
    let stem = scenario
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    format!("{stem}.report.json")
}

fn evolve_cmd(
    path: &Path,
    out: Option<&Path>,
    csv: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), String> {
    let overrides = Overrides { tol: None, seed };
    let scenario = overrides.apply(Scenario::from_path(path).map_err(|e| e.to_string())?);
    let name = scenario.name.clone();
    let loaded = scenario.load().map_err(|e| e.to_string())?;
    let series = evolve(&loaded).map_err(|e| e.to_string())?;
    let target = match (out, csv) {
        (Some(file), _) => Some(file.to_path_buf()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            Some(dir.join(format!("{name}_evolve.csv")))
        }
        (None, None) => None,
    };
    match target {
        Some(path) => series.write_csv_file(&path).map_err(|e| e.to_string()),
        None => series
            .write_csv(std::io::stdout().lock())
            .map_err(|e| e.to_string()),
    }
}
