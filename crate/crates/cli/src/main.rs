//! Command-line experiment runner for the horosphere toolkit.
//!
//! Subcommands: `verify` (named lemma suites with CSV/JSON reports and
//! an optional calibration pass), `distort` (rank-one contrast and
//! rank-two path experiments), `divergence` (flat-horosphere cycles),
//! and `fill` (fill a sphere file with a disk file).
//!
//! Exit codes: 0 all checks passed, 1 checks failed, 2 configuration or
//! calibration failure, 3 numerical failure, 4 schema violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use horolab::calibrate;
use horolab::config::RunConfig;
use horolab::error::Error;
use horolab::report::{write_atomic, SuiteReport};
use horolab::suites;

#[derive(Parser, Debug)]
#[command(
    name = "horolab",
    version,
    about = "Horosphere geometry experiments in SL(n,R)/SO(n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write CSV/JSON reports.
    Verify {
        /// Suite name: iwasawa, busemann, compare, dil, dxshadows,
        /// largeshadows, pushing, opposition, omega_infty.
        #[arg(long)]
        suite: String,
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Bootstrap-fit the comparison constants and write the
        /// lockfile consumed by subsequent runs, then exit.
        #[arg(long)]
        calibrate: bool,
    },
    /// Distortion experiments.
    Distort {
        /// Mode: rank1 (n = 2 closed-form contrast) or rank2_paths
        /// (in-horosphere path lengths).
        #[arg(long)]
        mode: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Flat-horosphere intersection cycles and antipodal route lengths.
    Divergence {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fill a sphere file with a disk file.
    Fill {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> horolab::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::parse_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    Ok(cfg)
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::InvalidConfig(_) | Error::CalibrationFailure { .. } => ExitCode::from(2),
        Error::SchemaViolation(_) => ExitCode::from(4),
        _ => ExitCode::from(3),
    }
}

fn emit(cfg: &RunConfig, report: &SuiteReport) -> horolab::Result<ExitCode> {
    let csv_path = cfg.out_dir.join(format!("{}.csv", report.suite));
    let json_path = cfg.out_dir.join(format!("{}.json", report.suite));
    write_atomic(&csv_path, report.to_csv().as_bytes())?;
    write_atomic(&json_path, report.to_json().as_bytes())?;
    let passed = report.records.iter().filter(|r| r.pass).count();
    for r in &report.records {
        println!(
            "[{}] {}: measured {} bound {}",
            if r.pass { "pass" } else { "FAIL" },
            r.check_id,
            horolab::report::fmt_float(r.measured),
            horolab::report::fmt_float(r.bound),
        );
    }
    println!(
        "{}: {}/{} checks passed in {} ms; reports in {}",
        report.suite,
        passed,
        report.records.len(),
        report.wall_ms,
        cfg.out_dir.display()
    );
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run() -> horolab::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            suite,
            config,
            calibrate: do_calibrate,
        } => {
            let mut cfg = load_config(&config)?;
            let lock_path = cfg.out_dir.join("calibration.lock.json");
            if do_calibrate {
                let constants = calibrate::calibrate(&cfg)?;
                write_atomic(&lock_path, constants.to_lockfile().as_bytes())?;
                println!("calibration written to {}", lock_path.display());
                return Ok(ExitCode::SUCCESS);
            }
            if cfg.apply_lockfile(&lock_path)? {
                println!("using calibration lockfile {}", lock_path.display());
            }
            let report = suites::run_suite(&cfg, &suite)?;
            emit(&cfg, &report)
        }
        Command::Distort { mode, config } => {
            let cfg = load_config(&config)?;
            let report = match mode.as_str() {
                "rank1" => suites::distort_rank1(&cfg)?,
                "rank2_paths" => suites::distort_rank2_paths(&cfg)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown mode `{}` (expected rank1 or rank2_paths)",
                        other
                    )))
                }
            };
            emit(&cfg, &report)
        }
        Command::Divergence { config } => {
            let cfg = load_config(&config)?;
            let report = suites::divergence_suite(&cfg)?;
            emit(&cfg, &report)
        }
        Command::Fill {
            input,
            output,
            config,
        } => {
            let cfg = load_config(&config)?;
            let report = suites::fill_from_file(&cfg, &input, &output)?;
            emit(&cfg, &report)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_for(&e)
        }
    }
}
