//! Experiment runner for dissipative transport on quasiperiodic chains.
//!
//! One config file describes one experiment; subcommands pick the
//! experiment kind and must agree with the config. Exit codes: 0 success,
//! 1 validation failure, 2 runtime failure, 3 partial sweep failure.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind};
use run::RunError;

/// Thread-cap environment variable, consulted when `--threads` is absent.
const THREADS_ENV: &str = "AAH_HEOM_THREADS";

#[derive(Parser)]
#[command(name = "aah-heom", version, about = "HEOM transport experiments on AAH chains")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Sweep-level worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Relative integrator tolerance; overrides `integrator.rtol`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// HEOM time evolution with transport observables.
    Dynamics,
    /// Dominant generator eigenvalues, clusters, and gap.
    Spectrum,
    /// Rescaled-time transport curves across a sweep.
    Collapse,
    /// HEOM vs Lindblad and Bloch-Redfield fidelity.
    Compare,
    /// Incoherent-hopping rate equation.
    Semiclassical,
    /// IPR-filtered system-size list.
    FilterSizes,
    /// Dry-run report of problem sizes; no simulation.
    Verify,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        match self {
            Command::Dynamics => Some(ExperimentKind::Dynamics),
            Command::Spectrum => Some(ExperimentKind::Spectrum),
            Command::Collapse => Some(ExperimentKind::Collapse),
            Command::Compare => Some(ExperimentKind::CompareMarkovian),
            Command::Semiclassical => Some(ExperimentKind::Semiclassical),
            Command::FilterSizes => Some(ExperimentKind::FilterSizes),
            Command::Verify => None,
        }
    }
}

fn fail_validation(errors: &[String]) -> ExitCode {
    eprintln!("configuration invalid:");
    for e in errors {
        eprintln!("  {e}");
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli.threads.or_else(|| {
        std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }

    let Some(path) = cli.config.as_deref() else {
        eprintln!("--config is required");
        return ExitCode::from(1);
    };
    let mut config = match ExperimentConfig::from_path(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(rtol) = cli.tolerance {
        config.integrator.rtol = rtol;
    }
    if let Some(dir) = cli.out {
        config.output.dir = dir;
    }

    if let Some(kind) = cli.command.kind() {
        if config.experiment != kind {
            return fail_validation(&[format!(
                "experiment: config declares {} but the {kind} subcommand was invoked",
                config.experiment
            )]);
        }
    } else {
        // verify: dry-run report
        return match run::verify(&config) {
            Ok(report) => {
                println!("{report}");
                ExitCode::SUCCESS
            }
            Err(RunError::Validation(errors)) => fail_validation(&errors),
            Err(RunError::Runtime(e)) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        };
    }

    let out = config.output.dir.clone();
    match run::run(&config, &out) {
        Ok(summary) => {
            println!(
                "{}: {} point(s), {} failed; outputs in {}",
                config.experiment,
                summary.total_points,
                summary.failed_points,
                out.display()
            );
            if summary.failed_points > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Validation(errors)) => fail_validation(&errors),
        Err(RunError::Runtime(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
