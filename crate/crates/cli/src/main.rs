//! `magspec`: config-driven runs of the spectral toolkit.
//!
//! Exit codes: 0 success, 1 a verify criterion failed, 2 config error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::{Summary, JSON_SCHEMA_VERSION};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "magspec",
    version,
    about = "Spectral toolkit for degenerate magnetic fields"
)]
struct Cli {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long, global = true, env = "MAGSPEC_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true, env = "MAGSPEC_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (overrides `workers`).
    #[arg(long, global = true, env = "MAGSPEC_WORKERS")]
    workers: Option<usize>,
    /// Run only the quick verify subset (overrides `verify.quick`).
    #[arg(long, global = true, env = "MAGSPEC_QUICK")]
    quick: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Trace eigenvalue branches over an eta grid.
    Branch,
    /// Fit the power law of lambda_l at large eta.
    FitKappa,
    /// Fit the exponential decay of the even-nu ground branch.
    FitDecay,
    /// Locate zero crossings and their local order.
    Zeros,
    /// Exact second-order coefficients and derivative coefficients.
    Perturb,
    /// Fiber-integral density.
    Ids,
    /// Magnetic Weyl term.
    Weyl,
    /// Correction term on matched windows.
    Corr,
    /// Remainder sweep against the 2D oracle.
    Sweep,
    /// Eigenvalue count of the 2D box operator.
    Oracle2d,
    /// Acceptance suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Branch => "branch",
            Command::FitKappa => "fit-kappa",
            Command::FitDecay => "fit-decay",
            Command::Zeros => "zeros",
            Command::Perturb => "perturb",
            Command::Ids => "ids",
            Command::Weyl => "weyl",
            Command::Corr => "corr",
            Command::Sweep => "sweep",
            Command::Oracle2d => "oracle2d",
            Command::Verify => "verify",
        }
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if cli.quick {
        cfg.verify.quick = true;
    }
    cfg.check()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let workers = cfg
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let name = cli.command.name();
    let hash = cfg.hash();
    let t = Instant::now();
    let outcome = pool.install(|| commands::run(name, &cfg));
    let elapsed = t.elapsed().as_secs_f64();
    let body = match outcome.table.render(&hash) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let summary = Summary {
        schema_version: JSON_SCHEMA_VERSION,
        csv_schema_version: output::CSV_SCHEMA_VERSION,
        subcommand: name.to_string(),
        config_hash: hash,
        version: magspec_core::ARTIFACT_VERSION.to_string(),
        rows: outcome.table.rows.len(),
        csv: format!("{name}.csv"),
        elapsed_seconds: elapsed,
        errors: outcome.errors.clone(),
        details: outcome.details,
    };
    match output::write(&cfg.out, name, &body, &summary) {
        Ok(a) => eprintln!("wrote {} and {}", a.csv.display(), a.json.display()),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    for e in &outcome.errors {
        eprintln!("numerical failure in {}: {}", e.task, e.error);
    }
    if !outcome.errors.is_empty() {
        ExitCode::from(EXIT_NUMERICAL)
    } else if outcome.failed {
        ExitCode::from(EXIT_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}
