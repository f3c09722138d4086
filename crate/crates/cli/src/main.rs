//! `qlm`: run verification suites and experiments on surfaces in the
//! spatial Schwarzschild manifold.
//!
//! Exit status: 0 when every criterion passes, 1 when a criterion fails or a
//! computation errors, 2 for configuration errors.

mod config;
mod error;
mod experiments;
mod presets;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;
use experiments::Kind;

#[derive(Debug, Parser)]
#[command(name = "qlm", version, about = "Quasi-local mass verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; see the README for the schema.
    #[arg(long, global = true, env = "QLM_CONFIG")]
    config: Option<PathBuf>,

    /// Report path; the step log goes next to it with extension `jsonl`.
    #[arg(long, global = true, env = "QLM_OUT")]
    out: Option<PathBuf>,

    #[arg(long, global = true, env = "QLM_SEED")]
    seed: Option<u64>,

    #[arg(long, global = true, env = "QLM_BANDLIMIT")]
    bandlimit: Option<usize>,

    #[arg(long, global = true, env = "QLM_MASS")]
    mass: Option<f64>,

    /// `round <r0>`, `perturbed <r0> <amp> Y<l><m>` or `file <path>`.
    #[arg(long, global = true, env = "QLM_SURFACE")]
    surface: Option<String>,

    /// `rotated`, `same` or a surface spec.
    #[arg(long, global = true, env = "QLM_REFERENCE")]
    reference: Option<String>,

    /// `one`, `zero`, `random` or `random-positive`.
    #[arg(long, global = true, env = "QLM_SPEED")]
    speed: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Ambient and surface identity residuals at two resolutions.
    Identities,
    /// Finite-difference mass derivative against its first-variation formula.
    Lemma2,
    /// Isometric continuation family with a JSON-lines step log.
    Continuation,
    /// Sign of the mass along a continuation family.
    Penrose,
}

impl From<Command> for Kind {
    fn from(c: Command) -> Self {
        match c {
            Command::Identities => Kind::Identities,
            Command::Lemma2 => Kind::Lemma2,
            Command::Continuation => Kind::Continuation,
            Command::Penrose => Kind::Penrose,
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let kind = Kind::from(cli.command);
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    config.apply(Overrides {
        mass: cli.mass,
        bandlimit: cli.bandlimit,
        seed: cli.seed,
        surface: cli.surface,
        reference: cli.reference,
        speed: cli.speed,
        out: cli.out,
    });
    config.validate()?;
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("qlm-{}.json", kind.name())));
    let outcome = experiments::run(kind, &config)?;
    for c in &outcome.criteria {
        let mark = if c.pass { "PASS" } else { "FAIL" };
        println!("[{mark}] {}: {:.3e} ({} {:.1e})", c.name, c.value, c.comparison, c.tolerance);
        if let Some(note) = &c.note {
            println!("       {note}");
        }
    }
    let log = report::write(&out, &outcome)?;
    println!("report: {}", out.display());
    if let Some(log) = log {
        println!("log: {}", log.display());
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qlm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
