//! `ctruelle`: configuration-driven experiments for jump-process thermodynamics.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 I/O, parse or invalid
//! input, 3 numerical failure (non-convergence, truncation, sampling).

mod commands;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use commands::Command;
use config::Loaded;
use run::RunDir;

#[derive(Parser)]
#[command(name = "ctruelle", version, about = "Thermodynamic formalism for Markov jump processes on [0, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file. Without it the defaults are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Root of the run directories (default: the config's `output`, then `runs`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `grid.n`.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use ctruelle::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::NonConvergence { .. }
                | E::Truncation { .. }
                | E::SpectralAnomaly { .. }
                | E::Singular
                | E::Sampling { .. } => 3,
                _ => 2,
            };
        }
    }
    2
}

fn run(cli: &Cli) -> Result<u8> {
    let mut loaded = match &cli.config {
        Some(path) => Loaded::from_file(path)?,
        None => Loaded::defaults(),
    };
    if let Some(seed) = cli.seed {
        loaded.config.mc.seed = seed;
    }
    if let Some(n) = cli.grid {
        loaded.config.grid.n = n;
    }
    loaded.check()?;
    let hash = loaded.hash()?;
    let root = match (&cli.out, &loaded.config.output) {
        (Some(out), _) => out.clone(),
        (None, Some(out)) => loaded.resolve(out),
        (None, None) => PathBuf::from("runs"),
    };
    let mut dir = RunDir::create(&root, &hash)?;
    dir.write_json("config.json", &loaded.config)?;
    let name = cli.command.name();
    match commands::dispatch(cli.command, &loaded, &mut dir) {
        Ok(outcome) => {
            let location = dir.path().display().to_string();
            dir.finish(name, outcome.exit, outcome.status)?;
            println!("{name}: {} (exit {}), outputs in {location}", outcome.status, outcome.exit);
            Ok(outcome.exit)
        }
        Err(e) => {
            // the manifest records the failure; the original error is what gets reported
            let _ = dir.finish(name, exit_code(&e), "error");
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
