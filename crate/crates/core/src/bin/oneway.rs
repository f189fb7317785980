//! Command-line driver: run experiment configs, verify module invariant
//! suites, inspect artifact files.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use oneway_core::cli::{
    inspect_file, run_config, verify_suite, CliError, ExperimentConfig, RunOptions, Suite,
};

#[derive(Parser)]
#[command(name = "oneway", version, about = "one-way protocol conversion toolkit")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a pipeline described by a config file and write the report.
    Run {
        /// TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output path for the JSON report (a CSV summary lands next to it).
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: ONEWAY_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a module's invariant suite with fixed seeds.
    Verify {
        /// qcore | pgm | shadows | oneshot | convert | all
        suite: String,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Pretty-print a task, protocol, shadow, or report file.
    Inspect { path: PathBuf },
}

fn configure_threads(flag: Option<usize>) {
    let from_env = std::env::var("ONEWAY_THREADS").ok().and_then(|v| v.parse().ok());
    if let Some(n) = flag.or(from_env) {
        // Ignore the error when a pool already exists (tests, repeat calls).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<bool, CliError> {
    let args = Args::parse();
    match args.command {
        Command::Run { config, out, seed, threads } => {
            configure_threads(threads);
            let text = std::fs::read_to_string(&config).map_err(|source| CliError::Io {
                path: config.display().to_string(),
                source,
            })?;
            let parsed = ExperimentConfig::from_toml(&text)?;
            let started = Instant::now();
            let report = run_config(&parsed, RunOptions { seed_override: seed })?;
            let json = report.to_json()?;
            std::fs::write(&out, &json).map_err(|source| CliError::Io {
                path: out.display().to_string(),
                source,
            })?;
            let csv_path = out.with_extension("csv");
            std::fs::write(&csv_path, report.to_csv()).map_err(|source| CliError::Io {
                path: csv_path.display().to_string(),
                source,
            })?;
            // Timing is informational only; the report file stays
            // byte-stable for a fixed (config, seed, version).
            eprintln!(
                "wrote {} and {} in {:.1}s ({})",
                out.display(),
                csv_path.display(),
                started.elapsed().as_secs_f64(),
                if report.pass { "pass" } else { "FAIL" }
            );
            Ok(report.pass)
        }
        Command::Verify { suite, threads } => {
            configure_threads(threads);
            let rows = verify_suite(suite.parse()?)?;
            let mut pass = true;
            println!("{:<58} {:>12} {:>12} {:>9} verdict", "check", "measured", "bound", "tol");
            for row in &rows {
                pass &= row.pass;
                println!(
                    "{:<58} {:>12.3e} {:>12.3e} {:>9.1e} {}",
                    row.name,
                    row.measured,
                    row.bound,
                    row.tolerance,
                    if row.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(pass)
        }
        Command::Inspect { path } => {
            print!("{}", inspect_file(&path.display().to_string())?);
            Ok(true)
        }
    }
}
