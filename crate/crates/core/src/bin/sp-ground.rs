use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sp_ground::cli::{exit_code_for, parse_config_for, run, Experiment, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "sp-ground", version, about = "Radial ground states of Schrodinger-Poisson systems")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy on the constraint manifold.
    Solve(Common),
    /// Compare bubble upper bounds with the compactness threshold.
    CertifyCritical(Common),
    /// Run the pure critical diagnostic and the Pohozaev certificate.
    Nonexistence(Common),
    /// Fit the epsilon scaling laws of cut-off bubbles.
    Bubbles(Common),
    /// Levels of V + delta and the gap to the constant potential at infinity.
    Continuation(Common),
    /// Self-consistency checks on the configured problem.
    Check(Common),
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (experiment, common) = match args.command {
        Command::Solve(c) => (Experiment::Solve, c),
        Command::CertifyCritical(c) => (Experiment::CertifyCritical, c),
        Command::Nonexistence(c) => (Experiment::Nonexistence, c),
        Command::Bubbles(c) => (Experiment::Bubbles, c),
        Command::Continuation(c) => (Experiment::Continuation, c),
        Command::Check(c) => (Experiment::Check, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    }
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.config.display());
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let result = parse_config_for(&text, Some(experiment)).and_then(|mut config| {
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        run(&config, &common.out)
    });
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.result["result"]).unwrap_or_default());
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
