use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use langevin_harness::{execute, Command, Config, Invocation};

#[derive(Parser)]
#[command(name = "langevin", version, about = "Unadjusted Langevin sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Resolve a step-size plan.
    Plan(Common),
    /// Run chains and write samples.
    Sample(Common),
    /// Check smoothed-potential bounds by Monte Carlo.
    SmoothCheck(Common),
    /// Build and check the convexified potentials.
    Convexify(Common),
    /// Estimate divergences of a sample file against the target.
    Diagnose(Common),
    /// Sample and diagnose end to end, or sweep step sizes.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::Plan(c) => (Command::Plan, c),
        Cmd::Sample(c) => (Command::Sample, c),
        Cmd::SmoothCheck(c) => (Command::SmoothCheck, c),
        Cmd::Convexify(c) => (Command::Convexify, c),
        Cmd::Diagnose(c) => (Command::Diagnose, c),
        Cmd::Experiment(c) => (Command::Experiment, c),
    };
    let result = Config::load(&c.config)
        .and_then(|config| execute(Invocation { command, config, seed: c.seed, out: c.out, threads: c.threads }));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
