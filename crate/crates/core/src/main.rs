use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use couette_lab::cli::{run_command, Command};

#[derive(Parser)]
#[command(name = "couette-lab", version, about = "Couette flow stability laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact linear evolution and decay report.
    Lin(Common),
    /// Nonlinear sheared-frame run with diagnostics.
    Nl(Common),
    /// Weight tables and growth audits.
    Weights(Common),
    /// Toy-model trajectories.
    Toys(Common),
    /// Sampled lemma audits; exit code 1 if any fails.
    Audit(Common),
    /// Stability scan over viscosity and amplitude.
    Scan(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.cmd {
        Cmd::Lin(c) => (Command::Lin, c),
        Cmd::Nl(c) => (Command::Nl, c),
        Cmd::Weights(c) => (Command::Weights, c),
        Cmd::Toys(c) => (Command::Toys, c),
        Cmd::Audit(c) => (Command::Audit, c),
        Cmd::Scan(c) => (Command::Scan, c),
    };
    match run_command(cmd, &common.config, common.seed, &common.out) {
        Ok(outcome) => {
            for a in &outcome.manifest.artifacts {
                println!("{}", common.out.join(a).display());
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: at least one audit failed", cmd.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
