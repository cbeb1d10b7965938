use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use wpl_cli::config::{parse_assignment, parse_pairs, Command};
use wpl_cli::run::{replay, run_and_emit};
use wpl_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "wplqng", version, about = "Noisy-qubit tomography, WPL geometry and curvature-aware VQE")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Idle-channel tomography at several depths, WPL reports and bootstrap CIs.
    Tomo(RunArgs),
    /// The three optimizers on the two-qubit instance.
    Vqe(RunArgs),
    /// Repeated tomography of a static channel with EWMA smoothing.
    Drift(RunArgs),
    /// Inverse-rule, threshold, shot-budget and isotropy ablations.
    Ablate(RunArgs),
    /// Re-run a previous command from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Infinite-shot mode.
    #[arg(long)]
    exact: bool,
    /// sec5 | prop33 | hw
    #[arg(long)]
    convention: Option<String>,
}

fn resolve(command: Command, args: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            parse_pairs(&text, &p.display().to_string())?
        }
        None => Vec::new(),
    };
    let mut flags = Vec::new();
    if let Some(s) = args.seed {
        flags.push(("seed".to_string(), s.to_string()));
    }
    if args.exact {
        flags.push(("shots".to_string(), "exact".to_string()));
    }
    if let Some(c) = &args.convention {
        flags.push(("convention".to_string(), c.clone()));
    }
    RunConfig::resolve(command, &[file, args.set.clone(), flags])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Replay { manifest, out } => replay(&manifest, &out),
        Cmd::Tomo(a) => resolve(Command::Tomo, &a).and_then(|c| run_and_emit(&c, &a.out)),
        Cmd::Vqe(a) => resolve(Command::Vqe, &a).and_then(|c| run_and_emit(&c, &a.out)),
        Cmd::Drift(a) => resolve(Command::Drift, &a).and_then(|c| run_and_emit(&c, &a.out)),
        Cmd::Ablate(a) => resolve(Command::Ablate, &a).and_then(|c| run_and_emit(&c, &a.out)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wplqng: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
