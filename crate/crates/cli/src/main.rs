use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fmgt_cli::commands::{self, Globals};
use fmgt_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "fmgt", version, about = "Solvers and verification studies for time-fractional MGT acoustic models")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write trajectory, energy and summary files.
    Run,
    /// Print the model catalog.
    ListModels,
    /// Property table of the relaxation kernel.
    Kernels,
    /// Difference norms against the α = 1 solution over an α sweep.
    LimitStudy,
    /// Refinement study against a manufactured solution.
    Convergence,
}

fn need(cfg: Option<RunConfig>) -> Result<RunConfig, CliError> {
    cfg.ok_or_else(|| CliError::Config("this subcommand needs --config PATH".into()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let g = Globals { out: cli.out, seed: cli.seed };
    let cfg = cli.config.as_deref().map(RunConfig::load).transpose()?;
    let dir = match cli.command {
        Command::ListModels => {
            print!("{}", commands::list_models());
            return Ok(());
        }
        Command::Run => commands::run(&need(cfg)?, &g)?,
        Command::Kernels => commands::kernels(cfg.as_ref(), &g)?,
        Command::LimitStudy => commands::limit(&need(cfg)?, &g)?,
        Command::Convergence => commands::convergence(&need(cfg)?, &g)?,
    };
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fmgt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
