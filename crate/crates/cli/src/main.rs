//! Batch experiment runner: invariant check suites, propagation studies,
//! reduced-matrix convergence tables, Gibbs moments and approximant bounds,
//! all emitted as deterministic CSV.

mod checks;
mod commands;
mod config;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CmdError;

#[derive(Parser)]
#[command(name = "fockmf", version, about = "Semiclassical Fock-space experiment runner")]
struct Cli {
    /// Experiment config file (required by every subcommand except check).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output CSV path, overriding the config's `output.path`.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads for the experiment grid (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Sampling seed, overriding the config's `output.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// State tail budget, overriding the config's `state.tail_budget`.
    #[arg(long, global = true)]
    tail_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named invariant suite: ccr, wick, weyl, flow or states.
    Check { suite: String },
    /// Quantum vs classical expectations over the (eps, t) grid.
    Propagate,
    /// Trace distances of reduced density matrices to their limits.
    Bbgky,
    /// Gibbs-state moments against the limiting Gaussian measure.
    GibbsMoments,
    /// Approximant errors against the closed-form remainder bound.
    ApproxBound,
}

fn load_config(cli: &Cli) -> Result<config::ExperimentConfig, CmdError> {
    let Some(path) = &cli.config else {
        return Err(CmdError::Config("--config PATH is required".into()));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Config(format!("cannot read `{path}`: {e}")))?;
    let mut cfg = config::parse(&text).map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tb) = cli.tail_budget {
        cfg.tail_budget = tb;
        cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CmdError::Config(format!("cannot size worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Check { suite } => {
            let seed = cli.seed.unwrap_or(0);
            checks::cmd_check(suite, seed)?;
            Ok(())
        }
        Command::Propagate => {
            let cfg = load_config(cli)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            commands::cmd_propagate(&cfg, &out)
        }
        Command::Bbgky => {
            let cfg = load_config(cli)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            commands::cmd_bbgky(&cfg, &out)
        }
        Command::GibbsMoments => {
            let cfg = load_config(cli)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            commands::cmd_gibbs_moments(&cfg, &out)
        }
        Command::ApproxBound => {
            let cfg = load_config(cli)?;
            let out = cli.out.clone().unwrap_or_else(|| cfg.output.clone());
            commands::cmd_approx_bound(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
