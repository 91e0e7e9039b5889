mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{ConfigFile, Overrides};

/// Chebyshev collocation solver for feedback Nash equilibria of the
/// J-region pollution game.
#[derive(Debug, Parser)]
#[command(name = "chebgame", version)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the equilibrium; writes policy.csv, value.csv, convergence.csv, run.json.
    Solve(Common),
    /// Simulate the equilibrium path from p0 using a solved policy.csv; writes timepath.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Policy file (default: <out>/policy.csv).
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Policy error against the exact 2-player reference for several degrees; writes error.csv.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        np_list: Vec<usize>,
    },
    /// Time the solve for every block count; writes blocks.csv.
    BenchBlocks {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// example1 | example3 | example4 | custom
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// State-space degree, one value or one per player.
    #[arg(long, value_delimiter = ',')]
    np: Option<Vec<usize>>,
    /// Control-space degree, one value or one per player.
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<usize>>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Upper bound of the state box.
    #[arg(long)]
    pm: Option<f64>,
    /// Upper bound of the control box.
    #[arg(long)]
    um: Option<f64>,
    /// auto, sweep, or block counts separated by commas.
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Simulated time span.
    #[arg(long)]
    sim_horizon: Option<f64>,
    /// Initial state, one value or one per player.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p0: Option<Vec<f64>>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl Common {
    fn resolve(self) -> anyhow::Result<config::RunConfig> {
        let file = self.config.as_deref().map(ConfigFile::load).transpose()?;
        let flags = Overrides {
            preset: self.preset,
            out: self.out,
            np: self.np,
            nu: self.nu,
            h: self.h,
            tol: self.tol,
            rho: self.rho,
            p_max: self.pm,
            u_max: self.um,
            blocks: self.blocks,
            threads: self.threads,
            sim_horizon: self.sim_horizon,
            p0: self.p0,
            max_iters: self.max_iters,
        };
        config::resolve(file, flags)
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve(common) => commands::solve(&common.resolve().map_err(Failure::Usage)?),
        Command::Simulate { common, policy } => {
            commands::simulate_cmd(&common.resolve().map_err(Failure::Usage)?, policy.as_deref())
        }
        Command::Compare { common, np_list } => commands::compare(&common.resolve().map_err(Failure::Usage)?, &np_list),
        Command::BenchBlocks { common, reps } => {
            commands::bench_blocks(&common.resolve().map_err(Failure::Usage)?, reps)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("not converged: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
