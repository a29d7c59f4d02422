use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wncs::report::{cmd_contour, cmd_cost, cmd_optimize, cmd_region, cmd_simulate, Sweep};
use wncs::{Result, Scenario, Scheme};

#[derive(Parser)]
#[command(name = "wncs", version, about = "Stability regions, cost bounds and simulation for a wireless control loop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    horizon_blocks: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Stability mask over the (n, R) grid.
    Region {
        #[command(flatten)]
        common: Common,
        /// ideal, practical-sufficient or practical-necessary.
        #[arg(long, default_value = "ideal")]
        scheme: Scheme,
    },
    /// Cost bounds along n or R.
    Cost {
        #[command(flatten)]
        common: Common,
        /// n or R.
        #[arg(long, default_value = "n")]
        sweep: Sweep,
        /// Add Monte Carlo estimates.
        #[arg(long)]
        simulate: bool,
    },
    /// Upper-bound surface over the grid.
    Contour {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo run at the scenario's simulation point.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Grid minimum of the upper bound.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<Scenario> {
    let mut s = Scenario::load(&common.scenario)?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(trials) = common.trials {
        s.sim.trials = trials;
    }
    if let Some(h) = common.horizon_blocks {
        s.sim.horizon_blocks = h;
    }
    s.check()?;
    Ok(s)
}

fn run(cli: Cli) -> Result<String> {
    Ok(match cli.command {
        Command::Region { common, scheme } => {
            let r = cmd_region(&load(&common)?, scheme, &common.out)?;
            format!(
                "{} stable cells, bounded: {}",
                r.stable_cells, r.boundedness.bounded
            )
        }
        Command::Cost {
            common,
            sweep,
            simulate,
        } => {
            let rows = cmd_cost(&load(&common)?, sweep, simulate, &common.out)?;
            format!("{} points", rows.len())
        }
        Command::Contour { common } => {
            let r = cmd_contour(&load(&common)?, &common.out)?;
            format!("minimum at n = {}, R = {}: {:e}", r.n_star, r.r_star, r.cost_star)
        }
        Command::Simulate { common } => {
            let r = cmd_simulate(&load(&common)?, &common.out)?;
            format!(
                "mean cost {:e} +/- {:e}",
                r.result.mean_cost_downsampled, r.result.ci95_halfwidth
            )
        }
        Command::Optimize { common } => {
            let r = cmd_optimize(&load(&common)?, &common.out)?;
            format!("n* = {}, R* = {}, cost {:e}", r.n_star, r.r_star, r.cost_star)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("WNCS_THREADS").ok().and_then(|v| v.parse().ok()) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
