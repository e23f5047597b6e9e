//! Command-line front end. Every flag can also come from a `key = value`
//! config file (section named after the subcommand); explicit flags win.
//! Artifact-producing commands drop a manifest next to their outputs with
//! the resolved parameters, seeds, library version, and wall time, so any
//! output can be reproduced exactly.

mod commands;
pub mod config;

pub use config::{parse_range, parse_simplex, FileConfig};

use crate::error::{ErrorCategory, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable consulted for the default output directory.
pub const OUTPUT_DIR_VAR: &str = "EVOGRAPH_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "evograph",
    version,
    about = "Evolutionary dynamics of multiplayer games on regular graphs",
    long_about = "Pair-approximation replicator dynamics and agent-based Monte Carlo \
                  for n-strategy games with k co-players on degree-k regular graphs. \
                  Subcommands write CSV/JSON/SVG artifacts plus a manifest for replay."
)]
pub struct Cli {
    /// Config file with key = value lines and [subcommand] sections.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for output artifacts (default: $EVOGRAPH_OUTPUT_DIR or '.').
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    /// Cap on worker threads for sweeps and replicas (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print dx/dt at one simplex point.
    Rhs(RhsArgs),
    /// Integrate the dynamics and write the trajectory (CSV + SVG).
    Integrate(IntegrateArgs),
    /// Locate and classify all equilibria (CSV).
    Equilibria(EquilibriaArgs),
    /// Critical fines beta0, beta_eq, beta_star and their alpha dependence.
    Thresholds(ThresholdsArgs),
    /// Classify phases over an (alpha, beta) grid (CSV + SVG heatmap).
    Phase(PhaseArgs),
    /// Run the agent-based Monte Carlo simulator (CSV + JSON summary).
    Simulate(SimulateArgs),
    /// Simulate, then compare measured edges against the pair closure.
    Validate(ValidateArgs),
    /// Inspect the built-in games.
    Games {
        #[command(subcommand)]
        action: GamesCommand,
    },
    /// Payoff-table utilities.
    Payoff {
        #[command(subcommand)]
        action: PayoffCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum GamesCommand {
    /// List the built-in games with strategies and parameters.
    List,
}

#[derive(Subcommand, Debug)]
pub enum PayoffCommand {
    /// Write the full a_{i|k} table over every co-player configuration.
    Export(PayoffExportArgs),
}

/// Game selection shared by most subcommands. Either a built-in game with
/// its parameters or an external payoff definition file.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Built-in game: pgg, peer, or pool.
    #[arg(long)]
    pub game: Option<String>,

    /// Payoff definition file; replaces --game and the game parameters.
    #[arg(long, value_name = "FILE")]
    pub payoff_file: Option<PathBuf>,

    /// Co-players per game, which is also the graph degree.
    #[arg(long)]
    pub k: Option<u32>,

    /// Pot multiplication factor r.
    #[arg(long)]
    pub r: Option<f64>,

    /// Contribution cost c.
    #[arg(long)]
    pub c: Option<f64>,

    /// Punishment cost alpha (default 0).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Fine beta (default 0).
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct RhsArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Update rule: pc, db, or wellmixed (default pc).
    #[arg(long)]
    pub rule: Option<String>,

    /// Rhs assembly: auto, general, or linear (default auto).
    #[arg(long)]
    pub path: Option<String>,

    /// Selection strength delta (default 1).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Strategy frequencies, comma-separated.
    #[arg(long)]
    pub x: Option<String>,

    /// Output format: text or json (default text).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Update rule: pc, db, or wellmixed (default pc).
    #[arg(long)]
    pub rule: Option<String>,

    /// Selection strength delta (default 1).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Start frequencies, comma-separated.
    #[arg(long)]
    pub x: Option<String>,

    /// Integration horizon (default 400).
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Error tolerance (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Trajectory CSV basename (default trajectory.csv).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct EquilibriaArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Update rule: pc, db, or wellmixed (default pc).
    #[arg(long)]
    pub rule: Option<String>,

    /// Selection strength delta (default 1).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Equilibria CSV basename (default equilibria.csv).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdsArgs {
    /// Punishment mechanism: peer or pool.
    #[arg(long)]
    pub game: Option<String>,

    /// Co-players per game.
    #[arg(long)]
    pub k: Option<u32>,

    /// Pot multiplication factor r.
    #[arg(long)]
    pub r: Option<f64>,

    /// Contribution cost c.
    #[arg(long)]
    pub c: Option<f64>,

    /// Also evaluate the thresholds at this punishment cost.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Report JSON basename (default thresholds.json).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PhaseArgs {
    /// Punishment mechanism: peer or pool.
    #[arg(long)]
    pub game: Option<String>,

    /// Co-players per game.
    #[arg(long)]
    pub k: Option<u32>,

    /// Pot multiplication factor r.
    #[arg(long)]
    pub r: Option<f64>,

    /// Contribution cost c.
    #[arg(long)]
    pub c: Option<f64>,

    /// Punishment-cost sweep, lo:hi:step or a single value.
    #[arg(long)]
    pub alpha: Option<String>,

    /// Fine sweep, lo:hi:step or a single value.
    #[arg(long)]
    pub beta: Option<String>,

    /// Population structure: structured or wellmixed (default structured).
    #[arg(long)]
    pub population: Option<String>,

    /// Re-derive boundary cells from trajectories and report disagreements.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub cross_validate: Option<bool>,

    /// Selection strength for cross-validation runs (default 1).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Horizon for cross-validation runs (default 400).
    #[arg(long)]
    pub t_max: Option<f64>,

    /// Tolerance for cross-validation runs (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Grid CSV basename (default phase.csv).
    #[arg(long)]
    pub out: Option<String>,

    /// Heatmap SVG basename (default phase.svg).
    #[arg(long)]
    pub plot: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Update rule: pc or db (default pc).
    #[arg(long)]
    pub rule: Option<String>,

    /// Number of nodes.
    #[arg(long = "N", visible_alias = "nodes")]
    pub nodes: Option<usize>,

    /// Selection strength delta (default 0, neutral drift).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Initial frequencies, comma-separated (default uniform).
    #[arg(long)]
    pub x: Option<String>,

    /// Monte Carlo sweeps of N elementary updates each (default 200).
    #[arg(long)]
    pub sweeps: Option<u32>,

    /// Sweeps between measurements (default 1).
    #[arg(long)]
    pub measure_every: Option<u32>,

    /// Independent replicas (default 20).
    #[arg(long)]
    pub replicas: Option<u32>,

    /// Master RNG seed (default 1).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Base seed for graph construction (default 1).
    #[arg(long)]
    pub graph_seed: Option<u64>,

    /// Series CSV basename (default simulation.csv).
    #[arg(long)]
    pub out: Option<String>,

    /// Ensemble summary JSON basename (default simulation_summary.json).
    #[arg(long)]
    pub summary: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub simulate: SimulateArgs,

    /// Sweeps discarded before comparing against the closure (default 20).
    #[arg(long)]
    pub burn_in: Option<u32>,

    /// Closure report JSON basename (default closure_report.json).
    #[arg(long)]
    pub report: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PayoffExportArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Table CSV basename (default payoff_matrix.csv).
    #[arg(long)]
    pub out: Option<String>,
}

/// Parses argv, runs the selected command, and returns the process exit
/// code: 0 success, 2 validation, 3 numerical failure, 4 I/O.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err.category() {
                ErrorCategory::Validation => 2,
                ErrorCategory::Numerical => 3,
                ErrorCategory::Io => 4,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let global = file.section("");
    let output_dir = match cli.output_dir {
        Some(dir) => dir,
        None => match global.get::<PathBuf>("output_dir")? {
            Some(dir) => dir,
            None => std::env::var_os(OUTPUT_DIR_VAR)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".")),
        },
    };
    let jobs = match cli.jobs {
        Some(jobs) => Some(jobs),
        None => global.get::<usize>("jobs")?,
    };
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(crate::error::EvoError::InvalidArgument(
                "--jobs must be at least 1".into(),
            ));
        }
        // A second initialization in the same process is harmless: the
        // first pool keeps serving and determinism does not depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    match cli.command {
        Command::Rhs(args) => commands::cmd_rhs(args, file.section("rhs")),
        Command::Integrate(args) => {
            commands::cmd_integrate(args, file.section("integrate"), &output_dir)
        }
        Command::Equilibria(args) => {
            commands::cmd_equilibria(args, file.section("equilibria"), &output_dir)
        }
        Command::Thresholds(args) => {
            commands::cmd_thresholds(args, file.section("thresholds"), &output_dir)
        }
        Command::Phase(args) => commands::cmd_phase(args, file.section("phase"), &output_dir),
        Command::Simulate(args) => {
            commands::cmd_simulate(args, file.section("simulate"), &output_dir)
        }
        Command::Validate(args) => {
            commands::cmd_validate(args, file.section("validate"), &output_dir)
        }
        Command::Games {
            action: GamesCommand::List,
        } => commands::cmd_games_list(),
        Command::Payoff {
            action: PayoffCommand::Export(args),
        } => commands::cmd_payoff_export(args, file.section("payoff"), &output_dir),
    }
}
