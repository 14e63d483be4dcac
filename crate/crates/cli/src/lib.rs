//! Library side of the `tripweaver` binary: argument definitions and the
//! four commands (`gen-data`, `build-network`, `plan`, `eval`).

pub mod commands;
pub mod config;
pub mod eval;
pub mod geojson;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{build_network, gen_data, plan, PlanReport, VisitReport};
pub use config::PlannerConfig;

/// Process exit code and the error behind it.
#[derive(Debug)]
pub struct CliError {
    /// 1 for I/O failures, 2 for usage and domain errors.
    pub code: i32,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn io(source: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            source: source.into(),
        }
    }

    pub fn usage(source: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            source: source.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl From<tripweaver_core::Error> for CliError {
    fn from(e: tripweaver_core::Error) -> Self {
        match e {
            tripweaver_core::Error::Io(_) => Self::io(e),
            _ => Self::usage(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tripweaver", version, about = "Time-budgeted trip planning over crowd-sourced POI networks")]
pub struct Cli {
    /// JSON configuration file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic city with check-ins, vehicle traces and ground truth.
    GenData(GenDataArgs),
    /// Build network.json (and users.json) from the three CSV inputs.
    BuildNetwork(BuildArgs),
    /// Plan an itinerary for one query.
    Plan(PlanArgs),
    /// Compare the planner against exhaustive search on small seeded instances.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub venues: usize,
    #[arg(long, default_value_t = 100)]
    pub vehicles: usize,
    #[arg(long, default_value_t = 60)]
    pub trips: usize,
    #[arg(long, default_value_t = 500)]
    pub users: usize,
    #[arg(long, default_value_t = 20)]
    pub checkins_per_user: usize,
    #[arg(long, default_value_t = 30)]
    pub days: u32,
    /// Standard deviation of GPS position noise, metres.
    #[arg(long, default_value_t = 10.0)]
    pub noise_m: f64,
    #[arg(long)]
    pub rush_multiplier: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Directory holding venues.csv, checkins.csv and traces.csv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub venues_csv: Option<PathBuf>,
    #[arg(long)]
    pub checkins_csv: Option<PathBuf>,
    #[arg(long)]
    pub traces_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write user profiles; defaults to users.json next to --out.
    #[arg(long)]
    pub users_out: Option<PathBuf>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub days: Option<i64>,
    #[arg(long)]
    pub utc_offset_min: Option<i32>,
    #[arg(long)]
    pub snap_radius_m: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// User profiles; defaults to users.json next to the network.
    #[arg(long)]
    pub users: Option<PathBuf>,
    /// Plan for this user; without it every category is weighted equally.
    #[arg(long)]
    pub user: Option<String>,
    /// HH:MM
    #[arg(long)]
    pub start_time: String,
    /// HH:MM
    #[arg(long)]
    pub end_time: String,
    /// LAT,LON
    #[arg(long, allow_hyphen_values = true)]
    pub start_loc: String,
    /// LAT,LON; defaults to the start location.
    #[arg(long, allow_hyphen_values = true)]
    pub end_loc: Option<String>,
    /// Itinerary JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub geojson: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub max_wait: Option<f64>,
    #[arg(long)]
    pub candidate_limit: Option<usize>,
    #[arg(long)]
    pub local_search_rounds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Candidates per instance (lower bound when --max-candidates is set).
    #[arg(long, default_value_t = 6)]
    pub candidates: usize,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Network to draw instances from; a synthetic city is used when absent.
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = PlannerConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::GenData(args) => commands::cmd_gen_data(&args, &config),
        Command::BuildNetwork(args) => commands::cmd_build_network(&args, config),
        Command::Plan(args) => commands::cmd_plan(&args, config),
        Command::Eval(args) => eval::cmd_eval(&args, &config),
    }
}
