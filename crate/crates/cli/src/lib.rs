//! Command-line front end: closed-form analysis, simulation runs, parameter
//! sweeps, the collision grid, path-loss fitting and the SSID codec.
//!
//! Every command is deterministic given its config and seed. Exit codes are 0
//! on success, 2 for config or input errors and 3 for data-integrity errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Axis, ExperimentConfig, Kind, Overrides};
pub use error::CliError;
pub use output::{Format, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "uavbeacon", version, about = "Wi-Fi beacon position broadcast: model, simulator and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form time shares, collision and success probabilities.
    Analyze(AnalyzeArgs),
    /// Run one simulation and write receptions, summary and histograms.
    Simulate(RunArgs),
    /// One simulation per value of a swept parameter.
    Sweep(SweepArgs),
    /// Analytic and simulated collision probability over drone count and P_B.
    Grid(GridArgs),
    /// Fit the path-loss exponent to a `distance_m,rssi_dbm` CSV.
    FitPathloss(FitArgs),
    /// Encode a position report to an SSID or decode one.
    #[command(subcommand)]
    Codec(CodecCommand),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML experiment config.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $UAVBEACON_OUT, else ./uavbeacon-out].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Horizon as mean state transitions per node.
    #[arg(long, conflicts_with = "duration_ms")]
    pub transitions: Option<u64>,
    /// Horizon as simulated time.
    #[arg(long)]
    pub duration_ms: Option<f64>,
    /// Format of tabular outputs; summaries are always JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            nodes: self.nodes,
            transitions: self.transitions,
            duration_ms: self.duration_ms,
            format: self.format,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Drone counts to evaluate, comma separated.
    #[arg(short, long, value_delimiter = ',')]
    pub k: Vec<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Swept values, comma separated; defaults depend on the axis.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Vec<f64>,
    /// Independent runs pooled per point.
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Points run concurrently [default: available parallelism].
    #[arg(short, long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub p_b: Vec<f64>,
    /// Simulated transitions per grid point.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(short, long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Flight log with header `distance_m,rssi_dbm`.
    pub csv: PathBuf,
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Transmit power, dBm [default: config or 19.5].
    #[arg(long, allow_negative_numbers = true)]
    pub p_t: Option<f64>,
    /// Path-loss constant, dB [default: config or 3.55].
    #[arg(long, allow_negative_numbers = true)]
    pub k_loss: Option<f64>,
    /// Reference distance, m [default: config or 0.0147].
    #[arg(long)]
    pub d0: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CodecCommand {
    /// Read a JSON report (argument or stdin) and print its SSID. Missing
    /// fields are zero.
    Encode { json: Option<String> },
    /// Print the JSON report carried by a 32-character SSID.
    Decode { ssid: String },
}

/// Runs a parsed command line. Output goes to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a, stdout),
        Command::Simulate(a) => commands::simulate(&a, stdout),
        Command::Sweep(a) => commands::sweep(&a, stdout),
        Command::Grid(a) => commands::grid(&a, stdout),
        Command::FitPathloss(a) => commands::fit_pathloss(&a, stdout),
        Command::Codec(c) => commands::codec(&c, stdout),
    }
}
