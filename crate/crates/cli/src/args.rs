use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmlecon::ValueRange;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "cmlecon",
    version,
    about = "Coupled exponential-map wealth simulator"
)]
pub struct Cli {
    /// TOML file supplying default values for any flag. Flags win over the file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the lattice measurement protocol at one (a, r) point.
    Simulate(SimulateArgs),
    /// Run the protocol over an (a, r) grid and write a phase table.
    Sweep(SweepArgs),
    /// Scan the uniform map over a range of growth capacities.
    Bifurcate(BifurcateArgs),
    /// Run a stochastic exchange baseline.
    Exchange(ExchangeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolArgs {
    /// System size.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub transient: Option<u64>,
    #[arg(long)]
    pub measure_iters: Option<u64>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Take scalar statistics only from the snapshot at the end of the transient.
    #[arg(long)]
    pub snapshot_only: bool,
    #[arg(long)]
    pub init_lo: Option<f64>,
    #[arg(long)]
    pub init_hi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Pressure; defaults to 0.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Number of histogram bins.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Pressure values as lo:hi:step.
    #[arg(long)]
    pub a_range: Option<ValueRange>,
    /// Growth capacities as lo:hi:step.
    #[arg(long)]
    pub r_range: Option<ValueRange>,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BifurcateArgs {
    /// Pressure; defaults to 0.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub r_range: Option<ValueRange>,
    #[arg(long)]
    pub transient: Option<u64>,
    #[arg(long)]
    pub kept: Option<usize>,
    /// Starting value; defaults to half the fixed point (0.5 when r <= 1).
    #[arg(long)]
    pub x_init: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExchangeModel {
    Dy,
    Angle,
    AngleHet,
}

#[derive(Debug, Clone, Args)]
pub struct ExchangeArgs {
    #[arg(long, value_enum)]
    pub model: Option<ExchangeModel>,
    /// Exchange parameter; required for the angle model.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub transactions: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
