use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "hdlda",
    version,
    about = "Finite-sample and high-dimensional theory of the linear discriminant function"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed of every random stream.
    #[arg(long, global = true, env = "HDLDA_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit the timestamp from output headers.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Two,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
}

#[derive(Debug, Args)]
pub struct DeltaGrid {
    #[arg(long, default_value_t = 0.0)]
    pub delta_min: f64,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub delta_step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error rates of the optimal and the plug-in rule over a Δ grid, the
    /// latter by Monte Carlo.
    ErrorRate {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        grid: DeltaGrid,
        #[arg(long = "B", default_value_t = 100_000)]
        b: usize,
    },
    /// Large-dimensional approximation of the plug-in error rate at a given c.
    ErrorRateAsymptotic {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// `λn₁`; the second group gets `b₂ = b₁/(b₁−1)`.
        #[arg(long, default_value_t = 2.0)]
        b1: f64,
        /// Dimension used for the `p^−γ` scaling.
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        grid: DeltaGrid,
    },
    /// Density of the standardized coefficient `1ᵀâ` for a random population.
    CoefDist {
        #[command(flatten)]
        dims: DimsArgs,
        /// 0 draws the sparse population, positive values the dense one.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long = "B", default_value_t = 100_000)]
        b: usize,
    },
    /// Test of equality (two-sided) or ordering (one-sided) of two
    /// discriminant coefficients.
    Test {
        #[arg(long)]
        data1: PathBuf,
        #[arg(long)]
        data2: PathBuf,
        /// 1-based index of the first coefficient.
        #[arg(long)]
        i: usize,
        /// 1-based index of the second coefficient.
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Side::Two)]
        side: Side,
    },
    /// Assigns new observations with the plug-in rule.
    Classify {
        #[arg(long)]
        data1: PathBuf,
        #[arg(long)]
        data2: PathBuf,
        /// Observations to classify, one per column.
        #[arg(long)]
        x: PathBuf,
    },
    /// Density of the plug-in score of a new observation.
    DhatDist {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        group: u8,
        #[arg(long = "B", default_value_t = 100_000)]
        b: usize,
    },
    /// Recomputes a figure preset.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Overrides the preset's replication count.
        #[arg(long = "B")]
        b: Option<usize>,
    },
}
