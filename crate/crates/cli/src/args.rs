use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kmest",
    version,
    about = "Kaplan-Meier estimation by product limit and by EM, with log-scale confidence intervals, simultaneous bands and coverage studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a survival curve to a `time,event` CSV file.
    Fit(FitArgs),
    /// Monte Carlo quantile of sup |Brownian bridge| over [a, b].
    BandConstant(BandConstantArgs),
    /// Coverage and interval length over simulated replications.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Em,
    ProductLimit,
    /// Fit both ways and fail (exit 3) if they disagree beyond 1e-8.
    Both,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Em => "em",
            Self::ProductLimit => "product-limit",
            Self::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo paths for the band constant.
    #[arg(long, default_value_t = 200_000)]
    pub paths: usize,
    /// Grid points on [0, 1] for each simulated bridge.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with a `time,event` header; extra columns are ignored.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::ProductLimit)]
    pub method: Method,
    /// 1 − confidence level for intervals and band.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// EM stops once successive iterates differ by less than this (sup norm).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Add a simultaneous confidence band (implied by --band-from/--band-to).
    #[arg(long)]
    pub band: bool,
    /// Band start; defaults to the first event time.
    #[arg(long)]
    pub band_from: Option<f64>,
    /// Band end; defaults to the last time with finite variance.
    #[arg(long)]
    pub band_to: Option<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Testing hook: perturb the EM curve by this amount at its middle knot.
    #[arg(long, hide = true)]
    pub inject_em_fault: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BandConstantArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    /// Built-in study: 1 (exponential) or 2 (Weibull).
    #[arg(
        long,
        value_parser = clap::value_parser!(u8).range(1..=2),
        conflicts_with = "config",
        required_unless_present = "config"
    )]
    pub example: Option<u8>,
    /// TOML file with the study configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed (built-in studies default to 1).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Band Monte Carlo paths per replication.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Band Monte Carlo grid per replication.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Skip band coverage.
    #[arg(long)]
    pub no_band: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}
