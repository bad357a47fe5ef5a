use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qgeo",
    version,
    about = "Quantum geometry, parallel transport and adiabatic perturbation theory"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Only log errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Log as JSON lines on stderr.
    #[arg(long, global = true)]
    pub json_logs: bool,
    /// Output format; defaults to the extension of --out, else JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shorthand for --format csv.
    #[arg(long, global = true, conflicts_with = "format")]
    pub csv: bool,
    /// Seed of randomized checks.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Degeneracy threshold relative to the energy scale.
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,
    /// Base step of finite differences of H without an analytic gradient.
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// Integrator tolerance (transport and propagation).
    #[arg(long, global = true)]
    pub tol_ode: Option<f64>,
    /// Largest admissible condition number of the QGT.
    #[arg(long, global = true)]
    pub cond_max: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// QGT, metric, Berry curvature, Christoffel symbols and identity residuals at given points.
    Geometry(GeometryArgs),
    /// Parallel transport of a tangent ket along a path.
    Transport(TransportArgs),
    /// Holonomy and Berry phase of a closed loop.
    Holonomy(HolonomyArgs),
    /// Adiabatic perturbation theory along a driven path.
    Apt(AptArgs),
    /// Convergence order of the APT state against exact propagation.
    Convergence(ConvergenceArgs),
    /// Run the identity and convergence suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model configuration (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Tracked level (0 = ground state).
    #[arg(long, default_value_t = 0)]
    pub level: usize,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Points, one per CSV row (a non-numeric header row is skipped).
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Path file (JSON).
    #[arg(long)]
    pub path: PathBuf,
    /// Initial components `[[re, im], ...]` (JSON).
    #[arg(long)]
    pub ket: PathBuf,
    /// Number of trajectory samples, including both ends.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HolonomyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Closed path file (JSON).
    #[arg(long = "loop")]
    pub loop_: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Recurrence,
    Closed,
}

#[derive(Debug, Args)]
pub struct AptArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub path: PathBuf,
    /// Expansion order.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Total time.
    #[arg(long = "T", default_value_t = 50.0)]
    pub total_time: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Sample path parameters `start:end:step` or a comma list, within [0, 1].
    #[arg(long, default_value = "0:1:0.01")]
    pub times: String,
    /// Closed forms (order <= 3) or the general recurrence.
    #[arg(long, value_enum, default_value_t = RouteArg::Recurrence)]
    pub route: RouteArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub path: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Total times, comma separated.
    #[arg(long = "T", default_value = "25,50,100,200")]
    pub total_times: String,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Sample path parameters at which errors are measured.
    #[arg(long, default_value = "0.25:1:0.25")]
    pub times: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Model configuration; defaults to the built-in three-state model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Path for the driven checks; defaults to a smooth ramp.
    #[arg(long)]
    pub path: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Random points per identity check.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
