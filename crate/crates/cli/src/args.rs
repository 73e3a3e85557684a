use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "renyi-lab", version, about = "Rényi entropy-rate maximization at desk scale")]
pub struct Cli {
    /// JSON run manifest standing in for the subcommand and its flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for every stochastic step (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rényi (or Shannon, at α = 1) entropy of a grid density.
    Entropy(EntropyArgs),
    /// Maximum-entropy density under a cost budget, or the h*(Γ) curve.
    Maxent(MaxentArgs),
    /// Bounded approximation of a density, or a plain cap at M.
    Truncate(TruncateArgs),
    /// Typical-set block laws.
    #[command(subcommand)]
    Typical(TypicalCommand),
    /// Mixture entropy bounds.
    #[command(subcommand)]
    Mixture(MixtureCommand),
    /// Window entropy bounds of the stationarized block process.
    Stationarize(StationarizeArgs),
    /// Centered, white process with variance σ² and a target Rényi rate.
    Construct(ConstructArgs),
    /// Autocovariance-constrained AR processes.
    #[command(subcommand)]
    Burg(BurgCommand),
    /// Run the verification suite.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Grid density JSON, or {"parametric": …, "grid": …}.
    #[arg(long)]
    pub density: PathBuf,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct MaxentArgs {
    /// Cost spec JSON.
    #[arg(long)]
    pub cost: PathBuf,
    /// Budgets for the h*(Γ) curve; without them the maximizer at the
    /// cost file's own Γ is reported.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TruncateArgs {
    #[arg(long)]
    pub density: PathBuf,
    /// Cost function: quadratic, linear, abs, inline JSON or a JSON file.
    #[arg(long)]
    pub cost: Option<String>,
    /// Budget Γ (needed for the bounded approximation).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Slack δ (needed for the bounded approximation).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Treat ∫f|r| above this as infinite and restrict the domain first.
    #[arg(long)]
    pub abs_cost_cap: Option<f64>,
    /// Cap the density at M and renormalize, nothing else.
    #[arg(long = "m")]
    pub m: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum TypicalCommand {
    /// Uniform law on the typical intersection.
    Build(TypicalBuildArgs),
    /// Monte Carlo mass of the typical intersection under f^n.
    Mass(TypicalMassArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Auto,
    Enumerate,
    Rejection,
}

#[derive(Debug, Args)]
pub struct TypicalBuildArgs {
    /// Typical spec JSON {f, n, eps, cost}.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: Mode,
    /// Largest number of types enumerated.
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TypicalMassArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum MixtureCommand {
    /// Lower bound, exact entropy and upper bound of a mixture.
    Bounds(MixtureArgs),
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    /// Mixture spec JSON {components, weights}.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct StationarizeArgs {
    /// Block JSON tagged by "kind": law, two_set_uniform or typical.
    #[arg(long)]
    pub block: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Window lengths: a list (7,8,9) or an inclusive range (7..24).
    #[arg(long = "m")]
    pub m: String,
    /// Also enumerate the exact window entropy when the law is small.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub sigma2: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Target rate M (α < 1).
    #[arg(long, conflicts_with = "eps_tilde")]
    pub target_rate: Option<f64>,
    /// Target gap ε̃ below the Gaussian rate (α > 1).
    #[arg(long)]
    pub eps_tilde: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Samples for the moment check (0 skips it).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 3)]
    pub lags: usize,
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

#[derive(Debug, Subcommand)]
pub enum BurgCommand {
    /// AR model from autocovariances by Levinson-Durbin.
    Fit(BurgFitArgs),
    /// Simulate an AR ensemble and check the autocovariance constraints.
    Simulate(BurgSimulateArgs),
    /// Rényi-rate sandwich of the spectral construction.
    Sandwich(BurgSandwichArgs),
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Autocovariances α_0,…,α_p.
    #[arg(long, value_delimiter = ',', required_unless_present = "model", conflicts_with = "model")]
    pub alphas: Vec<f64>,
    /// AR model JSON as written by `burg fit`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BurgFitArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnovationKind {
    Gauss,
    Block,
}

#[derive(Debug, Args)]
pub struct BurgSimulateArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, value_enum, default_value = "gauss")]
    pub innovations: InnovationKind,
    /// Rényi order of the block innovations.
    #[arg(long, default_value_t = 2.0)]
    pub block_alpha: f64,
    /// ε̃ (block α > 1) or M (block α < 1) of the block innovations.
    #[arg(long)]
    pub block_target: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 50)]
    pub horizon: usize,
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

#[derive(Debug, Args)]
pub struct BurgSandwichArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub n: usize,
    /// h_α of n innovations; defaults to n Gaussian letters of variance σ².
    #[arg(long)]
    pub hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "desk")]
    pub suite: String,
}
