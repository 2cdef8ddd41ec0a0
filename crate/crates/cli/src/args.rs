use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncglab_core::anneal::ParamKind;
use ncglab_core::Model;

use crate::config::AnnealOverrides;

#[derive(Debug, Parser)]
#[command(name = "ncglab", version, about = "Truncated spectral triples, Heisenberg defects and annealing")]
pub struct Cli {
    /// TOML file with [global] and [anneal] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and store a truncated triple.
    #[command(subcommand)]
    Triple(TripleCommand),
    /// Evaluate the Heisenberg defect of a stored operator.
    #[command(subcommand)]
    Defect(DefectCommand),
    /// Search for Dirac operators by thermal annealing.
    #[command(subcommand)]
    Anneal(AnnealCommand),
    /// The exact commutant family.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Weyl and heat-trace estimates from a spectrum CSV.
    Estimate(EstimateArgs),
    /// Run an experiment pipeline and write its CSV bundle.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Binary,
}

#[derive(Debug, Subcommand)]
pub enum TripleCommand {
    Build(TripleBuildArgs),
}

#[derive(Debug, Args)]
pub struct TripleBuildArgs {
    #[arg(long)]
    pub model: Model,
    #[arg(long)]
    pub cutoff: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum DefectCommand {
    Eval(DefectEvalArgs),
}

#[derive(Debug, Args)]
pub struct DefectEvalArgs {
    /// Directory written by `triple build`.
    #[arg(long)]
    pub triple: PathBuf,
    /// Matrix file (JSON or binary) holding the operator.
    #[arg(long)]
    pub dirac: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Evaluate [[D,Y_i],Y_j] instead (sphere only, indices 1..=3).
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub first_order: Option<Vec<usize>>,
    /// Circle only: evaluate U[D,U] - 1 instead of U*[D,U] - 1.
    #[arg(long)]
    pub plain: bool,
    /// Report file; the heatmap is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnnealCommand {
    Run(AnnealRunArgs),
}

#[derive(Debug, Args)]
pub struct AnnealRunArgs {
    #[arg(long, required_unless_present = "from_manifest")]
    pub model: Option<Model>,
    #[arg(long, required_unless_present = "from_manifest")]
    pub cutoff: Option<u32>,
    /// Defaults to circle-real on the circle and block-p on the sphere.
    #[arg(long)]
    pub param: Option<ParamKind>,
    /// One chain per seed; comma separated.
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub anneal: AnnealOverrides,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rerun exactly the configuration recorded in a manifest.
    #[arg(long, conflicts_with_all = ["model", "cutoff", "param", "seed", "kappa"])]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    Family(FamilyArgs),
    OptimalC(OptimalCArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub cutoff: u32,
    /// Defaults to the optimal value for the cutoff.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimalCArgs {
    #[arg(long)]
    pub cutoff: u32,
    /// Also write optimal_c.json and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum What {
    Dimension,
    Volume,
    Heat,
    All,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with an `eigenvalue` column and optionally a `source` column.
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub what: What,
    /// Weyl fit window; defaults to (λmax/4, λmax).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub window: Option<Vec<f64>>,
    /// Nominal dimension used by the volume estimate.
    #[arg(long, default_value_t = 2.0)]
    pub dim: f64,
    /// Rows to use when the CSV holds several sources.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Circle,
    SphereAnneal,
    AnalyticVsSphere,
    Asymptotics,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Comma separated; each experiment has its own default.
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Cutoffs for the first-order table of analytic-vs-sphere.
    #[arg(long, value_delimiter = ',')]
    pub first_order_cutoffs: Vec<u32>,
    /// Sphere parametrization for sphere-anneal.
    #[arg(long)]
    pub param: Option<ParamKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    pub anneal: AnnealOverrides,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
