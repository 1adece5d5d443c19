use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use arcflow::flow::DEFAULT_N_MAX;
use arcflow::spaces::grid::{DEFAULT_DX, DEFAULT_HALF_WIDTH};

#[derive(Parser, Debug)]
#[command(name = "arcflow", version, about = "Arc fields on metric spaces")]
pub struct Cli {
    /// Print the resolved arguments as a config file instead of running.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize, Debug)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Order of the gap between two arc fields at a point.
    #[command(args_override_self = true)]
    Tangency(TangencyArgs),
    /// Euler-curve solution through a point.
    #[command(args_override_self = true)]
    Euler(EulerArgs),
    /// Values of a bracket along a time grid, or the L2 bracket table.
    #[command(args_override_self = true)]
    Bracket(BracketArgs),
    /// Sampled regularity constants of a field.
    #[command(args_override_self = true)]
    Diagnose(DiagnoseArgs),
    /// Sampled commutation gap of two flows.
    #[command(args_override_self = true)]
    Commute(CommuteArgs),
    /// Tangency of a combination field to the surface swept by two flows.
    #[command(args_override_self = true)]
    Surface(SurfaceArgs),
    /// Whether the bracket of two flows stays in their span.
    #[command(args_override_self = true)]
    Involutive(InvolutiveArgs),
    /// Distance of a solution to a closed set against the exponential bound.
    #[command(args_override_self = true)]
    Nagumo(NagumoArgs),
    /// Steer the zero function of L2 towards a target.
    #[command(name = "l2-reach", args_override_self = true)]
    L2Reach(ReachArgs),
    /// Expansion coefficients and orthogonality of the Hermite basis.
    #[command(args_override_self = true)]
    Hermite(HermiteArgs),
    /// Sampled check of the metric axioms.
    #[command(name = "metric-check", args_override_self = true)]
    MetricCheck(MetricCheckArgs),
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct SpaceArgs {
    /// `rN`, `l2` or `hausdorff`.
    #[arg(long, default_value = "r2")]
    pub space: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct GridArgs {
    /// Half-width L of the L2 grid [-L, L].
    #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
    pub grid_half_width: f64,
    #[arg(long, default_value_t = DEFAULT_DX)]
    pub grid_dx: f64,
}

/// Dyadic grid `2^-k_min .. 2^-k_max`.
#[derive(Args, Serialize, Debug, Clone)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 4)]
    pub k_min: i32,
    #[arg(long, default_value_t = 12)]
    pub k_max: i32,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct OutputArgs {
    /// Also write the main table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Exit with status 2 unless the verdict matches.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct SamplerArgs {
    /// Center of the sampled ball; the space's origin when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Largest time magnitude.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize, Debug)]
pub struct TangencyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct EulerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub field: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Fixed step count; adaptive doubling when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct BracketArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Run the table of bracket relations between X, Y, V, W on the L2 grid.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub table: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    /// e1, e2, close, transverse or speed.
    #[arg(long)]
    pub estimator: String,
    #[arg(long)]
    pub field: String,
    /// Second field, for close and transverse.
    #[arg(long)]
    pub other: Option<String>,
    /// Radii for the speed fit, comma separated.
    #[arg(long, default_value = "0.5,1,2,4")]
    pub radii: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct CommuteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    /// Euler steps for flows without a closed form.
    #[arg(long, default_value_t = 256)]
    pub flow_steps: usize,
    /// Gaps up to `floor (1 + |center|)` count as commuting.
    #[arg(long, default_value_t = 1e-10)]
    pub floor: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct SurfaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Field tested against the surface.
    #[arg(long)]
    pub combo: String,
    /// Parameters run over [-half, half] for both flows.
    #[arg(long, default_value_t = 1.0)]
    pub param_half: f64,
    #[arg(long, default_value_t = 0.0625)]
    pub param_step: f64,
    /// Base points as `s,t` pairs separated by `|`.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub bases: String,
    #[arg(long, default_value_t = 256)]
    pub flow_steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct InvolutiveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub g: String,
    /// Base points separated by `|`.
    #[arg(long, allow_hyphen_values = true)]
    pub bases: Option<String>,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub coeff_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    pub coeff_hi: f64,
    #[arg(long, default_value_t = 0.25)]
    pub coeff_step: f64,
    #[arg(long, default_value_t = 256)]
    pub flow_steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct NagumoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// circle or x-axis.
    #[arg(long, default_value = "circle")]
    pub set: String,
    #[arg(long, default_value_t = 10_000)]
    pub set_samples: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value = "0.25,0.5,1")]
    pub times: String,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 1 << 17)]
    pub n_max: usize,
    /// Allowed excess over the bound.
    #[arg(long, default_value_t = 1e-2)]
    pub slack: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct ReachArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// chi01 (closed-form coefficients), or any L2 point syntax for quadrature.
    #[arg(long, default_value = "chi01")]
    pub target: String,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Euler step counts, comma separated.
    #[arg(long, default_value = "16,64,256")]
    pub steps: String,
    #[arg(long)]
    pub target_csv: Option<PathBuf>,
    #[arg(long)]
    pub output_csv: Option<PathBuf>,
    #[arg(long)]
    pub oracle_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct HermiteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Serialize, Debug)]
pub struct MetricCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1000)]
    pub triples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}
