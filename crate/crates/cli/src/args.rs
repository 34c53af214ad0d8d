use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Waveguide-invariant range and invariant estimation from single-receiver
/// spectrograms.
#[derive(Debug, Parser)]
#[command(name = "wirange", version, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise a surface from a key=value scene file.
    Simulate(SimulateArgs),
    /// Short-time Fourier transform of a raw f32 recording into a surface.
    Stft(StftArgs),
    /// Dump the striation matrix of one hypothesis as l,k,re,im,abs rows.
    TransformDebug(HypothesisArgs),
    /// Per-bin scale ratios of one hypothesis as k,f_k,rho_hat rows.
    WhitenDiag(HypothesisArgs),
    /// Log-likelihood curve over a range grid.
    EstimateRange(EstimateRangeArgs),
    /// Log-likelihood curve over an invariant grid.
    EstimateWi(EstimateWiArgs),
    /// Range estimates on sliding windows of a long surface.
    Track(TrackArgs),
    /// Broadband and tonal curves on one grid, side by side.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Broadband,
    Tonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Range,
    Wi,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output surface (WIRF).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional time_s,range_m CSV of the simulated track.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Overrides the `seed` key of the scene file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StftArgs {
    /// Raw little-endian f32 samples with a `<file>.cfg` sidecar holding `sample_rate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub fmin: f64,
    #[arg(long)]
    pub fmax: f64,
    #[arg(long, default_value_t = 5.0)]
    pub segment: f64,
    #[arg(long, default_value_t = 5.0)]
    pub zeropad: f64,
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
}

/// Where tonal lines sit and how broadband bins are guarded from them.
#[derive(Debug, Clone, Args)]
pub struct BandArgs {
    /// key=value file with `tonal_freqs`, `guard_hz`, `band_lo`, `band_hi`, `neighborhood_hz`.
    #[arg(long)]
    pub band_config: Option<PathBuf>,
    /// Tonal line frequencies (Hz); overrides the band file.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tonal_freqs: Option<Vec<f64>>,
    /// Guard half-width around tonal lines (Hz); default 0.4.
    #[arg(long)]
    pub guard: Option<f64>,
    /// Noise neighbourhood for the tonal method (Hz); default 1.0.
    #[arg(long)]
    pub neighborhood: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Range rate (m/s): one value, or one per snapshot step.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub rdot: Vec<f64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct HypothesisArgs {
    #[command(flatten)]
    pub common: SurfaceArgs,
    /// Range at the last snapshot (m).
    #[arg(long)]
    pub range: f64,
    #[arg(long)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RangeGridArgs {
    #[arg(long)]
    pub rmin: f64,
    #[arg(long)]
    pub rmax: f64,
    #[arg(long, default_value_t = 10.0)]
    pub rstep: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BetaGridArgs {
    #[arg(long, default_value_t = 0.5)]
    pub bmin: f64,
    #[arg(long, default_value_t = 1.3)]
    pub bmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub bstep: f64,
}

#[derive(Debug, Args)]
pub struct EstimateRangeArgs {
    #[command(flatten)]
    pub common: SurfaceArgs,
    #[arg(long)]
    pub beta: f64,
    #[command(flatten)]
    pub grid: RangeGridArgs,
    #[arg(long, value_enum, default_value_t = Method::Broadband)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct EstimateWiArgs {
    #[command(flatten)]
    pub common: SurfaceArgs,
    #[arg(long)]
    pub range: f64,
    #[command(flatten)]
    pub grid: BetaGridArgs,
    #[arg(long, value_enum, default_value_t = Method::Broadband)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub common: SurfaceArgs,
    #[arg(long)]
    pub beta: f64,
    /// Striations per window.
    #[arg(long, default_value_t = 212)]
    pub target_m: usize,
    /// Snapshots between window ends.
    #[arg(long)]
    pub stride: usize,
    /// Snapshot index of the first window end.
    #[arg(long)]
    pub first_end: usize,
    /// Ground truth CSV; with --span-frac the grid follows it.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Grid of truth * (1 +- span) per window; requires --truth.
    #[arg(long)]
    pub span_frac: Option<f64>,
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub rstep: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: SurfaceArgs,
    #[arg(long, value_enum)]
    pub sweep: SweepArg,
    /// Fixed invariant for a range sweep.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fixed range for an invariant sweep.
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub rstep: f64,
    #[command(flatten)]
    pub beta_grid: BetaGridArgs,
}
