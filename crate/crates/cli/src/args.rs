//! Command-line argument definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bfseg",
    version,
    about = "Boundary-focused LA/scar segmentation toolkit"
)]
pub struct Cli {
    /// Optional TOML file with defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic cases with known ground truth.
    Synth(SynthArgs),
    /// Fit entropy-sum population statistics.
    UamFit(UamFitArgs),
    /// Threshold LA probabilities and derive the band and distance map.
    Stage1Post(Stage1Args),
    /// Bundle image and distance map for the second stage.
    Stage2Prep(Stage2Args),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Report loss values for one prediction.
    LossEval(LossEvalArgs),
    /// Resample one volume onto a new spacing.
    Resample(ResampleArgs),
}

/// Three comma-separated values, e.g. `32,32,8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple<T>(pub [T; 3]);

impl<T: FromStr + Copy> FromStr for Triple<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated values, got {s:?}"));
        }
        let mut out = [parts[0], parts[1], parts[2]].map(|p| p.parse::<T>().ok());
        match (out[0].take(), out[1].take(), out[2].take()) {
            (Some(a), Some(b), Some(c)) => Ok(Triple([a, b, c])),
            _ => Err(format!("cannot parse {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the first case; later cases use consecutive seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub outlier_cases: Option<usize>,
    #[arg(long)]
    pub dims: Option<Triple<usize>>,
    #[arg(long)]
    pub spacing: Option<Triple<f64>>,
    #[arg(long)]
    pub corruption: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct UamFitArgs {
    /// Case directory root, or a text manifest of `case_id entropy_sum` lines.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Destination of the statistics file.
    #[arg(long)]
    pub out: PathBuf,
    /// Volume read from each case directory.
    #[arg(long)]
    pub prob_name: Option<String>,
    #[arg(long)]
    pub sigma_factor: Option<f64>,
    #[arg(long)]
    pub two_sided: bool,
    /// Also write the per-case entropy sums as a manifest.
    #[arg(long)]
    pub entropies_out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmMode {
    /// Band voxels offset by 1 mm.
    Millimetre,
    /// Band voxels offset by the smallest voxel spacing.
    VoxelStep,
}

#[derive(Debug, Clone, Args)]
pub struct Stage1Args {
    /// An `la_prob` volume, or a root of case directories.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub dm_mode: Option<DmMode>,
    /// Volume read from each case directory in batch mode.
    #[arg(long)]
    pub prob_name: Option<String>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Stage2Args {
    #[arg(long, requires = "dm", conflicts_with_all = ["cases", "stage1"])]
    pub image: Option<PathBuf>,
    #[arg(long, requires = "image")]
    pub dm: Option<PathBuf>,
    /// Root of case directories holding `image` (batch mode).
    #[arg(long, requires = "stage1")]
    pub cases: Option<PathBuf>,
    /// Root of stage-1 outputs holding `dm` (batch mode).
    #[arg(long, requires = "cases")]
    pub stage1: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// z-score the image before bundling.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Root of stage-1 outputs (`<case>/la_mask`).
    #[arg(long)]
    pub pred: PathBuf,
    /// Root of case directories (`<case>/la_label`, `<case>/scar_label`).
    #[arg(long)]
    pub gt: PathBuf,
    /// Root holding `<case>/scar_mask` or `<case>/scar_prob`.
    #[arg(long)]
    pub scar_pred: Option<PathBuf>,
    /// Report the 95th-percentile Hausdorff distance instead of the maximum.
    #[arg(long)]
    pub hd95: bool,
    /// Directory for text and JSON-lines reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    Selected,
    Total,
}

#[derive(Debug, Clone, Args)]
pub struct LossEvalArgs {
    #[arg(long)]
    pub prob: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// TopK percentages.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub norm: Option<Norm>,
    /// Write the selected-voxel mask for each k here.
    #[arg(long)]
    pub focus_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ResampleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub spacing: Triple<f64>,
    /// Interpolation order for image and distance volumes (1 or 3).
    #[arg(long, default_value_t = 3)]
    pub order: u8,
}
