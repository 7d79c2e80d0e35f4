//! `lungdet`: scoring, suppression, anchor, preprocessing and fold tools.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed input or invalid
//! parameters.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lungdet", version, about = "Lung-opacity detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score predictions against ground truth (mean over IoU thresholds).
    Score(ScoreArgs),
    /// Run hard or soft NMS over a detections CSV, per image.
    Nms(NmsArgs),
    /// Emit anchors for one feature-map level as CSV.
    Anchors(AnchorArgs),
    /// Resize, equalize and augment a PGM image and its boxes.
    Preprocess(PreprocessArgs),
    /// Assign ids to k folds with a seeded shuffle.
    Folds(FoldArgs),
    /// Per-image opacity present/absent classification metrics.
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Ground-truth CSV (`patientId,x,y,width,height,Target`).
    #[arg(long)]
    pub gt: PathBuf,
    /// Predictions CSV (`patientId,PredictionString`).
    #[arg(long)]
    pub pred: PathBuf,
    /// `lo:hi:step` or a comma list.
    #[arg(long, default_value = "0.4:0.75:0.05")]
    pub thresholds: String,
    /// Count IoU equal to the threshold as a hit.
    #[arg(long)]
    pub inclusive: bool,
    /// Worker threads for per-image scoring (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Hard,
    SoftLinear,
    SoftGaussian,
}

#[derive(Debug, Args)]
pub struct NmsArgs {
    /// Detections CSV (`patientId,x,y,width,height,score,classId`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "hard")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long = "score-cut", default_value_t = 0.001)]
    pub score_cut: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnchorArgs {
    #[arg(long, default_value_t = 16.0)]
    pub base: f64,
    #[arg(long, default_value = "8,16,32")]
    pub scales: String,
    /// Height/width ratios.
    #[arg(long, default_value = "0.5,1,2")]
    pub ratios: String,
    #[arg(long, default_value_t = 16.0)]
    pub stride: f64,
    /// Feature-map size as `WxH`.
    #[arg(long, default_value = "1x1")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Input PGM (P5).
    #[arg(long)]
    pub input: PathBuf,
    /// Output PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// Resize to N x N before anything else.
    #[arg(long)]
    pub resize: Option<usize>,
    /// Apply CLAHE.
    #[arg(long)]
    pub clahe: bool,
    /// CLAHE tile grid `WxH`.
    #[arg(long, default_value = "8x8")]
    pub tiles: String,
    /// CLAHE clip limit; `inf` disables clipping.
    #[arg(long, default_value_t = 2.0)]
    pub clip: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rotate: f64,
    #[arg(long = "shift-x", default_value_t = 0.0, allow_negative_numbers = true)]
    pub shift_x: f64,
    #[arg(long = "shift-y", default_value_t = 0.0, allow_negative_numbers = true)]
    pub shift_y: f64,
    #[arg(long)]
    pub hflip: bool,
    /// Sample the augmentation from this seed instead of the explicit flags.
    #[arg(long, conflicts_with_all = ["rotate", "shift_x", "shift_y", "hflip"])]
    pub seed: Option<u64>,
    /// Largest rotation magnitude in degrees for sampled augmentation.
    #[arg(long = "max-rotate", default_value_t = 10.0)]
    pub max_rotate: f64,
    /// Largest shift magnitude in pixels for sampled augmentation.
    #[arg(long = "max-shift", default_value_t = 20.0)]
    pub max_shift: f64,
    /// Flip probability for sampled augmentation.
    #[arg(long = "flip-prob", default_value_t = 0.5)]
    pub flip_prob: f64,
    /// Ground-truth CSV whose boxes follow the image transform.
    #[arg(long, requires = "boxes_out")]
    pub boxes: Option<PathBuf>,
    #[arg(long = "boxes-out", requires = "boxes")]
    pub boxes_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    /// Text file with one id per line.
    #[arg(long, required_unless_present = "gt", conflicts_with = "gt")]
    pub ids: Option<PathBuf>,
    /// Take the distinct patient ids of a ground-truth CSV instead.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// An image is predicted positive when any detection scores at least this.
    #[arg(long, default_value_t = 0.5)]
    pub conf: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(a) => commands::score(&a),
        Command::Nms(a) => commands::nms(&a),
        Command::Anchors(a) => commands::anchors(&a),
        Command::Preprocess(a) => commands::preprocess(&a),
        Command::Folds(a) => commands::folds(&a),
        Command::Classify(a) => commands::classify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lungdet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
