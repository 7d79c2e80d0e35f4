use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lungdet_core::anchors::generate_anchors;
use lungdet_core::formats::{self, pgm, DetectionRecord, GtRecord, ScoreReport};
use lungdet_core::metrics::{confusion_metrics, image_score, kfold_split};
use lungdet_core::preprocess::{augment, augment_box, clahe, resize, scale_boxes};
use lungdet_core::{
    AnchorSpec, AugmentSpec, BBox, ClaheParams, ConfusionCounts, Detection, HitRule, NmsMode,
    Suppression, ThresholdSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::{AnchorArgs, ClassifyArgs, FoldArgs, ModeArg, NmsArgs, PreprocessArgs, ScoreArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Input {
        context: String,
        source: lungdet_core::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Input { .. } | CliError::Usage(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T>;
}

impl<T> Context<T> for lungdet_core::Result<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T> {
        self.map_err(|source| CliError::Input {
            context: what.to_string(),
            source,
        })
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn parse_list(text: &str, name: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{name}: `{}` is not a number", s.trim())))
        })
        .collect()
}

fn parse_dims(text: &str, name: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("--{name}: expected WxH, got `{text}`"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        w.trim().parse().map_err(|_| bad())?,
        h.trim().parse().map_err(|_| bad())?,
    ))
}

/// One image: id, ground-truth boxes, predictions.
type Image = (String, Vec<BBox>, Vec<Detection>);

/// Ground truth and predictions joined per image: ground-truth order first,
/// then images that only appear in the predictions.
fn load_images(gt: &Path, pred: &Path) -> Result<Vec<Image>> {
    let gt_text = read_text(gt)?;
    let pred_text = read_text(pred)?;
    let gt_records = formats::read_ground_truth(&gt_text).context(gt.display())?;
    let pred_records = formats::read_predictions(&pred_text).context(pred.display())?;

    let mut preds: std::collections::HashMap<String, Vec<Detection>> =
        formats::group_predictions(&pred_records)
            .into_iter()
            .collect();
    let mut images: Vec<Image> = formats::group_ground_truth(&gt_records)
        .into_iter()
        .map(|(id, boxes)| {
            let p = preds.remove(&id).unwrap_or_default();
            (id, boxes, p)
        })
        .collect();
    for (id, _) in formats::group_predictions(&pred_records) {
        if let Some(p) = preds.remove(&id) {
            images.push((id, Vec::new(), p));
        }
    }
    Ok(images)
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    let thresholds = ThresholdSet::parse(&args.thresholds).context("--thresholds")?;
    let rule = if args.inclusive {
        HitRule::AtLeast
    } else {
        HitRule::GreaterThan
    };
    let images = load_images(&args.gt, &args.pred)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("--workers: {e}")))?;
    // collect() on an indexed parallel iterator keeps input order
    let scores: Vec<_> = pool.install(|| {
        images
            .par_iter()
            .map(|(_, gt, preds)| image_score(preds, gt, &thresholds, rule))
            .collect()
    });

    let report = ScoreReport::from_scores(
        &thresholds,
        images.into_iter().map(|(id, _, _)| id).zip(scores),
    );
    let json = formats::write_report(&report);
    match &args.out {
        Some(path) => {
            emit(Some(path), json.as_bytes())?;
            println!("{:.6}", report.dataset_map);
            Ok(())
        }
        None => emit(None, json.as_bytes()),
    }
}

pub fn nms(args: &NmsArgs) -> Result<()> {
    let suppression = match args.mode {
        ModeArg::Hard => Suppression::Hard { iou: args.iou },
        ModeArg::SoftLinear => Suppression::SoftLinear { iou: args.iou },
        ModeArg::SoftGaussian => Suppression::SoftGaussian { sigma: args.sigma },
    };
    let mode = NmsMode::new(suppression, args.score_cut).context("nms parameters")?;
    let text = read_text(&args.input)?;
    let records = formats::read_detections(&text).context(args.input.display())?;

    let mut kept = Vec::new();
    for (id, dets) in formats::group_detections(&records) {
        for detection in lungdet_core::nms::nms(&dets, &mode) {
            kept.push(DetectionRecord {
                patient_id: id.clone(),
                detection,
            });
        }
    }
    emit(
        args.out.as_deref(),
        formats::write_detections(&kept).as_bytes(),
    )
}

pub fn anchors(args: &AnchorArgs) -> Result<()> {
    let spec = AnchorSpec::new(
        args.base,
        parse_list(&args.scales, "scales")?,
        parse_list(&args.ratios, "ratios")?,
        args.stride,
    )
    .context("anchor spec")?;
    let (gw, gh) = parse_dims(&args.grid, "grid")?;
    let mut out = String::from("index,x_min,y_min,x_max,y_max\n");
    for (i, a) in generate_anchors(&spec, gw, gh).iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            a.x_min(),
            a.y_min(),
            a.x_max(),
            a.y_max()
        ));
    }
    emit(args.out.as_deref(), out.as_bytes())
}

fn sample_augment(args: &PreprocessArgs, seed: u64) -> Result<AugmentSpec> {
    if !(args.max_rotate >= 0.0 && args.max_shift >= 0.0) {
        return Err(CliError::Usage(
            "--max-rotate and --max-shift must be non-negative".into(),
        ));
    }
    if !(0.0..=1.0).contains(&args.flip_prob) {
        return Err(CliError::Usage("--flip-prob must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |m: f64| if m > 0.0 { rng.gen_range(-m..=m) } else { 0.0 };
    let rotation_deg = uniform(args.max_rotate);
    let shift_x = uniform(args.max_shift);
    let shift_y = uniform(args.max_shift);
    Ok(AugmentSpec {
        rotation_deg,
        shift_x,
        shift_y,
        hflip: rng.gen_bool(args.flip_prob),
    })
}

pub fn preprocess(args: &PreprocessArgs) -> Result<()> {
    let mut img = pgm::read_pgm(&read_bytes(&args.input)?).context(args.input.display())?;
    let mut records: Vec<GtRecord> = match &args.boxes {
        Some(path) => formats::read_ground_truth(&read_text(path)?).context(path.display())?,
        None => Vec::new(),
    };

    if let Some(n) = args.resize {
        let (sx, sy) = (
            n as f64 / img.width() as f64,
            n as f64 / img.height() as f64,
        );
        img = resize(&img, n, n).context("--resize")?;
        for r in records.iter_mut() {
            if let Some(b) = r.bbox {
                r.bbox = Some(scale_boxes(&[b], sx, sy).context("--resize")?[0]);
            }
        }
    }
    if args.clahe {
        let (tiles_x, tiles_y) = parse_dims(&args.tiles, "tiles")?;
        let params = ClaheParams {
            tiles_x,
            tiles_y,
            clip_limit: args.clip,
        };
        img = clahe(&img, &params).context("--clahe")?;
    }

    let spec = match args.seed {
        Some(seed) => sample_augment(args, seed)?,
        None => AugmentSpec {
            rotation_deg: args.rotate,
            shift_x: args.shift_x,
            shift_y: args.shift_y,
            hflip: args.hflip,
        },
    };
    if spec != AugmentSpec::default() {
        let (out, _) = augment(&img, &[], &spec).context("augment")?;
        for r in records.iter_mut() {
            if let Some(b) = r.bbox {
                r.bbox = augment_box(img.width(), img.height(), &b, &spec).context("augment")?;
                r.target = r.bbox.is_some();
            }
        }
        img = out;
    }

    emit(Some(&args.out), &pgm::write_pgm(&img))?;
    if let Some(path) = &args.boxes_out {
        emit(Some(path), formats::write_ground_truth(&records).as_bytes())?;
    }
    Ok(())
}

pub fn folds(args: &FoldArgs) -> Result<()> {
    let ids: Vec<String> = match (&args.ids, &args.gt) {
        (Some(path), _) => read_text(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect(),
        (None, Some(path)) => {
            let recs = formats::read_ground_truth(&read_text(path)?).context(path.display())?;
            formats::group_ground_truth(&recs)
                .into_iter()
                .map(|(id, _)| id)
                .collect()
        }
        (None, None) => return Err(CliError::Usage("one of --ids or --gt is required".into())),
    };
    let assignment = kfold_split(&ids, args.k, args.seed).context("folds")?;
    let mut out = String::from("patientId,fold\n");
    for (id, f) in assignment.entries() {
        out.push_str(&format!("{id},{f}\n"));
    }
    emit(args.out.as_deref(), out.as_bytes())
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.conf) {
        return Err(CliError::Usage("--conf must be in [0, 1]".into()));
    }
    let images = load_images(&args.gt, &args.pred)?;
    let counts = ConfusionCounts::from_labels(
        images
            .iter()
            .map(|(_, gt, preds)| (!gt.is_empty(), preds.iter().any(|d| d.score() >= args.conf))),
    );
    let metrics = confusion_metrics(&counts);
    emit(
        args.out.as_deref(),
        formats::write_classification(&counts, &metrics).as_bytes(),
    )
}
