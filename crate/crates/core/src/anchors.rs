//! Anchor generation, IoU-based anchor labelling, box regression coding and
//! RPN-style proposal selection.
//!
//! Feature pyramids are handled by calling [`generate_anchors`] once per
//! level with that level's stride and scales.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::nms::{self, Detection, NmsMode, Suppression};

/// Recipe for the `k = scales.len() * ratios.len()` reference boxes placed
/// at every feature-map cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSpec {
    base_size: f64,
    scales: Vec<f64>,
    /// Height over width.
    ratios: Vec<f64>,
    stride: f64,
}

fn positive_finite(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl AnchorSpec {
    pub fn new(base_size: f64, scales: Vec<f64>, ratios: Vec<f64>, stride: f64) -> Result<Self> {
        if !positive_finite(base_size) {
            return Err(Error::param("base_size", "must be positive"));
        }
        if !positive_finite(stride) {
            return Err(Error::param("stride", "must be positive"));
        }
        if scales.is_empty() || !scales.iter().copied().all(positive_finite) {
            return Err(Error::param("scales", "must be non-empty and positive"));
        }
        if ratios.is_empty() || !ratios.iter().copied().all(positive_finite) {
            return Err(Error::param("ratios", "must be non-empty and positive"));
        }
        Ok(Self {
            base_size,
            scales,
            ratios,
            stride,
        })
    }

    pub fn base_size(&self) -> f64 {
        self.base_size
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    /// Anchors per cell.
    pub fn per_cell(&self) -> usize {
        self.scales.len() * self.ratios.len()
    }
}

impl Default for AnchorSpec {
    fn default() -> Self {
        Self {
            base_size: 16.0,
            scales: vec![8.0, 16.0, 32.0],
            ratios: vec![0.5, 1.0, 2.0],
            stride: 16.0,
        }
    }
}

/// Tiles anchors over a `grid_w x grid_h` feature map.
///
/// Cells are visited row-major; within a cell anchors are ordered by ratio,
/// then scale. Each anchor is centred on `((i + 0.5) * stride, (j + 0.5) *
/// stride)` and has area `(base_size * scale)^2`.
pub fn generate_anchors(spec: &AnchorSpec, grid_w: usize, grid_h: usize) -> Vec<BBox> {
    // shapes are shared by every cell
    let shapes: Vec<(f64, f64)> = spec
        .ratios
        .iter()
        .flat_map(|&ratio| {
            spec.scales.iter().map(move |&scale| {
                let side = spec.base_size * scale;
                let w = side / ratio.sqrt();
                (w, w * ratio)
            })
        })
        .collect();

    let mut anchors = Vec::with_capacity(grid_w * grid_h * shapes.len());
    for j in 0..grid_h {
        let cy = (j as f64 + 0.5) * spec.stride;
        for i in 0..grid_w {
            let cx = (i as f64 + 0.5) * spec.stride;
            for &(w, h) in &shapes {
                anchors.push(
                    BBox::from_center(cx, cy, w, h).expect("anchor shape is positive and finite"),
                );
            }
        }
    }
    anchors
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorLabel {
    /// Matched to the ground-truth box at this index.
    Positive(usize),
    Negative,
    Ignore,
}

pub const DEFAULT_POS_IOU: f64 = 0.7;
pub const DEFAULT_NEG_IOU: f64 = 0.3;

/// Assigns objectness labels to anchors.
///
/// An anchor is positive when its best IoU reaches `pos_iou`, or when it is
/// the best anchor for some ground-truth box it overlaps (lowest anchor index
/// on ties). Remaining anchors below `neg_iou` are negative, the rest are
/// ignored. Positive labels carry the anchor's best-matching ground truth
/// (lowest index on ties).
pub fn label_anchors(
    anchors: &[BBox],
    gt: &[BBox],
    pos_iou: f64,
    neg_iou: f64,
) -> Result<Vec<AnchorLabel>> {
    if !(0.0..=1.0).contains(&neg_iou) || !(0.0..=1.0).contains(&pos_iou) || neg_iou > pos_iou {
        return Err(Error::param(
            "pos_iou/neg_iou",
            format!("need 0 <= neg ({neg_iou}) <= pos ({pos_iou}) <= 1"),
        ));
    }
    if gt.is_empty() {
        return Ok(vec![AnchorLabel::Negative; anchors.len()]);
    }

    // best gt per anchor, and best anchor per gt
    let mut anchor_best: Vec<(usize, f64)> = vec![(0, f64::NEG_INFINITY); anchors.len()];
    let mut gt_best: Vec<(usize, f64)> = vec![(0, 0.0); gt.len()];
    for (a, anchor) in anchors.iter().enumerate() {
        for (g, truth) in gt.iter().enumerate() {
            let v = anchor.iou(truth);
            if v > anchor_best[a].1 {
                anchor_best[a] = (g, v);
            }
            if v > gt_best[g].1 {
                gt_best[g] = (a, v);
            }
        }
    }

    let mut labels: Vec<AnchorLabel> = anchor_best
        .iter()
        .map(|&(g, v)| {
            if v >= pos_iou {
                AnchorLabel::Positive(g)
            } else if v < neg_iou {
                AnchorLabel::Negative
            } else {
                AnchorLabel::Ignore
            }
        })
        .collect();

    for &(a, v) in &gt_best {
        if v > 0.0 {
            labels[a] = AnchorLabel::Positive(anchor_best[a].0);
        }
    }
    Ok(labels)
}

/// Box regression target relative to an anchor: centre offsets in units of
/// anchor size and log-scale size ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionTarget {
    pub tx: f64,
    pub ty: f64,
    pub tw: f64,
    pub th: f64,
}

fn check_anchor(anchor: &BBox) -> Result<()> {
    if anchor.width() > 0.0 && anchor.height() > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateAnchor)
    }
}

pub fn encode_box(anchor: &BBox, gt: &BBox) -> Result<RegressionTarget> {
    check_anchor(anchor)?;
    if !(gt.width() > 0.0 && gt.height() > 0.0) {
        return Err(Error::param(
            "gt",
            "target box needs positive width and height",
        ));
    }
    let (ax, ay) = anchor.center();
    let (gx, gy) = gt.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    Ok(RegressionTarget {
        tx: (gx - ax) / aw,
        ty: (gy - ay) / ah,
        tw: (gt.width() / aw).ln(),
        th: (gt.height() / ah).ln(),
    })
}

pub fn decode_box(anchor: &BBox, t: &RegressionTarget) -> Result<BBox> {
    check_anchor(anchor)?;
    let (ax, ay) = anchor.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    let cx = ax + t.tx * aw;
    let cy = ay + t.ty * ah;
    let w = aw * t.tw.exp();
    let h = ah * t.th.exp();
    BBox::from_center(cx, cy, w, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalParams {
    pub pre_top_n: usize,
    pub post_top_n: usize,
    pub nms_iou: f64,
    pub min_size: f64,
}

impl Default for ProposalParams {
    fn default() -> Self {
        Self {
            pre_top_n: 1000,
            post_top_n: 100,
            nms_iou: 0.7,
            min_size: 1.0,
        }
    }
}

/// Turns scored candidate boxes into region proposals: clip to the image,
/// drop boxes with a side under `min_size`, keep the `pre_top_n` best, run
/// hard NMS and return at most `post_top_n` by descending score.
pub fn select_proposals(
    boxes: &[BBox],
    scores: &[f64],
    image_w: f64,
    image_h: f64,
    params: &ProposalParams,
) -> Result<Vec<Detection>> {
    if boxes.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: boxes.len(),
            right: scores.len(),
        });
    }
    if !positive_finite(image_w) || !positive_finite(image_h) {
        return Err(Error::param("image size", "must be positive"));
    }
    let mode = NmsMode::new(
        Suppression::Hard {
            iou: params.nms_iou,
        },
        0.0,
    )?;

    let mut candidates = Vec::with_capacity(boxes.len());
    for (b, &s) in boxes.iter().zip(scores) {
        let clipped = b.clip(image_w, image_h);
        if clipped.width() < params.min_size || clipped.height() < params.min_size {
            continue;
        }
        candidates.push(Detection::new(clipped, s)?);
    }
    // stable: equal scores keep input order
    candidates.sort_by(|a, b| b.score().total_cmp(&a.score()));
    candidates.truncate(params.pre_top_n);

    let mut kept = nms::nms(&candidates, &mode);
    kept.truncate(params.post_top_n);
    Ok(kept)
}
