//! Hard non-maximum suppression and Soft-NMS score decay.
//!
//! Both share one greedy loop: the highest-scoring remaining detection is
//! moved to the output, then every remaining detection of the same class is
//! rescaled by a decay factor of its IoU with the one just kept. Hard NMS is
//! the special case whose decay is a step function.

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// A scored box, optionally tagged with a class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    score: f64,
    pub class_id: Option<u32>,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64) -> Result<Self> {
        Self::with_class(bbox, score, None)
    }

    pub fn with_class(bbox: BBox, score: f64, class_id: Option<u32>) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        Ok(Self {
            bbox,
            score,
            class_id,
        })
    }

    #[inline]
    pub fn score(&self) -> f64 {
        self.score
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Suppression {
    /// Drop anything with IoU above the threshold.
    Hard { iou: f64 },
    /// Multiply by `1 - iou` when IoU is above the threshold.
    SoftLinear { iou: f64 },
    /// Multiply by `exp(-iou^2 / sigma)`.
    SoftGaussian { sigma: f64 },
}

impl Suppression {
    /// Multiplicative factor applied to a remaining score at the given IoU.
    pub fn decay(&self, iou: f64) -> f64 {
        match *self {
            Suppression::Hard { iou: nt } => {
                if iou > nt {
                    0.0
                } else {
                    1.0
                }
            }
            Suppression::SoftLinear { iou: nt } => {
                if iou > nt {
                    1.0 - iou
                } else {
                    1.0
                }
            }
            Suppression::SoftGaussian { sigma } => (-(iou * iou) / sigma).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsMode {
    pub suppression: Suppression,
    /// Detections whose score falls below this are removed.
    pub score_cutoff: f64,
}

pub const DEFAULT_IOU: f64 = 0.5;
pub const DEFAULT_SIGMA: f64 = 0.5;
pub const DEFAULT_SCORE_CUTOFF: f64 = 0.001;

impl NmsMode {
    pub fn new(suppression: Suppression, score_cutoff: f64) -> Result<Self> {
        match suppression {
            Suppression::Hard { iou } | Suppression::SoftLinear { iou } => {
                if !(iou > 0.0 && iou < 1.0) {
                    return Err(Error::param("iou", format!("{iou} is not in (0, 1)")));
                }
            }
            Suppression::SoftGaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param("sigma", format!("{sigma} must be positive")));
                }
            }
        }
        if !(score_cutoff >= 0.0 && score_cutoff.is_finite()) {
            return Err(Error::param(
                "score_cutoff",
                format!("{score_cutoff} must be non-negative"),
            ));
        }
        Ok(Self {
            suppression,
            score_cutoff,
        })
    }

    pub fn hard(iou: f64) -> Result<Self> {
        Self::new(Suppression::Hard { iou }, DEFAULT_SCORE_CUTOFF)
    }

    pub fn soft_linear(iou: f64) -> Result<Self> {
        Self::new(Suppression::SoftLinear { iou }, DEFAULT_SCORE_CUTOFF)
    }

    pub fn soft_gaussian(sigma: f64) -> Result<Self> {
        Self::new(Suppression::SoftGaussian { sigma }, DEFAULT_SCORE_CUTOFF)
    }

    pub fn with_cutoff(self, score_cutoff: f64) -> Result<Self> {
        Self::new(self.suppression, score_cutoff)
    }
}

/// Runs NMS in the given mode.
///
/// Output is sorted by final score, descending; equal scores keep input
/// order. Detections with different `class_id` never suppress each other.
pub fn nms(dets: &[Detection], mode: &NmsMode) -> Vec<Detection> {
    match mode.suppression {
        Suppression::Hard { iou } => hard_nms(dets, iou, mode.score_cutoff),
        s => soft_nms_with(dets, |iou| s.decay(iou), mode.score_cutoff),
    }
}

/// Greedy hard NMS: suppressed detections are removed outright.
fn hard_nms(dets: &[Detection], threshold: f64, cutoff: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len())
        .filter(|&i| dets[i].score >= cutoff)
        .collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));

    let mut suppressed = vec![false; dets.len()];
    let mut keep = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(dets[i]);
        for &j in &order[pos + 1..] {
            if !suppressed[j]
                && dets[j].class_id == dets[i].class_id
                && dets[i].bbox.iou(&dets[j].bbox) > threshold
            {
                suppressed[j] = true;
            }
        }
    }
    keep
}

/// Generic Soft-NMS loop with an arbitrary decay function of IoU.
///
/// `decay` must return a factor in `[0, 1]`. Remaining detections that drop
/// below `cutoff` are discarded.
pub fn soft_nms_with<F>(dets: &[Detection], decay: F, cutoff: f64) -> Vec<Detection>
where
    F: Fn(f64) -> f64,
{
    // (input index, current score)
    let mut remaining: Vec<(usize, f64)> = dets
        .iter()
        .enumerate()
        .filter(|(_, d)| d.score >= cutoff)
        .map(|(i, d)| (i, d.score))
        .collect();
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(remaining.len());

    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(pos, _)| pos)
            .unwrap();
        let (top, top_score) = remaining.swap_remove(best);
        out.push((top, top_score));

        let top_det = &dets[top];
        for entry in remaining.iter_mut() {
            let other = &dets[entry.0];
            if other.class_id != top_det.class_id {
                continue;
            }
            let factor = decay(top_det.bbox.iou(&other.bbox));
            debug_assert!((0.0..=1.0).contains(&factor));
            entry.1 *= factor;
        }
        remaining.retain(|&(_, s)| s >= cutoff);
    }

    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out.into_iter()
        .map(|(i, score)| Detection { score, ..dets[i] })
        .collect()
}
