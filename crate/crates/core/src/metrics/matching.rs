use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::nms::Detection;

/// Strictly increasing IoU thresholds in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet(Vec<f64>);

impl ThresholdSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param(
                "thresholds",
                "at least one threshold is required",
            ));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::param("thresholds", format!("{v} is not in (0, 1)")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("thresholds", "must be strictly increasing"));
        }
        Ok(Self(values))
    }

    /// `lo, lo + step, ...` up to and including `hi`.
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !(hi >= lo) {
            return Err(Error::param("thresholds", "need lo <= hi and step > 0"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        // snap to a decimal grid so 0.4 + 3 * 0.05 reads back as 0.55
        let values = (0..n)
            .map(|i| ((lo + i as f64 * step) * 1e10).round() / 1e10)
            .collect();
        Self::new(values)
    }

    /// Parses `lo:hi:step` or a comma-separated list.
    pub fn parse(text: &str) -> Result<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::param("thresholds", format!("`{}` is not a number", s.trim())))
        };
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [lo, hi, step] => Self::range(num(lo)?, num(hi)?, num(step)?),
            [_] => Self::new(text.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(Error::param(
                "thresholds",
                "expected lo:hi:step or a comma list",
            )),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ThresholdSet {
    /// 0.40, 0.45, ..., 0.75
    fn default() -> Self {
        Self((0..8).map(|k| (40 + 5 * k) as f64 / 100.0).collect())
    }
}

/// When an IoU counts as a hit at threshold `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HitRule {
    /// `iou > t`
    #[default]
    GreaterThan,
    /// `iou >= t`
    AtLeast,
}

impl HitRule {
    #[inline]
    pub fn hit(self, iou: f64, t: f64) -> bool {
        match self {
            HitRule::GreaterThan => iou > t,
            HitRule::AtLeast => iou >= t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchCounts {
    /// `tp / (tp + fp + fn)`, or `None` when all three are zero.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.tp + self.fp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub counts: MatchCounts,
    /// `(prediction index, ground-truth index, iou)` in matching order.
    pub matched_pairs: Vec<(usize, usize, f64)>,
}

/// Greedy one-to-one matching at a single IoU threshold.
///
/// Predictions are visited by descending confidence (input order on ties).
/// Each takes the still-unmatched ground truth with the highest IoU (lowest
/// index on ties) if that IoU is a hit under `rule`.
pub fn match_boxes(preds: &[Detection], gt: &[BBox], threshold: f64, rule: HitRule) -> MatchResult {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score().total_cmp(&preds[a].score()));

    let mut taken = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for p in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, truth) in gt.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let v = preds[p].bbox.iou(truth);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, v)) = best {
            if rule.hit(v, threshold) {
                taken[g] = true;
                pairs.push((p, g, v));
            }
        }
    }

    let tp = pairs.len();
    MatchResult {
        counts: MatchCounts {
            tp,
            fp: preds.len() - tp,
            fn_: gt.len() - tp,
        },
        matched_pairs: pairs,
    }
}

/// Per-image score with the counts behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageScore {
    /// `None` when the image has neither predictions nor ground truth.
    pub ap: Option<f64>,
    /// One entry per threshold.
    pub counts: Vec<MatchCounts>,
}

pub fn image_score(
    preds: &[Detection],
    gt: &[BBox],
    thresholds: &ThresholdSet,
    rule: HitRule,
) -> ImageScore {
    let counts: Vec<MatchCounts> = thresholds
        .values()
        .iter()
        .map(|&t| match_boxes(preds, gt, t, rule).counts)
        .collect();
    let ap = if preds.is_empty() && gt.is_empty() {
        None
    } else if gt.is_empty() {
        Some(0.0)
    } else {
        let sum: f64 = counts.iter().map(|c| c.precision().unwrap_or(0.0)).sum();
        Some(sum / thresholds.len() as f64)
    };
    ImageScore { ap, counts }
}

/// Mean over thresholds of `tp / (tp + fp + fn)` for one image.
pub fn image_ap(
    preds: &[Detection],
    gt: &[BBox],
    thresholds: &ThresholdSet,
    rule: HitRule,
) -> Option<f64> {
    image_score(preds, gt, thresholds, rule).ap
}

/// Mean of the present per-image scores; 0 when none are present.
pub fn dataset_map(per_image: &[Option<f64>]) -> f64 {
    let (sum, n) = per_image
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
