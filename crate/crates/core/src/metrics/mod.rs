//! Detection scoring, binary-classification metrics, fold splitting and
//! loss values.

mod confusion;
mod folds;
pub mod loss;
mod matching;

pub use confusion::{confusion_metrics, ConfusionCounts, ConfusionMetrics, MetricName};
pub use folds::{kfold_split, FoldAssignment};
pub use loss::{bce, smooth_l1, total_loss};
pub use matching::{
    dataset_map, image_ap, image_score, match_boxes, HitRule, ImageScore, MatchCounts, MatchResult,
    ThresholdSet,
};
