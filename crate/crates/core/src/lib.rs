//! Deterministic computational core of a two-stage lung-opacity detector.
//!
//! The crate covers everything around the network itself: box geometry and
//! IoU, anchor generation and labelling, RPN-style proposal selection, hard
//! and soft non-maximum suppression, quantized RoI max-pooling, loss values,
//! grayscale preprocessing (CLAHE, resize, augmentation) and the
//! multi-threshold competition mAP used to score opacity predictions.
//!
//! All boxes are stored in corner form (`x_min, y_min, x_max, y_max`) in
//! continuous pixel coordinates. Dataset files use `x, y, width, height`;
//! conversion happens only in [`formats`].

pub mod anchors;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod metrics;
pub mod nms;
pub mod preprocess;
pub mod roipool;

pub use anchors::{AnchorLabel, AnchorSpec, ProposalParams, RegressionTarget};
pub use error::{Error, Result};
pub use geometry::BBox;
pub use metrics::{
    ConfusionCounts, ConfusionMetrics, FoldAssignment, HitRule, ImageScore, MatchCounts,
    MatchResult, ThresholdSet,
};
pub use nms::{Detection, NmsMode, Suppression};
pub use preprocess::{AugmentSpec, ClaheParams, GrayImage};
pub use roipool::{FeatureMap, RoiGrid};
