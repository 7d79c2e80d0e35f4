//! File formats at the crate boundary.
//!
//! | file | header | row |
//! |------|--------|-----|
//! | ground truth | `patientId,x,y,width,height,Target` | `p1,10,20,30,40,1` or `p2,,,,,0` |
//! | predictions | `patientId,PredictionString` | `p1,0.9 10 20 30 40 0.5 1 2 3 4` |
//! | detections | `patientId,x,y,width,height,score,classId` | `p1,10,20,30,40,0.9,` |
//! | report | JSON, see [`report`] | |
//! | image | binary PGM (`P5`, maxval 255), see [`pgm`] | |
//!
//! Boxes are read as `x, y, width, height` and stored in corner form. Rows
//! may end in LF or CRLF. Extra columns are rejected.

mod csv_files;
pub mod pgm;
pub mod report;

pub use csv_files::{
    group_detections, group_ground_truth, group_predictions, read_detections, read_ground_truth,
    read_predictions, write_detections, write_ground_truth, write_predictions, DetectionRecord,
    GtRecord, PredRecord,
};
pub use report::{read_report, write_classification, write_report, ImageEntry, ScoreReport};

/// Shortest decimal text that parses back to exactly `v`.
pub(crate) fn fmt_real(v: f64) -> String {
    // `{}` on f64 is round-trip exact; normalise negative zero
    if v == 0.0 {
        "0".to_owned()
    } else {
        format!("{v}")
    }
}

/// Width to write for a `lo..hi` extent such that `lo + width == hi` when
/// read back, if such a value exists near `hi - lo`.
pub(crate) fn extent(lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if lo + w == hi {
        return w;
    }
    let (mut up, mut down) = (w, w);
    for _ in 0..64 {
        up = up.next_up();
        if lo + up == hi {
            return up;
        }
        down = down.next_down();
        if down >= 0.0 && lo + down == hi {
            return down;
        }
    }
    w
}
