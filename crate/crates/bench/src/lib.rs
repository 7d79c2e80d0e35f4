//! Synthetic fixtures for the benchmarks.

use lungdet_core::{BBox, Detection, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Boxes inside a `size`×`size` canvas with sides in `[8, size/4)`.
pub fn random_boxes(r: &mut ChaCha8Rng, n: usize, size: f64) -> Vec<BBox> {
    (0..n)
        .map(|_| {
            let w = r.gen_range(8.0..size / 4.0);
            let h = r.gen_range(8.0..size / 4.0);
            let x = r.gen_range(0.0..size - w);
            let y = r.gen_range(0.0..size - h);
            BBox::from_xywh(x, y, w, h).unwrap()
        })
        .collect()
}

pub fn random_detections(r: &mut ChaCha8Rng, n: usize, size: f64) -> Vec<Detection> {
    random_boxes(r, n, size)
        .into_iter()
        .map(|b| Detection::new(b, r.gen_range(0.0..=1.0)).unwrap())
        .collect()
}

pub fn noise_image(r: &mut ChaCha8Rng, width: usize, height: usize) -> GrayImage {
    GrayImage::new(
        width,
        height,
        (0..width * height).map(|_| r.gen()).collect(),
    )
    .unwrap()
}

/// One scoring case: ground truth plus jittered and spurious predictions.
pub fn scoring_case(r: &mut ChaCha8Rng, n_gt: usize) -> (Vec<BBox>, Vec<Detection>) {
    let gt = random_boxes(r, n_gt, 1024.0);
    let mut preds: Vec<Detection> = gt
        .iter()
        .map(|b| {
            let j = r.gen_range(-6.0..6.0);
            let moved =
                BBox::from_xywh(b.x_min() + j, b.y_min() - j, b.width(), b.height()).unwrap();
            Detection::new(moved, r.gen_range(0.3..1.0)).unwrap()
        })
        .collect();
    preds.extend(random_detections(r, n_gt / 2 + 1, 1024.0));
    (gt, preds)
}
