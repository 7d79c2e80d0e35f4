//! Quantized RoI max-pooling.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// Dense feature map stored channel-major, then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::param(
                "data",
                format!(
                    "expected {}x{}x{} = {} values, got {}",
                    width,
                    height,
                    channels,
                    width * height * channels,
                    data.len()
                ),
            ));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::param("data", "feature values must be finite"));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }
}

/// Pooled output, channel-major then row-major like [`FeatureMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoiGrid {
    pub out_w: usize,
    pub out_h: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl RoiGrid {
    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.values[(c * self.out_h + j) * self.out_w + i]
    }
}

/// Cells `[floor(i*len/bins), ceil((i+1)*len/bins))` of a span of `len`
/// cells starting at `start`. Neighbouring bins may share a boundary cell;
/// every bin is non-empty when `len >= 1`.
pub fn bin_span(start: usize, len: usize, bins: usize, i: usize) -> Range<usize> {
    let lo = i * len / bins;
    let hi = ((i + 1) * len).div_ceil(bins);
    start + lo..start + hi
}

/// Snaps a RoI outward to whole cells and clips it to the map.
///
/// Returns `(x_range, y_range)` of covered cells.
pub fn snap_roi(roi: &BBox, width: usize, height: usize) -> Result<(Range<usize>, Range<usize>)> {
    let (w, h) = (width as f64, height as f64);
    if roi.x_max() <= 0.0 || roi.y_max() <= 0.0 || roi.x_min() >= w || roi.y_min() >= h {
        return Err(Error::RoiOutsideMap);
    }
    let x0 = roi.x_min().floor().clamp(0.0, w) as usize;
    let y0 = roi.y_min().floor().clamp(0.0, h) as usize;
    let x1 = roi.x_max().ceil().clamp(0.0, w) as usize;
    let y1 = roi.y_max().ceil().clamp(0.0, h) as usize;
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::EmptyRoi);
    }
    Ok((x0..x1, y0..y1))
}

pub fn roi_max_pool(map: &FeatureMap, roi: &BBox, out_w: usize, out_h: usize) -> Result<RoiGrid> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::param(
            "out_w/out_h",
            "output grid must be at least 1x1",
        ));
    }
    let (xs, ys) = snap_roi(roi, map.width, map.height)?;
    let (rw, rh) = (xs.len(), ys.len());

    let mut values = Vec::with_capacity(out_w * out_h * map.channels);
    for c in 0..map.channels {
        for j in 0..out_h {
            let rows = bin_span(ys.start, rh, out_h, j);
            for i in 0..out_w {
                let cols = bin_span(xs.start, rw, out_w, i);
                let mut best = f64::NEG_INFINITY;
                for y in rows.clone() {
                    for x in cols.clone() {
                        best = best.max(map.get(c, x, y));
                    }
                }
                values.push(best);
            }
        }
    }
    Ok(RoiGrid {
        out_w,
        out_h,
        channels: map.channels,
        values,
    })
}
