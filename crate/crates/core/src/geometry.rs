//! Axis-aligned boxes and intersection-over-union.

use crate::error::{Error, Result};

/// Axis-aligned rectangle in continuous pixel coordinates.
///
/// No `+1` pixel-inclusive convention: a box from `x` spanning `w` pixels has
/// `x_max = x + w`. Zero-area boxes are valid, negative extents are not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let err = |reason| Error::InvalidBox {
            x_min,
            y_min,
            x_max,
            y_max,
            reason,
        };
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(err("coordinates must be finite"));
        }
        if x_min > x_max || y_min > y_max {
            return Err(err("negative extent"));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from the dataset's `(x, y, width, height)` layout.
    pub fn from_xywh(x: f64, y: f64, width: f64, height: f64) -> Result<Self> {
        if !(width >= 0.0 && height >= 0.0) {
            return Err(Error::InvalidBox {
                x_min: x,
                y_min: y,
                x_max: x + width,
                y_max: y + height,
                reason: "negative width or height",
            });
        }
        Self::new(x, y, x + width, y + height)
    }

    /// Builds a box from its center and size.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(
            cx - 0.5 * width,
            cy - 0.5 * height,
            cx + 0.5 * width,
            cy + 0.5 * height,
        )
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union. Two zero-area boxes have IoU 0.
    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        if inter <= 0.0 {
            return 0.0;
        }
        let union = self.area() + other.area() - inter;
        (inter / union).clamp(0.0, 1.0)
    }

    /// Clamps every coordinate into `[0, width] x [0, height]`.
    pub fn clip(&self, width: f64, height: f64) -> BBox {
        let cx = |v: f64| v.clamp(0.0, width);
        let cy = |v: f64| v.clamp(0.0, height);
        BBox {
            x_min: cx(self.x_min),
            y_min: cy(self.y_min),
            x_max: cx(self.x_max),
            y_max: cy(self.y_max),
        }
    }

    /// Multiplies x coordinates by `sx` and y coordinates by `sy`.
    pub fn scale(&self, sx: f64, sy: f64) -> Result<BBox> {
        if !(sx > 0.0 && sx.is_finite()) || !(sy > 0.0 && sy.is_finite()) {
            return Err(Error::param("scale", "factors must be positive and finite"));
        }
        BBox::new(
            self.x_min * sx,
            self.y_min * sy,
            self.x_max * sx,
            self.y_max * sy,
        )
    }

    /// Smallest box containing every point. `None` for an empty iterator.
    pub fn hull<I>(points: I) -> Option<Result<BBox>>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut iter = points.into_iter();
        let (x0, y0) = iter.next()?;
        let (mut lx, mut ly, mut hx, mut hy) = (x0, y0, x0, y0);
        for (x, y) in iter {
            lx = lx.min(x);
            ly = ly.min(y);
            hx = hx.max(x);
            hy = hy.max(y);
        }
        Some(BBox::new(lx, ly, hx, hy))
    }
}

#[inline]
pub fn area(b: &BBox) -> f64 {
    b.area()
}

#[inline]
pub fn intersection_area(a: &BBox, b: &BBox) -> f64 {
    a.intersection_area(b)
}

#[inline]
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}
