//! Grayscale preprocessing: CLAHE, bilinear resize and box-aware
//! augmentation.

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// 8-bit single-channel raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::param(
                "pixels",
                format!("expected {} pixels, got {}", width * height, pixels.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Multiple of the uniform bin height `tile_pixels / 256`. Use
    /// `f64::INFINITY` to disable clipping.
    pub clip_limit: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            tiles_x: 8,
            tiles_y: 8,
            clip_limit: 2.0,
        }
    }
}

impl ClaheParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    fn validate(&self) -> Result<()> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(Error::param("tiles", "tile grid must be at least 1x1"));
        }
        if !(self.clip_limit > 0.0) {
            return Err(Error::param("clip_limit", "must be positive"));
        }
        Ok(())
    }
}

/// Tile `i` of `n` over `len` pixels covers `[i*len/n, (i+1)*len/n)`.
fn tile_bounds(len: usize, n: usize, i: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

/// Equalization lookup table of a (possibly clipped) histogram:
/// `lut[v] = round(255 * cdf(v) / total)`.
fn equalize_lut(hist: &[f64; 256], total: f64) -> [u8; 256] {
    let mut lut = [0u8; 256];
    let mut acc = 0.0;
    for (v, h) in hist.iter().enumerate() {
        acc += h;
        lut[v] = to_u8(255.0 * acc / total);
    }
    lut
}

/// For each coordinate along an axis: the two neighbouring tiles and the
/// weight of the second. Pixels beyond the outermost tile centres use the
/// edge tile alone.
fn axis_weights(len: usize, tiles: usize) -> Vec<(usize, usize, f64)> {
    let centers: Vec<f64> = (0..tiles)
        .map(|i| {
            let (s, e) = tile_bounds(len, tiles, i);
            (s + e - 1) as f64 / 2.0
        })
        .collect();
    (0..len)
        .map(|p| {
            let p = p as f64;
            if p <= centers[0] {
                return (0, 0, 0.0);
            }
            if p >= centers[tiles - 1] {
                return (tiles - 1, tiles - 1, 0.0);
            }
            let i = centers.partition_point(|&c| c <= p) - 1;
            let w = (p - centers[i]) / (centers[i + 1] - centers[i]);
            (i, i + 1, w)
        })
        .collect()
}

/// Contrast-limited adaptive histogram equalization.
pub fn clahe(img: &GrayImage, params: &ClaheParams) -> Result<GrayImage> {
    params.validate()?;
    let (w, h) = (img.width, img.height);
    let (tx, ty) = (params.tiles_x, params.tiles_y);
    if w < tx || h < ty {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            tiles_x: tx,
            tiles_y: ty,
        });
    }

    let mut luts = Vec::with_capacity(tx * ty);
    for j in 0..ty {
        let (y0, y1) = tile_bounds(h, ty, j);
        for i in 0..tx {
            let (x0, x1) = tile_bounds(w, tx, i);
            let mut hist = [0.0f64; 256];
            for y in y0..y1 {
                for &p in &img.pixels[y * w + x0..y * w + x1] {
                    hist[p as usize] += 1.0;
                }
            }
            let total = ((x1 - x0) * (y1 - y0)) as f64;
            if params.clip_limit.is_finite() {
                let limit = params.clip_limit * total / 256.0;
                let mut excess = 0.0;
                for b in hist.iter_mut() {
                    if *b > limit {
                        excess += *b - limit;
                        *b = limit;
                    }
                }
                let share = excess / 256.0;
                hist.iter_mut().for_each(|b| *b += share);
            }
            luts.push(equalize_lut(&hist, total));
        }
    }

    let xw = axis_weights(w, tx);
    let yw = axis_weights(h, ty);
    let mut out = Vec::with_capacity(w * h);
    for (y, &(j0, j1, wy)) in yw.iter().enumerate() {
        for (x, &(i0, i1, wx)) in xw.iter().enumerate() {
            let v = img.pixels[y * w + x] as usize;
            let l = |i: usize, j: usize| luts[j * tx + i][v] as f64;
            let top = (1.0 - wx) * l(i0, j0) + wx * l(i1, j0);
            let bottom = (1.0 - wx) * l(i0, j1) + wx * l(i1, j1);
            out.push(to_u8((1.0 - wy) * top + wy * bottom));
        }
    }
    GrayImage::new(w, h, out)
}

/// Bilinear resize with pixel-centre alignment.
pub fn resize(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::param("size", "output dimensions must be at least 1"));
    }
    if img.width == 0 || img.height == 0 {
        return Err(Error::param("image", "cannot resize an empty image"));
    }
    let taps = |src: usize, dst: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / dst as f64;
        (0..dst)
            .map(|d| {
                let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let lo = s.floor() as usize;
                (lo, (lo + 1).min(src - 1), s - lo as f64)
            })
            .collect()
    };
    let xs = taps(img.width, out_w);
    let ys = taps(img.height, out_h);
    let mut out = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let p = |x, y| img.get(x, y) as f64;
            let top = (1.0 - fx) * p(x0, y0) + fx * p(x1, y0);
            let bottom = (1.0 - fx) * p(x0, y1) + fx * p(x1, y1);
            out.push(to_u8((1.0 - fy) * top + fy * bottom));
        }
    }
    GrayImage::new(out_w, out_h, out)
}

/// Multiplies box x coordinates by `sx` and y coordinates by `sy`.
pub fn scale_boxes(boxes: &[BBox], sx: f64, sy: f64) -> Result<Vec<BBox>> {
    boxes.iter().map(|b| b.scale(sx, sy)).collect()
}

/// A deterministic augmentation: rotation about the image centre, then a
/// shift, then an optional horizontal mirror.
///
/// Positive angles rotate counter-clockwise as the image is displayed
/// (y pointing down).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentSpec {
    pub rotation_deg: f64,
    pub shift_x: f64,
    pub shift_y: f64,
    pub hflip: bool,
}

impl AugmentSpec {
    pub fn hflip() -> Self {
        Self {
            hflip: true,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if [self.rotation_deg, self.shift_x, self.shift_y]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::param("augment", "rotation and shift must be finite"))
        }
    }
}

struct PointMap {
    width: f64,
    height: f64,
    cx: f64,
    cy: f64,
    cos: f64,
    sin: f64,
    spec: AugmentSpec,
}

impl PointMap {
    fn new(width: usize, height: usize, spec: AugmentSpec) -> Self {
        let theta = spec.rotation_deg.to_radians();
        Self {
            width: width as f64,
            height: height as f64,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            cos: theta.cos(),
            sin: theta.sin(),
            spec,
        }
    }

    fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let mut x = self.cx + dx * self.cos + dy * self.sin + self.spec.shift_x;
        let y = self.cy - dx * self.sin + dy * self.cos + self.spec.shift_y;
        if self.spec.hflip {
            x = self.width - x;
        }
        (x, y)
    }

    fn apply_box(&self, b: &BBox) -> Result<Option<BBox>> {
        let corners = [
            (b.x_min(), b.y_min()),
            (b.x_max(), b.y_min()),
            (b.x_min(), b.y_max()),
            (b.x_max(), b.y_max()),
        ];
        let hull =
            BBox::hull(corners.iter().map(|&(x, y)| self.forward(x, y))).expect("four corners")?;
        let (w, h) = (self.width, self.height);
        if hull.x_max() < 0.0 || hull.y_max() < 0.0 || hull.x_min() > w || hull.y_min() > h {
            return Ok(None);
        }
        let clipped = hull.clip(w, h);
        // a box with area that only touches the border is gone
        if clipped.area() == 0.0 && b.area() > 0.0 {
            return Ok(None);
        }
        Ok(Some(clipped))
    }

    fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let x = if self.spec.hflip { self.width - x } else { x };
        let dx = x - self.spec.shift_x - self.cx;
        let dy = y - self.spec.shift_y - self.cy;
        (
            self.cx + dx * self.cos - dy * self.sin,
            self.cy + dx * self.sin + dy * self.cos,
        )
    }
}

/// Maps one box of a `width x height` image through `spec`, as
/// [`augment`] does. `None` when the box leaves the image.
pub fn augment_box(
    width: usize,
    height: usize,
    b: &BBox,
    spec: &AugmentSpec,
) -> Result<Option<BBox>> {
    spec.validate()?;
    PointMap::new(width, height, *spec).apply_box(b)
}

/// Applies `spec` to an image and its boxes.
///
/// Exposed pixels are zero-filled. Each box becomes the axis-aligned hull of
/// its transformed corners, clipped to the image; boxes that end up entirely
/// outside are dropped.
pub fn augment(
    img: &GrayImage,
    boxes: &[BBox],
    spec: &AugmentSpec,
) -> Result<(GrayImage, Vec<BBox>)> {
    spec.validate()?;
    let (w, h) = (img.width, img.height);
    let map = PointMap::new(w, h, *spec);

    let sample = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            img.get(x as usize, y as usize) as f64
        }
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map.inverse(x as f64 + 0.5, y as f64 + 0.5);
            let (px, py) = (sx - 0.5, sy - 0.5);
            let (x0, y0) = (px.floor(), py.floor());
            let (fx, fy) = (px - x0, py - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            let top = (1.0 - fx) * sample(x0, y0) + fx * sample(x0 + 1, y0);
            let bottom = (1.0 - fx) * sample(x0, y0 + 1) + fx * sample(x0 + 1, y0 + 1);
            out.push(to_u8((1.0 - fy) * top + fy * bottom));
        }
    }

    let mut moved = Vec::with_capacity(boxes.len());
    for b in boxes {
        if let Some(m) = map.apply_box(b)? {
            moved.push(m);
        }
    }
    Ok((GrayImage::new(w, h, out)?, moved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    /// Global histogram equalization by ranking: each pixel maps to
    /// `round(255 * #{pixels <= value} / N)`.
    fn global_equalize(img: &GrayImage) -> Vec<u8> {
        let mut sorted = img.pixels().to_vec();
        sorted.sort_unstable();
        let n = sorted.len() as f64;
        img.pixels()
            .iter()
            .map(|&v| {
                let rank = sorted.partition_point(|&s| s <= v) as f64;
                (255.0 * rank / n).round() as u8
            })
            .collect()
    }

    fn noise(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let px = (0..w * h)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 56) as u8
            })
            .collect();
        GrayImage::new(w, h, px).unwrap()
    }

    #[test]
    fn clahe_constant_image() {
        let img = GrayImage::filled(40, 30, 77);
        let out = clahe(&img, &ClaheParams::default()).unwrap();
        let first = out.pixels()[0];
        assert!(out.pixels().iter().all(|&p| p == first));
    }

    #[test]
    fn clahe_single_unclipped_tile_is_global_equalization() {
        let params = ClaheParams {
            tiles_x: 1,
            tiles_y: 1,
            clip_limit: f64::INFINITY,
        };
        for seed in 0..5 {
            let img = noise(33, 17, seed);
            assert_eq!(
                clahe(&img, &params).unwrap().pixels(),
                global_equalize(&img).as_slice()
            );
        }
    }

    #[test]
    fn clahe_preserves_shape() {
        let img = noise(512, 512, 9);
        let out = clahe(&img, &ClaheParams::default()).unwrap();
        assert_eq!((out.width(), out.height()), (512, 512));
    }

    #[test]
    fn clahe_errors() {
        let img = GrayImage::filled(4, 4, 0);
        assert!(matches!(
            clahe(&img, &ClaheParams::default()),
            Err(Error::ImageTooSmall { .. })
        ));
        let bad = ClaheParams {
            clip_limit: 0.0,
            ..ClaheParams::default()
        };
        assert!(clahe(&GrayImage::filled(16, 16, 0), &bad).is_err());
    }

    #[test]
    fn clipping_limits_contrast_stretch() {
        // two-level image: unclipped equalization pushes levels apart
        let mut px = vec![100u8; 64 * 64];
        px[..64 * 8].iter_mut().for_each(|p| *p = 110);
        let img = GrayImage::new(64, 64, px).unwrap();
        let spread = |clip| {
            let p = ClaheParams {
                tiles_x: 1,
                tiles_y: 1,
                clip_limit: clip,
            };
            let o = clahe(&img, &p).unwrap();
            o.get(0, 0) as i32 - o.get(0, 63) as i32
        };
        assert!(spread(1.5) < spread(f64::INFINITY));
    }

    #[test]
    fn resize_examples() {
        let img = noise(1024, 1024, 1);
        let out = resize(&img, 512, 512).unwrap();
        assert_eq!((out.width(), out.height()), (512, 512));
        let small = noise(37, 21, 2);
        assert_eq!(resize(&small, 37, 21).unwrap(), small);
        let c = GrayImage::filled(13, 9, 201);
        assert_eq!(resize(&c, 50, 3).unwrap(), GrayImage::filled(50, 3, 201));
        assert!(resize(&c, 0, 3).is_err());
    }

    #[test]
    fn resize_halves_by_averaging() {
        let img = GrayImage::new(4, 1, vec![0, 100, 200, 50]).unwrap();
        let out = resize(&img, 2, 1).unwrap();
        assert_eq!(out.pixels(), &[50, 125]);
    }

    #[test]
    fn scale_boxes_examples() {
        assert_eq!(
            scale_boxes(&[bx(0., 0., 10., 10.)], 0.5, 0.5).unwrap(),
            vec![bx(0., 0., 5., 5.)]
        );
        assert_eq!(
            scale_boxes(&[bx(100., 200., 300., 400.)], 0.5, 0.25).unwrap(),
            vec![bx(50., 50., 150., 100.)]
        );
        assert!(scale_boxes(&[bx(0., 0., 1., 1.)], 0.0, 1.0).is_err());
    }

    #[test]
    fn hflip_box() {
        let img = GrayImage::filled(100, 20, 0);
        let (_, b) = augment(&img, &[bx(10., 0., 30., 10.)], &AugmentSpec::hflip()).unwrap();
        assert_eq!(b, vec![bx(70., 0., 90., 10.)]);
    }

    #[test]
    fn identity_augment() {
        let img = noise(31, 19, 4);
        let boxes = vec![bx(1., 2., 10., 12.), bx(0., 0., 31., 19.)];
        let (out, ob) = augment(&img, &boxes, &AugmentSpec::default()).unwrap();
        assert_eq!(out, img);
        assert_eq!(ob, boxes);
    }

    #[test]
    fn integer_shift_moves_pixels() {
        let img = noise(10, 8, 5);
        let spec = AugmentSpec {
            shift_x: 3.0,
            shift_y: -2.0,
            ..Default::default()
        };
        let (out, b) = augment(&img, &[bx(0., 4., 2., 8.), bx(8., 0., 10., 1.)], &spec).unwrap();
        for y in 0..8 {
            for x in 0..10 {
                let src = (x as i64 - 3, y as i64 + 2);
                let want = if src.0 < 0 || src.1 >= 8 {
                    0
                } else {
                    img.get(src.0 as usize, src.1 as usize)
                };
                assert_eq!(out.get(x, y), want);
            }
        }
        // second box is pushed off the right edge
        assert_eq!(b, vec![bx(3., 2., 5., 6.)]);
    }

    #[test]
    fn quarter_turn() {
        // 90 degrees counter-clockwise on a square image
        let img = noise(6, 6, 6);
        let spec = AugmentSpec {
            rotation_deg: 90.0,
            ..Default::default()
        };
        let (out, b) = augment(&img, &[bx(4., 0., 6., 1.)], &spec).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                assert_eq!(out.get(x, y), img.get(5 - y, x));
            }
        }
        let b = b[0];
        for (u, v) in b.corners().iter().zip([0.0, 0.0, 1.0, 2.0]) {
            assert!((u - v).abs() < 1e-9, "{b:?}");
        }
    }

    fn fixture() -> impl Strategy<Value = (GrayImage, Vec<BBox>)> {
        (1usize..40, 1usize..40).prop_flat_map(|(w, h)| {
            let b = (0..=w * 4, 0..=h * 4, 0..=w * 4, 0..=h * 4).prop_map(|(a, b, c, d)| {
                let q = |v: usize| v as f64 / 4.0;
                bx(q(a.min(c)), q(b.min(d)), q(a.max(c)), q(b.max(d)))
            });
            (
                prop::collection::vec(any::<u8>(), w * h),
                prop::collection::vec(b, 0..6),
            )
                .prop_map(move |(px, boxes)| (GrayImage::new(w, h, px).unwrap(), boxes))
        })
    }

    proptest! {
        #[test]
        fn double_hflip_is_identity((img, boxes) in fixture()) {
            let once = augment(&img, &boxes, &AugmentSpec::hflip()).unwrap();
            let twice = augment(&once.0, &once.1, &AugmentSpec::hflip()).unwrap();
            prop_assert_eq!(&twice.0, &img);
            prop_assert_eq!(twice.1, boxes);
        }

        #[test]
        fn augmented_boxes_in_bounds(
            (img, boxes) in fixture(),
            rot in -30.0..30.0f64, sx in -20.0..20.0f64, sy in -20.0..20.0f64, flip: bool,
        ) {
            let spec = AugmentSpec { rotation_deg: rot, shift_x: sx, shift_y: sy, hflip: flip };
            let (out, moved) = augment(&img, &boxes, &spec).unwrap();
            prop_assert_eq!((out.width(), out.height()), (img.width(), img.height()));
            for b in moved {
                prop_assert!(b.x_min() >= 0.0 && b.y_min() >= 0.0);
                prop_assert!(b.x_max() <= img.width() as f64 && b.y_max() <= img.height() as f64);
            }
        }

        #[test]
        fn constant_resize_round_trip(w in 1usize..50, h in 1usize..50, ow in 1usize..80, oh in 1usize..80, v: u8) {
            let img = GrayImage::filled(w, h, v);
            let there = resize(&img, ow, oh).unwrap();
            prop_assert_eq!(resize(&there, w, h).unwrap(), img);
        }

        #[test]
        fn clahe_defaults_total(seed: u64, w in 8usize..70, h in 8usize..70) {
            let img = noise(w, h, seed);
            let out = clahe(&img, &ClaheParams::default()).unwrap();
            prop_assert_eq!(out.pixels().len(), w * h);
        }
    }
}
