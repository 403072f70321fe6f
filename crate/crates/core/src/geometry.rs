//! Boxes, detections, identities and single-channel images.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in pixel coordinates, stored as top-left corner plus size.
///
/// Coordinates are always finite and the size is never negative; both are
/// enforced at construction. Zero-area boxes are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        if !(left.is_finite() && top.is_finite() && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "non-finite box ({left}, {top}, {width}, {height})"
            )));
        }
        if width < 0.0 || height < 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "negative size {width}x{height}"
            )));
        }
        Ok(Self {
            left,
            top,
            width,
            height,
        })
    }

    /// Builds a box from center x, center y, aspect ratio (w/h) and height.
    pub fn from_xyah(cx: f64, cy: f64, aspect: f64, height: f64) -> Result<Self> {
        let width = aspect * height;
        Self::new(cx - width / 2.0, cy - height / 2.0, width, height)
    }

    /// Like [`BoundingBox::from_xyah`] but clamps a negative height or aspect
    /// to zero size. Used for filter predictions, which can drift.
    pub fn from_xyah_clamped(cx: f64, cy: f64, aspect: f64, height: f64) -> Result<Self> {
        let height = height.max(0.0);
        let width = (aspect * height).max(0.0);
        Self::new(cx - width / 2.0, cy - height / 2.0, width, height)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (self.left + self.width / 2.0, self.top + self.height / 2.0)
    }

    /// `(cx, cy, aspect, height)`. Aspect is 0 for a zero-height box.
    pub fn to_xyah(&self) -> [f64; 4] {
        let (cx, cy) = self.center();
        let aspect = if self.height > 0.0 {
            self.width / self.height
        } else {
            0.0
        };
        [cx, cy, aspect, self.height]
    }

    pub fn tlwh(&self) -> [f64; 4] {
        [self.left, self.top, self.width, self.height]
    }

    /// Linear interpolation between two boxes on the tlwh parameters.
    pub fn lerp(&self, other: &BoundingBox, t: f64) -> BoundingBox {
        let mix = |a: f64, b: f64| a + (b - a) * t;
        BoundingBox {
            left: mix(self.left, other.left),
            top: mix(self.top, other.top),
            width: mix(self.width, other.width),
            height: mix(self.height, other.height),
        }
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.left, self.top, self.width, self.height
        )
    }
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter_w = (a.right().min(b.right()) - a.left.max(b.left)).max(0.0);
    let inter_h = (a.bottom().min(b.bottom()) - a.top.max(b.top)).max(0.0);
    let inter = inter_w * inter_h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Intersection of `b` with `[0, img_w) x [0, img_h)`, or `None` when that
/// intersection has zero area.
pub fn clip_to_image(b: &BoundingBox, img_w: f64, img_h: f64) -> Option<BoundingBox> {
    let left = b.left.max(0.0);
    let top = b.top.max(0.0);
    let right = b.right().min(img_w);
    let bottom = b.bottom().min(img_h);
    if right <= left || bottom <= top {
        return None;
    }
    Some(BoundingBox {
        left,
        top,
        width: right - left,
        height: bottom - top,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub score: f64,
    pub class_id: i32,
}

impl Detection {
    pub fn new(bbox: BoundingBox, score: f64, class_id: i32) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Input(format!("detection score {score} outside [0, 1]")));
        }
        Ok(Self {
            bbox,
            score,
            class_id,
        })
    }
}

/// Zero-based frame position within a sequence. MOT files number frames
/// from 1; the conversion happens only when reading and writing them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FrameIndex(pub u32);

impl FrameIndex {
    pub fn from_one_based(n: i64) -> Option<Self> {
        if n >= 1 && n <= i64::from(u32::MAX) {
            Some(FrameIndex((n - 1) as u32))
        } else {
            None
        }
    }

    pub fn one_based(self) -> u32 {
        self.0 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(Error::Config(format!(
                "unsupported bit depth {other}, expected 8 or 16"
            ))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    /// One past the largest representable intensity.
    pub fn range_max(self) -> u32 {
        1 << self.bits()
    }
}

/// Row-major single-channel intensity image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    depth: BitDepth,
    data: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, depth: BitDepth, data: Vec<u16>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::Input(format!(
                "image data has {} values, expected {width}x{height} = {expected}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| u32::from(v) >= depth.range_max()) {
            return Err(Error::Input(format!(
                "intensity {v} does not fit in {} bits",
                depth.bits()
            )));
        }
        Ok(Self {
            width,
            height,
            depth,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, depth: BitDepth, value: u16) -> Result<Self> {
        Self::new(
            width,
            height,
            depth,
            vec![value; width as usize * height as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Fills the integer rectangle `[x0, x1) x [y0, y1)`, clipped to the image.
    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, value: u16) {
        let x0 = x0.clamp(0, self.width as i64) as usize;
        let x1 = x1.clamp(0, self.width as i64) as usize;
        let y0 = y0.clamp(0, self.height as i64) as usize;
        let y1 = y1.clamp(0, self.height as i64) as usize;
        let w = self.width as usize;
        for y in y0..y1 {
            self.data[y * w + x0..y * w + x1.max(x0)].fill(value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(l: f64, t: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(l, t, w, h).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(20.0, 20.0, 5.0, 5.0)), 0.0);
        assert_eq!(iou(&a, &bb(5.0, 0.0, 10.0, 10.0)), 50.0 / 150.0);
    }

    #[test]
    fn degenerate_boxes_have_zero_iou() {
        let z = bb(3.0, 3.0, 0.0, 0.0);
        assert_eq!(iou(&z, &z), 0.0);
        assert_eq!(iou(&z, &bb(0.0, 0.0, 10.0, 10.0)), 0.0);
    }

    #[test]
    fn non_finite_box_is_rejected() {
        assert!(matches!(
            BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(BoundingBox::new(0.0, f64::INFINITY, 1.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn clip_examples() {
        let inside = bb(10.0, 10.0, 20.0, 20.0);
        assert_eq!(clip_to_image(&inside, 640.0, 512.0), Some(inside));
        assert_eq!(
            clip_to_image(&bb(-5.0, -5.0, 10.0, 10.0), 640.0, 512.0),
            Some(bb(0.0, 0.0, 5.0, 5.0))
        );
        assert_eq!(clip_to_image(&bb(700.0, 600.0, 10.0, 10.0), 640.0, 512.0), None);
    }

    #[test]
    fn image_rejects_out_of_range_values() {
        assert!(GrayImage::new(2, 1, BitDepth::Eight, vec![0, 256]).is_err());
        assert!(GrayImage::new(2, 2, BitDepth::Eight, vec![0; 3]).is_err());
        assert!(GrayImage::new(2, 1, BitDepth::Sixteen, vec![0, 65535]).is_ok());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-100.0..100.0f64, -100.0..100.0f64, 0.0..50.0f64, 0.0..50.0f64)
            .prop_map(|(l, t, w, h)| bb(l, t, w, h))
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn self_iou_is_one(l in -100.0..100.0f64, t in -100.0..100.0f64, w in 0.5..50.0f64, h in 0.5..50.0f64) {
            let a = bb(l, t, w, h);
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn xyah_round_trip(l in -500.0..500.0f64, t in -500.0..500.0f64, w in 0.1..300.0f64, h in 0.1..300.0f64) {
            let b = bb(l, t, w, h);
            let [cx, cy, a, hh] = b.to_xyah();
            let back = BoundingBox::from_xyah(cx, cy, a, hh).unwrap();
            for (x, y) in back.tlwh().iter().zip(b.tlwh()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn clip_stays_inside_and_never_grows(b in arb_box(), w in 1.0..200.0f64, h in 1.0..200.0f64) {
            if let Some(c) = clip_to_image(&b, w, h) {
                prop_assert!(c.area() <= b.area() + 1e-9);
                prop_assert!(c.left() >= 0.0 && c.top() >= 0.0);
                prop_assert!(c.right() <= w && c.bottom() <= h);
            }
        }
    }
}
