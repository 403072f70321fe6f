//! ROI extraction, intensity histograms and the Bhattacharyya coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_to_image, BitDepth, BoundingBox, GrayImage};

/// Which pixels a track contributes to its thermal similarity row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackRoiSource {
    /// The track's predicted box, cut from the current frame.
    #[default]
    Predicted,
    /// The histogram cached when the track was last matched to a detection.
    LastObservation,
}

impl std::str::FromStr for TrackRoiSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predicted" => Ok(Self::Predicted),
            "last-observation" => Ok(Self::LastObservation),
            other => Err(Error::Config(format!(
                "unknown track ROI source '{other}' (expected predicted or last-observation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    /// Bin count; `None` picks 32 bins for 8-bit and 64 for 16-bit images.
    pub bins: Option<usize>,
    pub track_roi: TrackRoiSource,
}

impl HistogramConfig {
    pub fn bins_for(&self, depth: BitDepth) -> usize {
        self.bins.unwrap_or(match depth {
            BitDepth::Eight => 32,
            BitDepth::Sixteen => 64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == Some(0) {
            return Err(Error::Config("histogram bins must be at least 1".into()));
        }
        Ok(())
    }
}

/// Pixel values under a box, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roi {
    pub width: u32,
    pub height: u32,
    pub values: Vec<u16>,
}

/// Cuts the pixels under `b`. The clipped box is expanded outward to whole
/// pixels (floor of left/top, ceil of right/bottom). `None` when less than one
/// pixel of area remains inside the image.
pub fn extract_roi(img: &GrayImage, b: &BoundingBox) -> Option<Roi> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return None;
    }
    let clipped = clip_to_image(b, f64::from(w), f64::from(h))?;
    if clipped.area() < 1.0 {
        return None;
    }
    let x0 = clipped.left().floor().max(0.0) as u32;
    let y0 = clipped.top().floor().max(0.0) as u32;
    let x1 = (clipped.right().ceil() as u32).min(w);
    let y1 = (clipped.bottom().ceil() as u32).min(h);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    let stride = w as usize;
    let data = img.data();
    let mut values = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
    for y in y0..y1 {
        let row = y as usize * stride;
        values.extend_from_slice(&data[row + x0 as usize..row + x1 as usize]);
    }
    Some(Roi {
        width: x1 - x0,
        height: y1 - y0,
        values,
    })
}

/// Normalized intensity histogram. An all-zero weight vector marks an empty ROI.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    range_max: u32,
    weights: Vec<f64>,
}

impl Histogram {
    /// The empty-ROI sentinel: every weight zero.
    pub fn empty(bins: usize, range_max: u32) -> Self {
        Self {
            range_max,
            weights: vec![0.0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub fn range_max(&self) -> u32 {
        self.range_max
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }
}

/// Bins `values` into `bins` equal-width bins over `[0, range_max)`; value `v`
/// goes to `floor(v * bins / range_max)`, clamped to the last bin.
pub fn compute_histogram(values: &[u16], bins: usize, range_max: u32) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Config("histogram bins must be at least 1".into()));
    }
    if range_max == 0 {
        return Err(Error::Config("histogram range must be positive".into()));
    }
    if values.is_empty() {
        return Ok(Histogram::empty(bins, range_max));
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = (u64::from(v) * bins as u64 / u64::from(range_max)).min(bins as u64 - 1);
        counts[idx as usize] += 1;
    }
    let total = values.len() as f64;
    Ok(Histogram {
        range_max,
        weights: counts.into_iter().map(|c| c as f64 / total).collect(),
    })
}

/// Histogram of the ROI under `b`, or the empty sentinel when nothing is visible.
pub fn histogram_for_box(img: &GrayImage, b: &BoundingBox, cfg: &HistogramConfig) -> Result<Histogram> {
    let bins = cfg.bins_for(img.depth());
    let range_max = img.depth().range_max();
    match extract_roi(img, b) {
        Some(roi) => compute_histogram(&roi.values, bins, range_max),
        None => Ok(Histogram::empty(bins, range_max)),
    }
}

/// `sum_k sqrt(p_k q_k)`, in `[0, 1]`.
pub fn bhattacharyya(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h1.bins() != h2.bins() || h1.range_max != h2.range_max {
        return Err(Error::Config(format!(
            "histogram binning mismatch: {} bins over {} vs {} bins over {}",
            h1.bins(),
            h1.range_max,
            h2.bins(),
            h2.range_max
        )));
    }
    let bc: f64 = h1
        .weights
        .iter()
        .zip(&h2.weights)
        .map(|(p, q)| (p * q).sqrt())
        .sum();
    Ok(bc.clamp(0.0, 1.0))
}
