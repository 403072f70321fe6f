//! Thermal-identity similarity, its fusion with motion similarity, and the
//! track-to-detection assignment that consumes the fused scores.

mod histogram;
pub mod lap;

pub use histogram::{
    bhattacharyya, compute_histogram, extract_roi, histogram_for_box, Histogram, HistogramConfig, Roi,
    TrackRoiSource,
};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, GrayImage};

/// Track-by-detection scores in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Input(format!(
                "{} values for a {rows}x{cols} similarity matrix",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Input(format!("similarity {v} outside [0, 1]")));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// `f` must return values in `[0, 1]`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                debug_assert!((0.0..=1.0).contains(&v), "similarity {v} at ({i}, {j})");
                values.push(v);
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sub-matrix of the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SimilarityMatrix {
        SimilarityMatrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }
}

/// Bhattacharyya similarity between every pair of histograms.
pub fn similarity_from_histograms(tracks: &[Histogram], dets: &[Histogram]) -> Result<SimilarityMatrix> {
    let mut values = Vec::with_capacity(tracks.len() * dets.len());
    for t in tracks {
        for d in dets {
            values.push(bhattacharyya(t, d)?);
        }
    }
    Ok(SimilarityMatrix {
        rows: tracks.len(),
        cols: dets.len(),
        values,
    })
}

/// Thermal similarity: both ROIs are cut from the same image `img`, each
/// track at the box given for it (normally its prediction).
pub fn thermal_similarity_matrix(
    track_boxes: &[BoundingBox],
    det_boxes: &[BoundingBox],
    img: &GrayImage,
    cfg: &HistogramConfig,
) -> Result<SimilarityMatrix> {
    cfg.validate()?;
    let hist = |b: &BoundingBox| histogram_for_box(img, b, cfg);
    let tracks = track_boxes.iter().map(hist).collect::<Result<Vec<_>>>()?;
    let dets = det_boxes.iter().map(hist).collect::<Result<Vec<_>>>()?;
    similarity_from_histograms(&tracks, &dets)
}

/// `alpha * motion + (1 - alpha) * thermal`, elementwise.
pub fn fuse(motion: &SimilarityMatrix, thermal: &SimilarityMatrix, alpha: f64) -> Result<SimilarityMatrix> {
    if motion.shape() != thermal.shape() {
        return Err(Error::DimensionMismatch {
            expected: motion.shape(),
            got: thermal.shape(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha {alpha} outside [0, 1]")));
    }
    let beta = 1.0 - alpha;
    let values = motion
        .values
        .iter()
        .zip(&thermal.values)
        .map(|(m, t)| (alpha * m + beta * t).clamp(0.0, 1.0))
        .collect();
    Ok(SimilarityMatrix {
        rows: motion.rows,
        cols: motion.cols,
        values,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentResult {
    /// `(track_index, det_index)`, ascending by track index.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
}

/// Maximum-total-similarity matching (cost `1 - similarity`, square padding
/// with zero-similarity dummies). Optimal pairs scoring below
/// `min_similarity` are returned as unmatched.
pub fn solve_assignment(sim: &SimilarityMatrix, min_similarity: f64) -> AssignmentResult {
    let (m, n) = sim.shape();
    if m == 0 || n == 0 {
        return AssignmentResult {
            matches: Vec::new(),
            unmatched_tracks: (0..m).collect(),
            unmatched_dets: (0..n).collect(),
        };
    }
    let size = m.max(n);
    let mut cost = vec![1.0; size * size];
    for i in 0..m {
        for j in 0..n {
            cost[i * size + j] = 1.0 - sim.get(i, j);
        }
    }
    let row_col = lap::solve_square(size, &cost);

    let mut result = AssignmentResult::default();
    let mut det_matched = vec![false; n];
    for (i, &j) in row_col.iter().enumerate().take(m) {
        if j < n && sim.get(i, j) >= min_similarity {
            result.matches.push((i, j));
            det_matched[j] = true;
        } else {
            result.unmatched_tracks.push(i);
        }
    }
    result.unmatched_dets = (0..n).filter(|&j| !det_matched[j]).collect();
    result
}
