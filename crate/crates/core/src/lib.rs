//! Multi-object tracking for thermal video.
//!
//! Detections are associated to Kalman-predicted tracks on a fused score:
//! `alpha * IoU + (1 - alpha) * thermal`, where the thermal term compares ROI
//! intensity histograms with the Bhattacharyya coefficient. The crate also
//! ships a CLEAR-MOT / identity metrics evaluator, MOTChallenge-format I/O and
//! a deterministic synthetic scenario generator.

pub mod association;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod motion;
pub mod synth;
pub mod tracker;

pub use error::{Error, Result};
pub use geometry::{clip_to_image, iou, BitDepth, BoundingBox, Detection, FrameIndex, GrayImage, TrackId};
pub use tracker::{TrackRecord, Tracker, TrackerConfig, Variant};
