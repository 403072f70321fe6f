//! Seeded synthetic sequences with exact ground truth.
//!
//! Frames are a zero background with hard-edged constant-intensity
//! rectangles, so every ROI histogram is known in closed form. Detector
//! corruption draws from ChaCha8 seeded with `Scenario::seed`, in this order:
//! for each frame, for each object that is on screen, one dropout uniform,
//! four jitter normals (left, top, width, height) and one score draw; then a
//! Poisson clutter count followed by position, size index and score draws for
//! every clutter box.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_to_image, BitDepth, BoundingBox, Detection, FrameIndex, GrayImage};
use crate::io::{self, DetectionSet, Modality, SequenceManifest, DEFAULT_FRAME_RATE};
use crate::metrics::{GroundTruth, GroundTruthBox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Trajectory {
    /// `center(t) = start + velocity * t`.
    Linear { start: [f64; 2], velocity: [f64; 2] },
    /// Reaches `meet` by constant-velocity extrapolation at `frame`, but is
    /// actually observed at `meet + offset` there; moves with `exit_velocity`
    /// afterwards.
    Crossing {
        meet: [f64; 2],
        frame: u32,
        velocity: [f64; 2],
        #[serde(default)]
        offset: [f64; 2],
        #[serde(default)]
        exit_velocity: [f64; 2],
    },
    /// Moves for `go` frames, then holds still for `stop` frames, repeatedly.
    StopAndGo {
        start: [f64; 2],
        velocity: [f64; 2],
        go: u32,
        stop: u32,
    },
}

impl Trajectory {
    pub fn center(&self, t: u32) -> [f64; 2] {
        let t = f64::from(t);
        match *self {
            Trajectory::Linear { start, velocity } => [start[0] + velocity[0] * t, start[1] + velocity[1] * t],
            Trajectory::Crossing {
                meet,
                frame,
                velocity,
                offset,
                exit_velocity,
            } => {
                let dt = t - f64::from(frame);
                if dt < 0.0 {
                    [meet[0] + velocity[0] * dt, meet[1] + velocity[1] * dt]
                } else {
                    [
                        meet[0] + offset[0] + exit_velocity[0] * dt,
                        meet[1] + offset[1] + exit_velocity[1] * dt,
                    ]
                }
            }
            Trajectory::StopAndGo {
                start,
                velocity,
                go,
                stop,
            } => {
                let period = f64::from(go + stop);
                let moved = if period == 0.0 {
                    0.0
                } else {
                    let cycles = (t / period).floor();
                    cycles * f64::from(go) + (t - cycles * period).min(f64::from(go))
                };
                [start[0] + velocity[0] * moved, start[1] + velocity[1] * moved]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub intensity: u16,
    /// Box width and height in pixels.
    pub size: [f64; 2],
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScoreModel {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for ScoreModel {
    fn default() -> Self {
        ScoreModel::Constant { value: 0.9 }
    }
}

impl ScoreModel {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ScoreModel::Constant { value } => {
                let _: f64 = rng.random();
                value
            }
            ScoreModel::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Corruption {
    /// Standard deviation of the Gaussian added to each of left, top, width, height.
    pub jitter_sigma: f64,
    pub dropout: f64,
    pub score: ScoreModel,
    /// Mean number of false detections per frame.
    pub clutter_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    pub frame_count: u32,
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_bits")]
    pub bit_depth: u32,
    #[serde(default = "default_true")]
    pub require_distinct_intensities: bool,
    /// Detections are listed in reverse object order from this frame on.
    #[serde(default)]
    pub reverse_order_from: Option<u32>,
    #[serde(default)]
    pub corruption: Corruption,
    pub objects: Vec<ObjectSpec>,
}

fn default_name() -> String {
    "synthetic".into()
}

fn default_bits() -> u32 {
    8
}

fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scn: Scenario = toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn depth(&self) -> Result<BitDepth> {
        BitDepth::from_bits(self.bit_depth)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(format!("scenario '{}': {m}", self.name)));
        let depth = self.depth()?;
        if self.frame_count == 0 || self.width == 0 || self.height == 0 {
            return cfg("frame_count, width and height must be positive".into());
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if obj.intensity == 0 || u32::from(obj.intensity) >= depth.range_max() {
                return cfg(format!(
                    "object {i}: intensity {} outside 1..{}",
                    obj.intensity,
                    depth.range_max()
                ));
            }
            if !obj.size.iter().all(|s| s.is_finite() && *s > 0.0) {
                return cfg(format!("object {i}: size must be positive"));
            }
        }
        if self.require_distinct_intensities {
            let mut seen = BTreeSet::new();
            for obj in &self.objects {
                if !seen.insert(obj.intensity) {
                    return cfg(format!("intensity {} is used by more than one object", obj.intensity));
                }
            }
        }
        let c = &self.corruption;
        if !(c.jitter_sigma.is_finite() && c.jitter_sigma >= 0.0) {
            return cfg("jitter_sigma must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&c.dropout) {
            return cfg("dropout must lie in [0, 1]".into());
        }
        if !(c.clutter_rate.is_finite() && c.clutter_rate >= 0.0) {
            return cfg("clutter_rate must be finite and non-negative".into());
        }
        let score_ok = match c.score {
            ScoreModel::Constant { value } => (0.0..=1.0).contains(&value),
            ScoreModel::Uniform { low, high } => (0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&high) && low <= high,
        };
        if !score_ok {
            return cfg("score model bounds must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Exact box of object `idx` at frame `t`, clipped to the image.
    pub fn object_box(&self, idx: usize, t: u32) -> Option<BoundingBox> {
        let obj = &self.objects[idx];
        let [cx, cy] = obj.trajectory.center(t);
        let [w, h] = obj.size;
        let b = BoundingBox::new(cx - w / 2.0, cy - h / 2.0, w, h).ok()?;
        clip_to_image(&b, f64::from(self.width), f64::from(self.height))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub scenario: Scenario,
    pub images: Vec<GrayImage>,
    pub ground_truth: GroundTruth,
    pub detections: DetectionSet,
}

impl SyntheticSequence {
    /// `(frame, image, detections)` in frame order, ready for [`crate::Tracker::run`].
    pub fn frames(&self) -> impl Iterator<Item = (FrameIndex, &GrayImage, &[Detection])> {
        self.images
            .iter()
            .enumerate()
            .map(|(t, img)| (FrameIndex(t as u32), img, self.detections.get(FrameIndex(t as u32))))
    }

    pub fn manifest(&self, root: &Path) -> Result<SequenceManifest> {
        Ok(SequenceManifest {
            name: self.scenario.name.clone(),
            root: root.to_path_buf(),
            image_dir: "img1".into(),
            image_ext: ".png".into(),
            frame_rate: DEFAULT_FRAME_RATE,
            frame_count: self.scenario.frame_count,
            width: self.scenario.width,
            height: self.scenario.height,
            bit_depth: self.scenario.depth()?,
            modality: Modality::Thermal,
            warnings: Vec::new(),
        })
    }
}

pub fn generate(scn: &Scenario) -> Result<SyntheticSequence> {
    scn.validate()?;
    let depth = scn.depth()?;
    let c = &scn.corruption;
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let normal = Normal::new(0.0, c.jitter_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let clutter = if c.clutter_rate > 0.0 {
        Some(Poisson::new(c.clutter_rate).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };

    let mut images = Vec::with_capacity(scn.frame_count as usize);
    let mut gt = GroundTruth::new();
    let mut detections = DetectionSet::default();

    for t in 0..scn.frame_count {
        let frame = FrameIndex(t);
        let mut img = GrayImage::filled(scn.width, scn.height, depth, 0)?;
        let mut dets = Vec::new();
        for (i, obj) in scn.objects.iter().enumerate() {
            let Some(b) = scn.object_box(i, t) else {
                continue;
            };
            img.fill_rect(
                b.left().round() as i64,
                b.top().round() as i64,
                b.right().round() as i64,
                b.bottom().round() as i64,
                obj.intensity,
            );
            gt.insert(
                i as i64 + 1,
                1,
                frame,
                GroundTruthBox {
                    bbox: b,
                    visibility: 1.0,
                    ignore: false,
                },
            )?;

            let dropped = rng.random::<f64>() < c.dropout;
            let noise: [f64; 4] = std::array::from_fn(|_| normal.sample(&mut rng));
            let score = c.score.sample(&mut rng);
            if dropped {
                continue;
            }
            let bbox = BoundingBox::new(
                b.left() + noise[0],
                b.top() + noise[1],
                (b.width() + noise[2]).max(1.0),
                (b.height() + noise[3]).max(1.0),
            )?;
            dets.push(Detection {
                bbox,
                score,
                class_id: 1,
            });
        }

        let n_clutter = clutter.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..n_clutter {
            let ux: f64 = rng.random();
            let uy: f64 = rng.random();
            let size = if scn.objects.is_empty() {
                [16.0, 32.0]
            } else {
                scn.objects[rng.random_range(0..scn.objects.len())].size
            };
            let score = c.score.sample(&mut rng);
            let w = size[0].min(f64::from(scn.width));
            let h = size[1].min(f64::from(scn.height));
            let bbox = BoundingBox::new(
                ux * (f64::from(scn.width) - w),
                uy * (f64::from(scn.height) - h),
                w,
                h,
            )?;
            dets.push(Detection {
                bbox,
                score,
                class_id: 1,
            });
        }

        if scn.reverse_order_from.is_some_and(|k| t >= k) {
            dets.reverse();
        }
        if !dets.is_empty() {
            detections.frames.insert(frame, dets);
        }
        images.push(img);
    }

    Ok(SyntheticSequence {
        scenario: scn.clone(),
        images,
        ground_truth: gt,
        detections,
    })
}

/// Writes `seqinfo.ini`, `img1/*.png`, `gt/gt.txt` and `det/det.txt` under `dir`.
pub fn export(seq: &SyntheticSequence, dir: &Path) -> Result<SequenceManifest> {
    let manifest = seq.manifest(dir)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_text(&dir.join(io::MANIFEST_FILE), &manifest.to_ini())?;
    for (t, img) in seq.images.iter().enumerate() {
        io::save_png(&manifest.image_path(FrameIndex(t as u32)), img)?;
    }
    io::write_ground_truth(&manifest.gt_path(), &seq.ground_truth)?;
    io::write_detections(&manifest.det_path(), &seq.detections)?;
    Ok(manifest)
}

pub const PRESETS: &[&str] = &["crossing", "crossing-16", "linear", "stop-and-go", "convoy"];

/// Two equal-size objects whose tracks predict onto the same column at the
/// meeting frame, where they appear side by side. Each prediction overlaps
/// both detections equally, so motion alone cannot tell them apart.
fn crossing(seed: u64) -> Scenario {
    let (x0, y0, k) = (64.0, 192.0, 10u32);
    let v = 16.0;
    let half_w = 8.0;
    let obj = |intensity: u16, dir: f64, side: f64| ObjectSpec {
        intensity,
        size: [16.0, 32.0],
        trajectory: Trajectory::Crossing {
            meet: [x0, y0],
            frame: k,
            velocity: [0.0, dir * v],
            offset: [side * half_w, 0.0],
            exit_velocity: [0.0, 0.0],
        },
    };
    Scenario {
        name: "crossing".into(),
        seed,
        frame_count: 2 * k,
        width: 128,
        height: 384,
        bit_depth: 8,
        require_distinct_intensities: true,
        reverse_order_from: Some(k),
        corruption: Corruption::default(),
        objects: vec![obj(50, 1.0, -1.0), obj(200, -1.0, 1.0)],
    }
}

pub fn preset(name: &str, seed: u64) -> Result<Scenario> {
    let lin = |intensity: u16, start: [f64; 2], velocity: [f64; 2]| ObjectSpec {
        intensity,
        size: [16.0, 32.0],
        trajectory: Trajectory::Linear { start, velocity },
    };
    let scn = match name {
        "crossing" => crossing(seed),
        "crossing-16" => {
            let mut scn = Scenario {
                name: "crossing-16".into(),
                bit_depth: 16,
                ..crossing(seed)
            };
            scn.objects[0].intensity = 12_000;
            scn.objects[1].intensity = 52_000;
            scn
        }
        "linear" => Scenario {
            name: "linear".into(),
            seed,
            frame_count: 30,
            width: 320,
            height: 240,
            bit_depth: 8,
            require_distinct_intensities: true,
            reverse_order_from: None,
            corruption: Corruption {
                jitter_sigma: 0.5,
                dropout: 0.05,
                score: ScoreModel::Uniform { low: 0.65, high: 1.0 },
                clutter_rate: 0.0,
            },
            objects: vec![
                lin(60, [30.0, 50.0], [6.0, 1.0]),
                lin(120, [290.0, 120.0], [-5.0, 0.0]),
                lin(240, [160.0, 210.0], [2.0, -2.0]),
            ],
        },
        "stop-and-go" => Scenario {
            name: "stop-and-go".into(),
            seed,
            frame_count: 30,
            width: 320,
            height: 240,
            bit_depth: 16,
            require_distinct_intensities: true,
            reverse_order_from: None,
            corruption: Corruption {
                jitter_sigma: 0.5,
                dropout: 0.1,
                score: ScoreModel::Uniform { low: 0.65, high: 1.0 },
                clutter_rate: 0.0,
            },
            objects: vec![
                ObjectSpec {
                    intensity: 20_000,
                    size: [20.0, 40.0],
                    trajectory: Trajectory::StopAndGo {
                        start: [40.0, 60.0],
                        velocity: [8.0, 0.0],
                        go: 4,
                        stop: 3,
                    },
                },
                ObjectSpec {
                    intensity: 45_000,
                    size: [20.0, 40.0],
                    trajectory: Trajectory::StopAndGo {
                        start: [280.0, 170.0],
                        velocity: [-6.0, 0.0],
                        go: 3,
                        stop: 4,
                    },
                },
            ],
        },
        "convoy" => Scenario {
            name: "convoy".into(),
            seed,
            frame_count: 30,
            width: 320,
            height: 240,
            bit_depth: 8,
            require_distinct_intensities: true,
            reverse_order_from: None,
            corruption: Corruption {
                jitter_sigma: 0.75,
                dropout: 0.1,
                score: ScoreModel::Uniform { low: 0.5, high: 1.0 },
                clutter_rate: 0.3,
            },
            objects: vec![
                lin(90, [60.0, 80.0], [7.0, 0.0]),
                lin(150, [40.0, 80.0], [7.0, 0.0]),
                lin(210, [20.0, 80.0], [7.0, 0.0]),
                lin(250, [300.0, 160.0], [-7.0, 0.0]),
            ],
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; available presets: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(scn)
}

/// One scenario per preset, all with the same seed.
pub fn battery(seed: u64) -> Vec<Scenario> {
    PRESETS.iter().map(|p| preset(p, seed).expect("built-in preset")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::iou;

    #[test]
    fn noiseless_linear_detections_equal_ground_truth() {
        let scn = Scenario {
            name: "one".into(),
            seed: 1,
            frame_count: 10,
            width: 100,
            height: 100,
            bit_depth: 8,
            require_distinct_intensities: true,
            reverse_order_from: None,
            corruption: Corruption::default(),
            objects: vec![ObjectSpec {
                intensity: 99,
                size: [10.0, 20.0],
                trajectory: Trajectory::Linear {
                    start: [20.0, 30.0],
                    velocity: [3.0, 2.0],
                },
            }],
        };
        let seq = generate(&scn).unwrap();
        let track = &seq.ground_truth.tracks[&1];
        assert_eq!(track.boxes.len(), 10);
        for (frame, b) in &track.boxes {
            let dets = seq.detections.get(*frame);
            assert_eq!(dets.len(), 1);
            assert_eq!(dets[0].bbox, b.bbox);
        }
        let img = &seq.images[0];
        assert_eq!(img.get(20, 30), 99);
        assert_eq!(img.get(14, 30), 0);
        assert_eq!(img.get(15, 20), 99);
    }

    #[test]
    fn dropout_subset_is_deterministic() {
        let mut scn = preset("linear", 7).unwrap();
        scn.corruption.dropout = 0.2;
        let a = generate(&scn).unwrap();
        let b = generate(&scn).unwrap();
        assert_eq!(a, b);
        let total: usize = a.detections.frames.values().map(Vec::len).sum();
        assert!(total < 90);
        scn.seed = 8;
        assert_ne!(generate(&scn).unwrap().detections, a.detections);
    }

    #[test]
    fn repeated_intensity_is_rejected_when_distinct_required() {
        let mut scn = preset("linear", 0).unwrap();
        scn.objects[1].intensity = scn.objects[0].intensity;
        assert!(matches!(generate(&scn), Err(Error::Config(_))));
        scn.require_distinct_intensities = false;
        assert!(generate(&scn).is_ok());
    }

    #[test]
    fn unknown_preset_lists_available() {
        let err = preset("nope", 0).unwrap_err().to_string();
        for p in PRESETS {
            assert!(err.contains(p));
        }
    }

    #[test]
    fn crossing_frame_detections_mirror_the_prediction_column() {
        let scn = preset("crossing", 0).unwrap();
        let Trajectory::Crossing { meet, frame, .. } = scn.objects[0].trajectory else {
            unreachable!()
        };
        let seq = generate(&scn).unwrap();
        let dets = seq.detections.get(FrameIndex(frame));
        assert_eq!(dets.len(), 2);
        let probe = BoundingBox::new(meet[0] - 8.0, meet[1] - 20.0, 16.0, 32.0).unwrap();
        assert_eq!(iou(&probe, &dets[0].bbox), iou(&probe, &dets[1].bbox));
        assert!(iou(&dets[0].bbox, &dets[1].bbox) == 0.0);
    }

    #[test]
    fn scenario_toml_round_trip() {
        for scn in battery(3) {
            let text = scn.to_toml_string();
            assert_eq!(Scenario::from_toml_str(&text).unwrap(), scn);
        }
    }
}
