//! Tracklet lifecycle and the per-frame association loop.
//!
//! Each frame runs a BYTE-style cascade: high-confidence detections are
//! matched first against confirmed and lost tracks on the fused
//! motion/thermal similarity, the remaining confirmed tracks then get a
//! second chance against low-confidence detections. The `OcSort` variant adds
//! an observation-centric recovery pass and re-fits the filter along a
//! straight virtual trajectory whenever a lost track is re-acquired.

use serde::{Deserialize, Serialize};

use crate::association::{
    fuse, histogram_for_box, similarity_from_histograms, solve_assignment, Histogram, HistogramConfig,
    SimilarityMatrix, TrackRoiSource,
};
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox, Detection, FrameIndex, GrayImage, TrackId};
use crate::motion::{motion_similarity_matrix, KalmanConfig, KalmanFilter, KalmanState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Byte,
    /// Observation-centric recovery on top of BYTE association. Labeled
    /// "ocsort-style": momentum-based direction costs are not modeled.
    OcSort,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Byte => "byte",
            Variant::OcSort => "ocsort-style",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "byte" => Ok(Variant::Byte),
            "ocsort" | "ocsort-style" => Ok(Variant::OcSort),
            other => Err(Error::Config(format!(
                "unknown variant '{other}' (expected byte or ocsort)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub variant: Variant,
    /// Weight of motion similarity in the fused score.
    pub alpha: f64,
    pub high_thresh: f64,
    pub low_thresh: f64,
    pub match_thresh_first: f64,
    pub match_thresh_second: f64,
    /// Minimum last-observation IoU for the recovery pass (`OcSort` only).
    pub recovery_thresh: f64,
    pub new_track_thresh: f64,
    pub max_lost_frames: u32,
    pub min_hits: u32,
    pub use_thermal_in_second_stage: bool,
    pub histogram: HistogramConfig,
    pub kalman: KalmanConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Byte,
            alpha: 0.3,
            high_thresh: 0.6,
            low_thresh: 0.1,
            match_thresh_first: 0.2,
            match_thresh_second: 0.5,
            recovery_thresh: 0.3,
            new_track_thresh: 0.7,
            max_lost_frames: 30,
            min_hits: 2,
            use_thermal_in_second_stage: false,
            histogram: HistogramConfig::default(),
            kalman: KalmanConfig::default(),
        }
    }
}

impl TrackerConfig {
    /// Byte association with the thermal weight tuned for it (alpha 0.3).
    pub fn paper_byte() -> Self {
        Self::default()
    }

    /// Observation-centric variant with alpha 0.8.
    pub fn paper_ocsort() -> Self {
        Self {
            variant: Variant::OcSort,
            alpha: 0.8,
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-byte" => Ok(Self::paper_byte()),
            "paper-ocsort" => Ok(Self::paper_ocsort()),
            other => Err(Error::Config(format!(
                "unknown tracker preset '{other}' (available: paper-byte, paper-ocsort)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("high_thresh", self.high_thresh)?;
        unit("low_thresh", self.low_thresh)?;
        unit("match_thresh_first", self.match_thresh_first)?;
        unit("match_thresh_second", self.match_thresh_second)?;
        unit("recovery_thresh", self.recovery_thresh)?;
        unit("new_track_thresh", self.new_track_thresh)?;
        if self.low_thresh > self.high_thresh {
            return Err(Error::Config(format!(
                "low_thresh {} exceeds high_thresh {}",
                self.low_thresh, self.high_thresh
            )));
        }
        if self.min_hits == 0 {
            return Err(Error::Config("min_hits must be at least 1".into()));
        }
        let k = &self.kalman;
        if !(k.std_weight_position > 0.0 && k.std_weight_velocity > 0.0) {
            return Err(Error::Config("kalman noise weights must be positive".into()));
        }
        self.histogram.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Lost,
    Removed,
}

#[derive(Debug, Clone)]
pub struct Tracklet {
    pub id: TrackId,
    pub kalman: KalmanState,
    pub status: TrackStatus,
    pub last_observation: BoundingBox,
    pub last_observed_frame: FrameIndex,
    /// Posterior right after the last matched update.
    pub observed_state: KalmanState,
    pub hits: u32,
    pub frames_since_update: u32,
    pub score: f64,
    /// Appearance cached by the cue at the last matched update, if it keeps one.
    pub histogram: Option<Histogram>,
}

impl Tracklet {
    pub fn predicted_box(&self) -> BoundingBox {
        self.kalman.bbox()
    }
}

/// One confirmed output box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: FrameIndex,
    pub id: TrackId,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// Source of the non-motion similarity fused with IoU.
pub trait AppearanceCue {
    /// Returns `None` when the cue contributes nothing, in which case the
    /// motion similarity is used as-is.
    fn similarity(
        &self,
        tracks: &[&Tracklet],
        dets: &[&Detection],
        img: &GrayImage,
    ) -> Result<Option<SimilarityMatrix>>;

    /// Called after `track` has been updated with `det`.
    fn observe(&self, track: &mut Tracklet, det: &Detection, img: &GrayImage) -> Result<()>;
}

/// ROI intensity histograms compared with the Bhattacharyya coefficient.
#[derive(Debug, Clone, Default)]
pub struct ThermalCue {
    pub cfg: HistogramConfig,
}

impl AppearanceCue for ThermalCue {
    fn similarity(
        &self,
        tracks: &[&Tracklet],
        dets: &[&Detection],
        img: &GrayImage,
    ) -> Result<Option<SimilarityMatrix>> {
        let track_hists = tracks
            .iter()
            .map(|t| match self.cfg.track_roi {
                TrackRoiSource::Predicted => histogram_for_box(img, &t.predicted_box(), &self.cfg),
                TrackRoiSource::LastObservation => Ok(t.histogram.clone().unwrap_or_else(|| {
                    Histogram::empty(self.cfg.bins_for(img.depth()), img.depth().range_max())
                })),
            })
            .collect::<Result<Vec<_>>>()?;
        let det_hists = dets
            .iter()
            .map(|d| histogram_for_box(img, &d.bbox, &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        similarity_from_histograms(&track_hists, &det_hists).map(Some)
    }

    fn observe(&self, track: &mut Tracklet, det: &Detection, img: &GrayImage) -> Result<()> {
        if self.cfg.track_roi == TrackRoiSource::LastObservation {
            track.histogram = Some(histogram_for_box(img, &det.bbox, &self.cfg)?);
        }
        Ok(())
    }
}

/// No appearance term: the tracker degenerates to motion-only association.
#[derive(Debug, Clone, Copy, Default)]
pub struct MotionOnly;

impl AppearanceCue for MotionOnly {
    fn similarity(&self, _: &[&Tracklet], _: &[&Detection], _: &GrayImage) -> Result<Option<SimilarityMatrix>> {
        Ok(None)
    }

    fn observe(&self, _: &mut Tracklet, _: &Detection, _: &GrayImage) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Tracker<C: AppearanceCue = ThermalCue> {
    cfg: TrackerConfig,
    kf: KalmanFilter,
    cue: C,
    tracks: Vec<Tracklet>,
    next_id: u64,
    last_frame: Option<FrameIndex>,
    frames_processed: u32,
    records: Vec<TrackRecord>,
}

impl Tracker<ThermalCue> {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        let cue = ThermalCue { cfg: cfg.histogram };
        Self::with_cue(cfg, cue)
    }
}

impl<C: AppearanceCue> Tracker<C> {
    pub fn with_cue(cfg: TrackerConfig, cue: C) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            kf: KalmanFilter::new(cfg.kalman),
            cfg,
            cue,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            frames_processed: 0,
            records: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Live (not removed) tracks, ordered by id.
    pub fn tracks(&self) -> &[Tracklet] {
        &self.tracks
    }

    pub fn next_id(&self) -> TrackId {
        TrackId(self.next_id)
    }

    pub fn frames_processed(&self) -> u32 {
        self.frames_processed
    }

    /// Processes one frame and returns the confirmed tracks updated in it.
    ///
    /// Frames must be strictly increasing; a gap of `k` frames advances the
    /// motion model `k` steps.
    pub fn step(
        &mut self,
        frame: FrameIndex,
        img: &GrayImage,
        dets: &[Detection],
    ) -> Result<Vec<TrackRecord>> {
        let steps = match self.last_frame {
            Some(last) if frame <= last => {
                return Err(Error::Sequencing {
                    last: last.one_based(),
                    got: frame.one_based(),
                })
            }
            Some(last) => frame.0 - last.0,
            None => 1,
        };
        self.last_frame = Some(frame);
        self.frames_processed += 1;

        for track in &mut self.tracks {
            for _ in 0..steps {
                if track.status == TrackStatus::Lost {
                    track.kalman.mean[7] = 0.0;
                }
                track.kalman = self.kf.predict(&track.kalman);
                track.frames_since_update += 1;
            }
        }

        let mut high = Vec::new();
        let mut low = Vec::new();
        for (j, d) in dets.iter().enumerate() {
            if d.score >= self.cfg.high_thresh {
                high.push(j);
            } else if d.score >= self.cfg.low_thresh {
                low.push(j);
            }
        }

        let mut matched_track = vec![false; self.tracks.len()];
        let mut det_used = vec![false; dets.len()];
        let mut matches: Vec<(usize, usize)> = Vec::new();

        // First association: confirmed and lost tracks against confident detections.
        let pool: Vec<usize> = self.live_indices(|s| matches!(s, TrackStatus::Confirmed | TrackStatus::Lost));
        let sim = self.similarity(&pool, &high, dets, img, true)?;
        let first = solve_assignment(&sim, self.cfg.match_thresh_first);
        for &(ti, di) in &first.matches {
            self.claim(pool[ti], high[di], &mut matched_track, &mut det_used, &mut matches);
        }

        // Second association: still-unmatched confirmed tracks against low-confidence detections.
        let remaining: Vec<usize> = first
            .unmatched_tracks
            .iter()
            .map(|&ti| pool[ti])
            .filter(|&t| self.tracks[t].status == TrackStatus::Confirmed)
            .collect();
        let sim = self.similarity(&remaining, &low, dets, img, self.cfg.use_thermal_in_second_stage)?;
        let second = solve_assignment(&sim, self.cfg.match_thresh_second);
        for &(ti, di) in &second.matches {
            self.claim(remaining[ti], low[di], &mut matched_track, &mut det_used, &mut matches);
        }

        if self.cfg.variant == Variant::OcSort {
            // Recovery: unmatched tracks against leftover confident detections,
            // scored against the last real observation instead of the prediction.
            let stale: Vec<usize> = pool.iter().copied().filter(|&t| !matched_track[t]).collect();
            let leftover: Vec<usize> = high.iter().copied().filter(|&j| !det_used[j]).collect();
            let sim = SimilarityMatrix::from_fn(stale.len(), leftover.len(), |i, j| {
                iou(&self.tracks[stale[i]].last_observation, &dets[leftover[j]].bbox)
            });
            let recovered = solve_assignment(&sim, self.cfg.recovery_thresh);
            for &(ti, di) in &recovered.matches {
                self.claim(stale[ti], leftover[di], &mut matched_track, &mut det_used, &mut matches);
            }
        }

        // Tentative tracks compete for whatever confident detections are left.
        let tentative = self.live_indices(|s| s == TrackStatus::Tentative);
        let leftover: Vec<usize> = high.iter().copied().filter(|&j| !det_used[j]).collect();
        let sim = self.similarity(&tentative, &leftover, dets, img, true)?;
        let unconfirmed = solve_assignment(&sim, self.cfg.match_thresh_first);
        for &(ti, di) in &unconfirmed.matches {
            self.claim(tentative[ti], leftover[di], &mut matched_track, &mut det_used, &mut matches);
        }

        for &(t, j) in &matches {
            self.apply_match(t, &dets[j], frame, img)?;
        }

        for (t, track) in self.tracks.iter_mut().enumerate() {
            if matched_track[t] {
                continue;
            }
            match track.status {
                TrackStatus::Tentative => track.status = TrackStatus::Removed,
                TrackStatus::Confirmed => track.status = TrackStatus::Lost,
                TrackStatus::Lost | TrackStatus::Removed => {}
            }
            if track.status == TrackStatus::Lost && track.frames_since_update > self.cfg.max_lost_frames {
                track.status = TrackStatus::Removed;
            }
        }
        self.tracks.retain(|t| t.status != TrackStatus::Removed);

        for &j in &high {
            if !det_used[j] && dets[j].score >= self.cfg.new_track_thresh {
                self.spawn(&dets[j], frame, img)?;
            }
        }

        let out: Vec<TrackRecord> = self
            .tracks
            .iter()
            .filter(|t| t.status == TrackStatus::Confirmed && t.frames_since_update == 0)
            .map(|t| TrackRecord {
                frame,
                id: t.id,
                bbox: t.kalman.bbox(),
                score: t.score,
            })
            .collect();
        self.records.extend_from_slice(&out);
        Ok(out)
    }

    /// Steps through every frame in order and returns [`Tracker::finish`].
    pub fn run<'a, I>(mut self, frames: I) -> Result<Vec<TrackRecord>>
    where
        I: IntoIterator<Item = (FrameIndex, &'a GrayImage, &'a [Detection])>,
    {
        for (frame, img, dets) in frames {
            self.step(frame, img, dets)?;
        }
        Ok(self.finish())
    }

    /// All confirmed outputs so far, ordered by frame then id.
    pub fn finish(self) -> Vec<TrackRecord> {
        let mut records = self.records;
        records.sort_by_key(|r| (r.frame, r.id));
        records
    }

    fn live_indices(&self, keep: impl Fn(TrackStatus) -> bool) -> Vec<usize> {
        (0..self.tracks.len()).filter(|&t| keep(self.tracks[t].status)).collect()
    }

    fn claim(
        &self,
        track: usize,
        det: usize,
        matched_track: &mut [bool],
        det_used: &mut [bool],
        matches: &mut Vec<(usize, usize)>,
    ) {
        debug_assert!(!matched_track[track] && !det_used[det]);
        matched_track[track] = true;
        det_used[det] = true;
        matches.push((track, det));
    }

    fn similarity(
        &self,
        track_idx: &[usize],
        det_idx: &[usize],
        dets: &[Detection],
        img: &GrayImage,
        with_appearance: bool,
    ) -> Result<SimilarityMatrix> {
        let predicted: Vec<BoundingBox> = track_idx.iter().map(|&t| self.tracks[t].predicted_box()).collect();
        let selected: Vec<Detection> = det_idx.iter().map(|&j| dets[j]).collect();
        let motion = motion_similarity_matrix(&predicted, &selected);
        if !with_appearance || track_idx.is_empty() || det_idx.is_empty() {
            return Ok(motion);
        }
        let tracks: Vec<&Tracklet> = track_idx.iter().map(|&t| &self.tracks[t]).collect();
        let det_refs: Vec<&Detection> = selected.iter().collect();
        match self.cue.similarity(&tracks, &det_refs, img)? {
            Some(appearance) => fuse(&motion, &appearance, self.cfg.alpha),
            None => Ok(motion),
        }
    }

    fn apply_match(&mut self, t: usize, det: &Detection, frame: FrameIndex, img: &GrayImage) -> Result<()> {
        let reacquired = self.tracks[t].status == TrackStatus::Lost;
        let track = &mut self.tracks[t];
        track.kalman = if self.cfg.variant == Variant::OcSort && reacquired {
            refit_along_virtual_path(&self.kf, track, det, frame)?
        } else {
            self.kf.update(&track.kalman, &det.bbox)?
        };
        track.hits += 1;
        track.status = match track.status {
            TrackStatus::Tentative if track.hits < self.cfg.min_hits => TrackStatus::Tentative,
            _ => TrackStatus::Confirmed,
        };
        track.frames_since_update = 0;
        track.last_observation = det.bbox;
        track.last_observed_frame = frame;
        track.observed_state = track.kalman.clone();
        track.score = det.score;
        self.cue.observe(track, det, img)
    }

    fn spawn(&mut self, det: &Detection, frame: FrameIndex, img: &GrayImage) -> Result<()> {
        let kalman = match self.kf.initiate(&det.bbox) {
            Ok(k) => k,
            // Zero-area detections cannot seed a filter.
            Err(Error::InvalidMeasurement(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        // Tracks born on the first processed frame skip the tentative phase.
        let status = if self.cfg.min_hits <= 1 || self.frames_processed == 1 {
            TrackStatus::Confirmed
        } else {
            TrackStatus::Tentative
        };
        let mut track = Tracklet {
            id: TrackId(self.next_id),
            observed_state: kalman.clone(),
            kalman,
            status,
            last_observation: det.bbox,
            last_observed_frame: frame,
            hits: 1,
            frames_since_update: 0,
            score: det.score,
            histogram: None,
        };
        self.next_id += 1;
        self.cue.observe(&mut track, det, img)?;
        self.tracks.push(track);
        Ok(())
    }
}

/// Restarts from the state at the last observation and re-runs the filter on
/// boxes interpolated linearly between that observation and `det`.
fn refit_along_virtual_path(
    kf: &KalmanFilter,
    track: &Tracklet,
    det: &Detection,
    frame: FrameIndex,
) -> Result<KalmanState> {
    let gap = frame.0.saturating_sub(track.last_observed_frame.0).max(1);
    let mut state = track.observed_state.clone();
    for k in 1..gap {
        let virtual_box = track.last_observation.lerp(&det.bbox, f64::from(k) / f64::from(gap));
        state = kf.predict(&state);
        state = kf.update(&state, &virtual_box)?;
    }
    state = kf.predict(&state);
    kf.update(&state, &det.bbox)
}
