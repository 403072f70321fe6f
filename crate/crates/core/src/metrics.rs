//! CLEAR-MOT and identity metrics.
//!
//! Per frame, ground truth and hypotheses are matched on IoU: a pair that was
//! matched before and still overlaps by at least the threshold is kept, the
//! rest go through an optimal assignment. Identity scores (IDF1/IDP/IDR) come
//! from a single global matching of whole trajectories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::association::{lap, solve_assignment, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox, FrameIndex, TrackId};
use crate::tracker::TrackRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub bbox: BoundingBox,
    pub visibility: f64,
    /// Rows with zero confidence: neither counted nor penalized.
    pub ignore: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthTrack {
    pub id: i64,
    pub class_id: i32,
    pub boxes: BTreeMap<FrameIndex, GroundTruthBox>,
}

/// Ground-truth trajectories keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub tracks: BTreeMap<i64, GroundTruthTrack>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one box; a second box for the same `(id, frame)` is an error.
    pub fn insert(&mut self, id: i64, class_id: i32, frame: FrameIndex, entry: GroundTruthBox) -> Result<()> {
        let track = self.tracks.entry(id).or_insert_with(|| GroundTruthTrack {
            id,
            class_id,
            boxes: BTreeMap::new(),
        });
        if track.boxes.insert(frame, entry).is_some() {
            return Err(Error::Input(format!(
                "duplicate ground truth for id {id} in frame {}",
                frame.one_based()
            )));
        }
        Ok(())
    }

    /// Number of boxes that count towards the metrics.
    pub fn count(&self) -> usize {
        self.tracks
            .values()
            .flat_map(|t| t.boxes.values())
            .filter(|b| !b.ignore)
            .count()
    }

    pub fn frames(&self) -> BTreeSet<FrameIndex> {
        self.tracks.values().flat_map(|t| t.boxes.keys().copied()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub iou_thresh: f64,
    /// Ground truth below this visibility is treated like an ignore row.
    pub min_visibility: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresh: 0.5,
            min_visibility: None,
        }
    }
}

/// Raw event counts. Pooling sequences means summing these.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalCounts {
    pub gt_count: u64,
    pub hyp_count: u64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub id_switches: u64,
    pub matched_pairs: u64,
    /// Sum of `1 - IoU` over matches in units of 2^-64, so that pooling is
    /// exact and independent of summation order.
    pub match_distance_fixed: u128,
    pub idtp: u64,
    pub idfp: u64,
    pub idfn: u64,
}

const DISTANCE_SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

impl EvalCounts {
    pub fn sum_match_distance(&self) -> f64 {
        self.match_distance_fixed as f64 / DISTANCE_SCALE
    }

    fn add_match_distance(&mut self, d: f64) {
        self.match_distance_fixed += (d.clamp(0.0, 1.0) * DISTANCE_SCALE).round() as u128;
    }
}

impl std::ops::Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts {
            gt_count: self.gt_count + o.gt_count,
            hyp_count: self.hyp_count + o.hyp_count,
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            id_switches: self.id_switches + o.id_switches,
            matched_pairs: self.matched_pairs + o.matched_pairs,
            match_distance_fixed: self.match_distance_fixed + o.match_distance_fixed,
            idtp: self.idtp + o.idtp,
            idfp: self.idfp + o.idfp,
            idfn: self.idfn + o.idfn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ratio {
    Idf1,
    Idp,
    Idr,
    Rcll,
    Prcn,
    Mota,
    Motp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub rcll: f64,
    pub prcn: f64,
    pub mota: f64,
    /// Mean `1 - IoU` over matched pairs.
    pub motp: f64,
    pub counts: EvalCounts,
    /// Ratios whose denominator was zero; they are reported as 0.
    pub undefined: BTreeSet<Ratio>,
}

impl EvalReport {
    pub fn from_counts(c: EvalCounts) -> Self {
        let mut undefined = BTreeSet::new();
        let mut ratio = |which: Ratio, num: f64, den: f64| {
            if den > 0.0 {
                num / den
            } else {
                undefined.insert(which);
                0.0
            }
        };
        let f = |v: u64| v as f64;
        let idf1 = ratio(Ratio::Idf1, 2.0 * f(c.idtp), 2.0 * f(c.idtp) + f(c.idfp) + f(c.idfn));
        let idp = ratio(Ratio::Idp, f(c.idtp), f(c.idtp + c.idfp));
        let idr = ratio(Ratio::Idr, f(c.idtp), f(c.idtp + c.idfn));
        let rcll = ratio(Ratio::Rcll, f(c.tp), f(c.tp + c.fn_));
        let prcn = ratio(Ratio::Prcn, f(c.tp), f(c.tp + c.fp));
        let errors = ratio(Ratio::Mota, f(c.fn_ + c.fp + c.id_switches), f(c.gt_count));
        let motp = ratio(Ratio::Motp, c.sum_match_distance(), f(c.matched_pairs));
        let mota = if undefined.contains(&Ratio::Mota) { 0.0 } else { 1.0 - errors };
        Self {
            idf1,
            idp,
            idr,
            rcll,
            prcn,
            mota,
            motp,
            counts: c,
            undefined,
        }
    }
}

/// Scores one sequence of tracker output against its ground truth.
pub fn evaluate_sequence(gt: &GroundTruth, hyp: &[TrackRecord], cfg: &EvalConfig) -> Result<EvalReport> {
    let thresh = cfg.iou_thresh;

    let mut hyp_frames: BTreeMap<FrameIndex, Vec<(TrackId, BoundingBox)>> = BTreeMap::new();
    for r in hyp {
        hyp_frames.entry(r.frame).or_default().push((r.id, r.bbox));
    }
    for (frame, entries) in &mut hyp_frames {
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Input(format!(
                "hypothesis id {} appears twice in frame {}",
                w[0].0,
                frame.one_based()
            )));
        }
    }

    // (gt id, box, counted)
    let mut gt_frames: BTreeMap<FrameIndex, Vec<(i64, BoundingBox, bool)>> = BTreeMap::new();
    for track in gt.tracks.values() {
        for (&frame, b) in &track.boxes {
            let visible = cfg.min_visibility.is_none_or(|v| b.visibility >= v);
            gt_frames
                .entry(frame)
                .or_default()
                .push((track.id, b.bbox, !b.ignore && visible));
        }
    }

    let frames: BTreeSet<FrameIndex> = gt_frames.keys().chain(hyp_frames.keys()).copied().collect();
    let mut counts = EvalCounts::default();
    let mut last_match: BTreeMap<i64, TrackId> = BTreeMap::new();
    // Identity bookkeeping over counted entries only.
    let mut gt_len: BTreeMap<i64, u64> = BTreeMap::new();
    let mut hyp_len: BTreeMap<TrackId, u64> = BTreeMap::new();
    let mut overlap: BTreeMap<(i64, TrackId), u64> = BTreeMap::new();

    let empty_gt = Vec::new();
    let empty_hyp = Vec::new();
    for frame in frames {
        let gts = gt_frames.get(&frame).unwrap_or(&empty_gt);
        let hyps = hyp_frames.get(&frame).unwrap_or(&empty_hyp);

        // Hypotheses explained by ignored ground truth drop out entirely.
        let ignored: Vec<&BoundingBox> = gts.iter().filter(|g| !g.2).map(|g| &g.1).collect();
        let mut hyp_live = vec![true; hyps.len()];
        if !ignored.is_empty() && !hyps.is_empty() {
            let sim = gated_iou(&ignored, &hyps.iter().map(|h| &h.1).collect::<Vec<_>>(), thresh);
            for (_, j) in solve_assignment(&sim, thresh).matches {
                hyp_live[j] = false;
            }
        }
        let active: Vec<&(i64, BoundingBox, bool)> = gts.iter().filter(|g| g.2).collect();
        let live: Vec<usize> = (0..hyps.len()).filter(|&j| hyp_live[j]).collect();

        counts.gt_count += active.len() as u64;
        counts.hyp_count += live.len() as u64;
        for g in &active {
            *gt_len.entry(g.0).or_default() += 1;
        }
        for &j in &live {
            *hyp_len.entry(hyps[j].0).or_default() += 1;
        }
        for g in &active {
            for &j in &live {
                if iou(&g.1, &hyps[j].1) >= thresh {
                    *overlap.entry((g.0, hyps[j].0)).or_default() += 1;
                }
            }
        }

        let mut gt_done = vec![false; active.len()];
        let mut hyp_done = vec![false; hyps.len()];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();

        // Keep last frame's correspondences while they still overlap.
        for (gi, g) in active.iter().enumerate() {
            let Some(prev) = last_match.get(&g.0) else { continue };
            if let Some(&j) = live.iter().find(|&&j| hyps[j].0 == *prev && !hyp_done[j]) {
                let o = iou(&g.1, &hyps[j].1);
                if o >= thresh {
                    gt_done[gi] = true;
                    hyp_done[j] = true;
                    pairs.push((gi, j, o));
                }
            }
        }

        let open_gt: Vec<usize> = (0..active.len()).filter(|&i| !gt_done[i]).collect();
        let open_hyp: Vec<usize> = live.iter().copied().filter(|&j| !hyp_done[j]).collect();
        let sim = gated_iou(
            &open_gt.iter().map(|&i| &active[i].1).collect::<Vec<_>>(),
            &open_hyp.iter().map(|&j| &hyps[j].1).collect::<Vec<_>>(),
            thresh,
        );
        for (a, b) in solve_assignment(&sim, thresh).matches {
            let (gi, j) = (open_gt[a], open_hyp[b]);
            gt_done[gi] = true;
            hyp_done[j] = true;
            pairs.push((gi, j, sim.get(a, b)));
        }

        pairs.sort_by_key(|p| p.0);
        for (gi, j, o) in pairs {
            let gt_id = active[gi].0;
            let hyp_id = hyps[j].0;
            counts.tp += 1;
            counts.matched_pairs += 1;
            counts.add_match_distance(1.0 - o);
            if last_match.get(&gt_id).is_some_and(|&prev| prev != hyp_id) {
                counts.id_switches += 1;
            }
            last_match.insert(gt_id, hyp_id);
        }
        counts.fn_ += gt_done.iter().filter(|d| !**d).count() as u64;
        counts.fp += live.iter().filter(|&&j| !hyp_done[j]).count() as u64;
    }

    counts.idtp = identity_true_positives(&gt_len, &hyp_len, &overlap);
    counts.idfn = counts.gt_count - counts.idtp;
    counts.idfp = counts.hyp_count - counts.idtp;
    Ok(EvalReport::from_counts(counts))
}

/// IoU where it reaches `thresh`, zero elsewhere.
fn gated_iou(rows: &[&BoundingBox], cols: &[&BoundingBox], thresh: f64) -> SimilarityMatrix {
    SimilarityMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let o = iou(rows[i], cols[j]);
        if o >= thresh {
            o
        } else {
            0.0
        }
    })
}

/// Maximum total co-occurrence over one-to-one trajectory pairings.
fn identity_true_positives(
    gt_len: &BTreeMap<i64, u64>,
    hyp_len: &BTreeMap<TrackId, u64>,
    overlap: &BTreeMap<(i64, TrackId), u64>,
) -> u64 {
    let gt_ids: Vec<i64> = gt_len.keys().copied().collect();
    let hyp_ids: Vec<TrackId> = hyp_len.keys().copied().collect();
    if gt_ids.is_empty() || hyp_ids.is_empty() || overlap.is_empty() {
        return 0;
    }
    let n = gt_ids.len().max(hyp_ids.len());
    let mut cost = vec![0.0; n * n];
    for (i, g) in gt_ids.iter().enumerate() {
        for (j, h) in hyp_ids.iter().enumerate() {
            cost[i * n + j] = -(overlap.get(&(*g, *h)).copied().unwrap_or(0) as f64);
        }
    }
    let assignment = lap::solve_square(n, &cost);
    assignment
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < gt_ids.len() && j < hyp_ids.len())
        .map(|(i, &j)| overlap.get(&(gt_ids[i], hyp_ids[j])).copied().unwrap_or(0))
        .sum()
}

/// Pools raw counts across sequences and recomputes every ratio from them.
pub fn aggregate(reports: &[EvalReport]) -> Result<EvalReport> {
    let (first, rest) = reports
        .split_first()
        .ok_or_else(|| Error::Input("cannot aggregate an empty list of reports".into()))?;
    let pooled = rest.iter().fold(first.counts, |acc, r| acc + r.counts);
    Ok(EvalReport::from_counts(pooled))
}

pub const METRICS_HEADER: &str = "sequence,IDF1,IDP,IDR,Rcll,Prcn,MOTA,MOTP";

/// One row per sequence followed by `OVERALL`.
pub fn metrics_csv(rows: &[(String, EvalReport)], overall: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for (name, r) in rows.iter().map(|(n, r)| (n.as_str(), r)).chain(std::iter::once(("OVERALL", overall))) {
        let _ = writeln!(
            out,
            "{name},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.idf1, r.idp, r.idr, r.rcll, r.prcn, r.mota, r.motp
        );
    }
    out
}
