use std::collections::BTreeSet;

use thermot::association::{thermal_similarity_matrix, HistogramConfig, TrackRoiSource};
use thermot::metrics::{evaluate_sequence, EvalConfig, EvalReport};
use thermot::motion::KalmanFilter;
use thermot::synth::{self, SyntheticSequence, Trajectory};
use thermot::{iou, FrameIndex, Tracker, TrackerConfig, Variant};

fn crossing_frame(seq: &SyntheticSequence) -> u32 {
    match seq.scenario.objects[0].trajectory {
        Trajectory::Crossing { frame, .. } => frame,
        _ => unreachable!(),
    }
}

fn evaluate(seq: &SyntheticSequence, cfg: TrackerConfig) -> EvalReport {
    let records = Tracker::new(cfg).unwrap().run(seq.frames()).unwrap();
    evaluate_sequence(&seq.ground_truth, &records, &EvalConfig::default()).unwrap()
}

#[test]
fn crossing_predictions_overlap_both_detections_equally() {
    for name in ["crossing", "crossing-16"] {
        let seq = synth::generate(&synth::preset(name, 0).unwrap()).unwrap();
        let k = crossing_frame(&seq);
        let kf = KalmanFilter::default();
        let at_k = seq.detections.get(FrameIndex(k));
        assert_eq!(at_k.len(), 2);
        for id in [1i64, 2] {
            let boxes = &seq.ground_truth.tracks[&id].boxes;
            let mut state = kf.initiate(&boxes[&FrameIndex(0)].bbox).unwrap();
            for f in 1..k {
                state = kf.predict(&state);
                state = kf.update(&state, &boxes[&FrameIndex(f)].bbox).unwrap();
            }
            let predicted = kf.predict(&state).bbox();
            let (a, b) = (iou(&predicted, &at_k[0].bbox), iou(&predicted, &at_k[1].bbox));
            assert!((a - b).abs() < 1e-6, "{name} track {id}: {a} vs {b}");
            assert!(a > 0.2, "{name}: overlap {a} too small to pass the first-stage gate");
        }
    }
}

#[test]
fn crossing_thermal_matrix_is_exactly_identity_like() {
    let seq = synth::generate(&synth::preset("crossing", 0).unwrap()).unwrap();
    let k = FrameIndex(crossing_frame(&seq));
    let gt: Vec<_> = [1i64, 2].iter().map(|id| seq.ground_truth.tracks[id].boxes[&k].bbox).collect();
    let dets: Vec<_> = seq.detections.get(k).iter().map(|d| d.bbox).collect();
    let m = thermal_similarity_matrix(&gt, &dets, &seq.images[k.0 as usize], &HistogramConfig::default()).unwrap();
    // Detections are listed in reverse object order at the crossing frame.
    assert_eq!(m.values(), &[0.0, 1.0, 1.0, 0.0]);
}

#[test]
fn crossing_needs_cached_histograms() {
    let seq = synth::generate(&synth::preset("crossing", 0).unwrap()).unwrap();
    for variant in [Variant::Byte, Variant::OcSort] {
        let mut cfg = TrackerConfig {
            variant,
            alpha: 0.3,
            ..TrackerConfig::default()
        };
        // Cut at the prediction, the track ROI straddles both objects equally.
        assert_eq!(evaluate(&seq, cfg.clone()).idf1, 0.5);
        cfg.histogram.track_roi = TrackRoiSource::LastObservation;
        let r = evaluate(&seq, cfg);
        assert_eq!((r.idf1, r.counts.id_switches), (1.0, 0));
    }
}

#[test]
fn noiseless_presets_are_tracked_perfectly() {
    let scn = synth::Scenario {
        corruption: Default::default(),
        ..synth::preset("linear", 0).unwrap()
    };
    let seq = synth::generate(&scn).unwrap();
    for cfg in [TrackerConfig::paper_byte(), TrackerConfig::paper_ocsort()] {
        let r = evaluate(&seq, cfg);
        assert_eq!((r.mota, r.idf1, r.counts.id_switches), (1.0, 1.0, 0));
    }
}

#[test]
fn dropouts_do_not_fragment_identities() {
    let mut scn = synth::preset("linear", 21).unwrap();
    scn.corruption.dropout = 0.2;
    scn.corruption.jitter_sigma = 0.0;
    let seq = synth::generate(&scn).unwrap();
    for cfg in [TrackerConfig::paper_byte(), TrackerConfig::paper_ocsort()] {
        let records = Tracker::new(cfg).unwrap().run(seq.frames()).unwrap();
        let ids: BTreeSet<_> = records.iter().map(|r| r.id).collect();
        assert_eq!(ids.len(), 3);
    }
}

#[test]
fn tracker_is_deterministic() {
    let seq = synth::generate(&synth::preset("convoy", 8).unwrap()).unwrap();
    let run = || Tracker::new(TrackerConfig::paper_ocsort()).unwrap().run(seq.frames()).unwrap();
    assert_eq!(run(), run());
}
