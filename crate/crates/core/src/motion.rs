//! Constant-velocity Kalman filter over `(cx, cy, aspect, height)` and the
//! IoU-based motion similarity between predicted tracks and detections.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::association::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox, Detection};

pub type StateVector = SVector<f64, 8>;
pub type StateCovariance = SMatrix<f64, 8, 8>;
type MeasurementVector = SVector<f64, 4>;
type MeasurementCovariance = SMatrix<f64, 4, 4>;
type Projection = SMatrix<f64, 4, 8>;

/// Process and measurement noise, expressed as multiples of the box height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanConfig {
    pub std_weight_position: f64,
    pub std_weight_velocity: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            std_weight_position: 1.0 / 20.0,
            std_weight_velocity: 1.0 / 160.0,
        }
    }
}

/// Mean `(cx, cy, a, h, vcx, vcy, va, vh)` and its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateVector,
    pub covariance: StateCovariance,
}

impl KalmanState {
    /// The box encoded by the position half of the mean.
    pub fn bbox(&self) -> BoundingBox {
        let m = &self.mean;
        BoundingBox::from_xyah_clamped(m[0], m[1], m[2], m[3])
            .expect("kalman mean must stay finite")
    }
}

#[derive(Debug, Clone)]
pub struct KalmanFilter {
    cfg: KalmanConfig,
    transition: StateCovariance,
    projection: Projection,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(KalmanConfig::default())
    }
}

impl KalmanFilter {
    pub fn new(cfg: KalmanConfig) -> Self {
        let mut transition = StateCovariance::identity();
        let mut projection = Projection::zeros();
        for i in 0..4 {
            transition[(i, i + 4)] = 1.0;
            projection[(i, i)] = 1.0;
        }
        Self {
            cfg,
            transition,
            projection,
        }
    }

    pub fn config(&self) -> &KalmanConfig {
        &self.cfg
    }

    pub fn initiate(&self, b: &BoundingBox) -> Result<KalmanState> {
        let z = measurement(b)?;
        let mut mean = StateVector::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&z);

        let h = z[3];
        let (p, v) = (self.cfg.std_weight_position, self.cfg.std_weight_velocity);
        let std = [
            2.0 * p * h,
            2.0 * p * h,
            1e-2,
            2.0 * p * h,
            10.0 * v * h,
            10.0 * v * h,
            1e-5,
            10.0 * v * h,
        ];
        let covariance = StateCovariance::from_diagonal(&StateVector::from_fn(|i, _| std[i] * std[i]));
        Ok(KalmanState { mean, covariance })
    }

    pub fn predict(&self, s: &KalmanState) -> KalmanState {
        let h = s.mean[3];
        let (p, v) = (self.cfg.std_weight_position, self.cfg.std_weight_velocity);
        let std = [p * h, p * h, 1e-2, p * h, v * h, v * h, 1e-5, v * h];
        let noise = StateCovariance::from_diagonal(&StateVector::from_fn(|i, _| std[i] * std[i]));

        let mean = self.transition * s.mean;
        let covariance = self.transition * s.covariance * self.transition.transpose() + noise;
        KalmanState {
            mean,
            covariance: symmetrize(covariance),
        }
    }

    pub fn update(&self, s: &KalmanState, b: &BoundingBox) -> Result<KalmanState> {
        let z = measurement(b)?;
        let h = s.mean[3];
        let p = self.cfg.std_weight_position;
        let std = [p * h, p * h, 1e-1, p * h];
        let noise =
            MeasurementCovariance::from_diagonal(&MeasurementVector::from_fn(|i, _| std[i] * std[i]));

        let projected_mean = self.projection * s.mean;
        let projected_cov = symmetrize4(self.projection * s.covariance * self.projection.transpose() + noise);

        // K^T = S^-1 (H P), with S symmetric positive definite.
        let chol = projected_cov
            .cholesky()
            .ok_or_else(|| Error::InvalidMeasurement("innovation covariance is not positive definite".into()))?;
        let gain = chol.solve(&(self.projection * s.covariance)).transpose();

        let innovation = z - projected_mean;
        let mean = s.mean + gain * innovation;
        let covariance = s.covariance - gain * projected_cov * gain.transpose();
        Ok(KalmanState {
            mean,
            covariance: symmetrize(covariance),
        })
    }
}

fn measurement(b: &BoundingBox) -> Result<MeasurementVector> {
    if b.area() <= 0.0 {
        return Err(Error::InvalidMeasurement(format!("zero-area box {b}")));
    }
    let [cx, cy, a, h] = b.to_xyah();
    Ok(MeasurementVector::new(cx, cy, a, h))
}

fn symmetrize(m: StateCovariance) -> StateCovariance {
    (m + m.transpose()) * 0.5
}

fn symmetrize4(m: MeasurementCovariance) -> MeasurementCovariance {
    (m + m.transpose()) * 0.5
}

/// `S_motion[i][j] = iou(predicted_i, det_j)`.
pub fn motion_similarity_matrix(predicted: &[BoundingBox], dets: &[Detection]) -> SimilarityMatrix {
    SimilarityMatrix::from_fn(predicted.len(), dets.len(), |i, j| iou(&predicted[i], &dets[j].bbox))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(l: f64, t: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(l, t, w, h).unwrap()
    }

    #[test]
    fn initiate_encodes_box_with_zero_velocity() {
        let kf = KalmanFilter::default();
        let s = kf.initiate(&bb(0.0, 0.0, 10.0, 20.0)).unwrap();
        let expected = [5.0, 10.0, 0.5, 20.0, 0.0, 0.0, 0.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(s.mean[i], *e);
        }
    }

    #[test]
    fn zero_area_measurement_is_rejected() {
        let kf = KalmanFilter::default();
        assert!(matches!(
            kf.initiate(&bb(1.0, 1.0, 0.0, 5.0)),
            Err(Error::InvalidMeasurement(_))
        ));
        let s = kf.initiate(&bb(0.0, 0.0, 4.0, 8.0)).unwrap();
        assert!(kf.update(&s, &bb(1.0, 1.0, 3.0, 0.0)).is_err());
    }

    #[test]
    fn zero_velocity_prediction_keeps_box() {
        let kf = KalmanFilter::default();
        let b = bb(3.0, 4.0, 10.0, 20.0);
        let s = kf.predict(&kf.initiate(&b).unwrap());
        for (x, y) in s.bbox().tlwh().iter().zip(b.tlwh()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_advances_by_velocity() {
        let kf = KalmanFilter::default();
        let mut s = kf.initiate(&bb(0.0, 0.0, 10.0, 20.0)).unwrap();
        s.mean[4] = 2.0;
        let p = kf.predict(&s);
        assert_eq!((p.mean[0], p.mean[1]), (7.0, 10.0));
    }

    #[test]
    fn zero_innovation_keeps_position() {
        let kf = KalmanFilter::default();
        let mut s = kf.initiate(&bb(10.0, 10.0, 12.0, 24.0)).unwrap();
        s.mean[4] = 1.5;
        s.mean[5] = -0.5;
        let pred = kf.predict(&s);
        let upd = kf.update(&pred, &pred.bbox()).unwrap();
        for i in 0..4 {
            assert!((upd.mean[i] - pred.mean[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn motion_matrix_shapes() {
        let d = |b| Detection::new(b, 0.9, 0).unwrap();
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let m = motion_similarity_matrix(&[a], &[d(bb(50.0, 50.0, 5.0, 5.0))]);
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert_eq!(m.get(0, 0), 0.0);
        let e = motion_similarity_matrix(&[], &[d(a), d(a)]);
        assert_eq!((e.rows(), e.cols()), (0, 2));
        let e = motion_similarity_matrix(&[a], &[]);
        assert_eq!((e.rows(), e.cols()), (1, 0));
        let boxes = [a, bb(30.0, 0.0, 10.0, 10.0)];
        let m = motion_similarity_matrix(&boxes, &[d(boxes[0]), d(boxes[1])]);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0.0..600.0f64, 0.0..500.0f64, 4.0..80.0f64, 8.0..160.0f64)
            .prop_map(|(l, t, w, h)| bb(l, t, w, h))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn covariance_stays_symmetric_psd(start in arb_box(), boxes in prop::collection::vec(arb_box(), 100)) {
            let kf = KalmanFilter::default();
            let mut s = kf.initiate(&start).unwrap();
            for b in &boxes {
                let pred = kf.predict(&s);
                for i in 0..8 {
                    prop_assert!(pred.covariance[(i, i)] >= s.covariance[(i, i)]);
                }
                s = kf.update(&pred, b).unwrap();
                for i in 0..8 {
                    prop_assert!(s.covariance[(i, i)] <= pred.covariance[(i, i)] + 1e-12);
                    for j in 0..8 {
                        prop_assert!((s.covariance[(i, j)] - s.covariance[(j, i)]).abs() <= 1e-9);
                    }
                }
                let eig = s.covariance.symmetric_eigenvalues();
                prop_assert!(eig.iter().all(|&e| e >= -1e-9));
                prop_assert!(s.mean[2] > 0.0 && s.mean[3] > 0.0);
            }
        }

        #[test]
        fn posterior_position_between_prior_and_measurement(start in arb_box(), meas in arb_box()) {
            let kf = KalmanFilter::default();
            let pred = kf.predict(&kf.initiate(&start).unwrap());
            let post = kf.update(&pred, &meas).unwrap();
            let z = meas.to_xyah();
            for i in 0..4 {
                let (lo, hi) = if pred.mean[i] <= z[i] { (pred.mean[i], z[i]) } else { (z[i], pred.mean[i]) };
                prop_assert!(post.mean[i] >= lo - 1e-9 && post.mean[i] <= hi + 1e-9);
            }
        }
    }
}
