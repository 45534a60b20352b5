//! Positional/rotational error metrics, the motor MSE loss, and aggregate
//! evaluation of a prediction run against ground truth.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode_motor, Motor, Rotor3};
use crate::embed::{apply_motor, down_project, up_project, Curvature, EuclidPoint3};

/// Number of histogram bins for error distributions.
pub const HISTOGRAM_BINS: usize = 50;

/// Errors from run evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("duplicate frame_id {0:?} in {1}")]
    DuplicateFrameId(String, &'static str),
    #[error(
        "frame_id sets differ: {} prediction frame(s) missing from ground truth, \
         {} ground-truth frame(s) missing from predictions",
        missing_in_gt.len(),
        missing_in_pred.len()
    )]
    FrameIdMismatch {
        missing_in_gt: Vec<String>,
        missing_in_pred: Vec<String>,
    },
    #[error("no frames to evaluate")]
    EmptyRun,
    #[error("every frame failed to decode")]
    AllFramesExcluded,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("every cloud point projected to the antipode")]
    AllPointsDegenerate,
}

/// L1 distance between two decoded positions, in meters. Chosen over the
/// Euclidean norm so large misses do not grow quadratically.
pub fn positional_error(d_hat: &EuclidPoint3, d: &EuclidPoint3) -> f64 {
    (d_hat.x - d.x).abs() + (d_hat.y - d.y).abs() + (d_hat.z - d.z).abs()
}

/// Angle `arccos <R R_hat~>_0` between two rotors, in degrees.
///
/// This is half the relative rotation angle (a 90-degree relative rotation
/// reports 45), bounded in `[0, 180]`. Evaluated as
/// `atan2(|<R R_hat~>_2|, <R R_hat~>_0)`, which equals the arccos on unit
/// rotors but stays exact at the ends of the range: no argument can drift
/// outside the arccos domain, and the product components below are grouped
/// as differences of products so identical rotors give exactly zero.
pub fn rotational_error(r: &Rotor3, r_hat: &Rotor3) -> f64 {
    let (w1, [p1, q1, r1]) = (r.scalar(), r.bivector());
    let (w2, [p2, q2, r2]) = (r_hat.scalar(), r_hat.bivector());
    let scalar = w1 * w2 + p1 * p2 + q1 * q2 + r1 * r2;
    let c12 = (w2 * p1 - w1 * p2) - (r1 * q2 - r2 * q1);
    let c13 = (w2 * q1 - w1 * q2) - (p1 * r2 - p2 * r1);
    let c23 = (w2 * r1 - w1 * r2) - (q1 * p2 - q2 * p1);
    let bivector_norm = (c12 * c12 + c13 * c13 + c23 * c23).sqrt();
    bivector_norm.atan2(scalar).to_degrees()
}

/// Mean squared difference over the eight motor coefficients.
pub fn motor_mse(m_hat: &Motor, m: &Motor) -> f64 {
    m_hat
        .coeffs()
        .iter()
        .zip(m.coeffs())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / 8.0
}

/// Per-frame error record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameErrors {
    pub frame_id: String,
    /// L1 positional error, meters.
    pub err_pos: f64,
    /// Rotor-difference angle, degrees, in `[0, 180]`.
    pub err_rot: f64,
    /// MSE between the eight predicted and ground-truth coefficients.
    pub motor_mse: f64,
    /// `|<M_hat M_hat~>_0 - 1|` of the raw predicted motor.
    pub unit_defect: f64,
}

/// A frame dropped from the aggregates, with the failure that excluded it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedFrame {
    pub frame_id: String,
    pub reason: String,
}

/// Error thresholds for the "within" percentage, `(meters, degrees)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub pos_m: f64,
    pub rot_deg: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            pos_m: 10.0,
            rot_deg: 10.0,
        }
    }
}

/// A normalized error histogram: 50 uniform bins from zero to the 99th
/// percentile, outliers pooled into the last bin, counts summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `HISTOGRAM_BINS + 1` edges, first 0.
    pub bin_edges: Vec<f64>,
    /// `HISTOGRAM_BINS` normalized counts.
    pub counts: Vec<f64>,
}

impl Histogram {
    fn build(values: &[f64]) -> Self {
        let p99 = percentile(values, 0.99);
        // Degenerate all-zero run keeps well-formed unit-width bins.
        let hi = if p99 > 0.0 { p99 } else { 1.0 };
        let width = hi / HISTOGRAM_BINS as f64;
        let mut counts = vec![0.0; HISTOGRAM_BINS];
        for &v in values {
            let bin = ((v / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1.0;
        }
        let total = values.len() as f64;
        for c in counts.iter_mut() {
            *c /= total;
        }
        let bin_edges = (0..=HISTOGRAM_BINS).map(|i| i as f64 * width).collect();
        Self { bin_edges, counts }
    }
}

/// Linearly interpolated percentile of an unsorted sample, `q` in `[0, 1]`.
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Order-statistic median; an even count averages the middle two.
fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Pearson correlation coefficient; zero when either sample has no
/// variance (the coefficient is undefined there).
fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Aggregate statistics of a prediction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub lambda: f64,
    pub thresholds: Thresholds,
    /// Frames that entered the aggregates.
    pub frame_count: usize,
    pub excluded_count: usize,
    pub median_pos: f64,
    pub median_rot: f64,
    /// Percentage of evaluated frames with both errors under the thresholds.
    pub pct_within: f64,
    pub pearson_pos_rot: f64,
    pub histogram_pos: Histogram,
    pub histogram_rot: Histogram,
    /// Sorted positional errors (the empirical CDF support).
    pub cdf_pos: Vec<f64>,
    /// Sorted rotational errors.
    pub cdf_rot: Vec<f64>,
    pub per_frame: Vec<FrameErrors>,
    pub excluded: Vec<ExcludedFrame>,
}

impl EvalReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn index_motors<'a>(
    list: &'a [(String, Motor)],
    side: &'static str,
) -> Result<BTreeMap<&'a str, &'a Motor>, MetricsError> {
    let mut map = BTreeMap::new();
    for (id, motor) in list {
        if map.insert(id.as_str(), motor).is_some() {
            return Err(MetricsError::DuplicateFrameId(id.clone(), side));
        }
    }
    Ok(map)
}

/// Decodes predicted and ground-truth motors frame by frame and aggregates
/// the error statistics.
///
/// The two lists must cover the same frame ids; frames whose decode fails
/// are excluded from every aggregate and reported, rather than polluting
/// the medians with sentinel values. Output ordering is by frame id, so the
/// report is deterministic however the inputs were ordered.
pub fn evaluate_run(
    pred: &[(String, Motor)],
    gt: &[(String, Motor)],
    c: Curvature,
    thresholds: Thresholds,
) -> Result<EvalReport, MetricsError> {
    let pred_map = index_motors(pred, "predictions")?;
    let gt_map = index_motors(gt, "ground truth")?;

    let missing_in_gt: Vec<String> = pred_map
        .keys()
        .filter(|id| !gt_map.contains_key(**id))
        .map(|id| id.to_string())
        .collect();
    let missing_in_pred: Vec<String> = gt_map
        .keys()
        .filter(|id| !pred_map.contains_key(**id))
        .map(|id| id.to_string())
        .collect();
    if !missing_in_gt.is_empty() || !missing_in_pred.is_empty() {
        return Err(MetricsError::FrameIdMismatch {
            missing_in_gt,
            missing_in_pred,
        });
    }
    if gt_map.is_empty() {
        return Err(MetricsError::EmptyRun);
    }

    let mut per_frame = Vec::with_capacity(gt_map.len());
    let mut excluded = Vec::new();
    for (frame_id, gt_motor) in &gt_map {
        let pred_motor = pred_map[frame_id];
        let gt_decoded = match decode_motor(gt_motor, c) {
            Ok(d) => d,
            Err(e) => {
                excluded.push(ExcludedFrame {
                    frame_id: frame_id.to_string(),
                    reason: format!("ground truth: {e}"),
                });
                continue;
            }
        };
        let pred_decoded = match decode_motor(pred_motor, c) {
            Ok(d) => d,
            Err(e) => {
                excluded.push(ExcludedFrame {
                    frame_id: frame_id.to_string(),
                    reason: format!("prediction: {e}"),
                });
                continue;
            }
        };
        per_frame.push(FrameErrors {
            frame_id: frame_id.to_string(),
            err_pos: positional_error(&pred_decoded.pose.t, &gt_decoded.pose.t),
            err_rot: rotational_error(&gt_decoded.rotor, &pred_decoded.rotor),
            motor_mse: motor_mse(pred_motor, gt_motor),
            unit_defect: pred_motor.unit_defect(),
        });
    }
    if per_frame.is_empty() {
        return Err(MetricsError::AllFramesExcluded);
    }

    let pos: Vec<f64> = per_frame.iter().map(|f| f.err_pos).collect();
    let rot: Vec<f64> = per_frame.iter().map(|f| f.err_rot).collect();
    let within = per_frame
        .iter()
        .filter(|f| f.err_pos < thresholds.pos_m && f.err_rot < thresholds.rot_deg)
        .count();

    let mut cdf_pos = pos.clone();
    cdf_pos.sort_by(|a, b| a.total_cmp(b));
    let mut cdf_rot = rot.clone();
    cdf_rot.sort_by(|a, b| a.total_cmp(b));

    Ok(EvalReport {
        lambda: c.lambda(),
        thresholds,
        frame_count: per_frame.len(),
        excluded_count: excluded.len(),
        median_pos: median(&pos),
        median_rot: median(&rot),
        pct_within: 100.0 * within as f64 / per_frame.len() as f64,
        pearson_pos_rot: pearson(&pos, &rot),
        histogram_pos: Histogram::build(&pos),
        histogram_rot: Histogram::build(&rot),
        cdf_pos,
        cdf_rot,
        per_frame,
        excluded,
    })
}

/// Point-cloud cross-check result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloudMse {
    /// Mean squared Euclidean distance, square meters.
    pub mse: f64,
    pub points_used: usize,
    /// Points whose transform landed at the antipode, dropped from the mean.
    pub points_excluded: usize,
}

/// Transforms a cloud by both motors through the spherical model (embed,
/// sandwich, project back down) and reports the mean squared distance
/// between the two images.
pub fn pointcloud_mse(
    cloud: &[EuclidPoint3],
    m: &Motor,
    m_hat: &Motor,
    c: Curvature,
) -> Result<CloudMse, MetricsError> {
    if cloud.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for p in cloud {
        let embedded = up_project(p, c);
        let via_gt = apply_motor(m, &embedded)
            .ok()
            .and_then(|img| down_project(&img.point, c).ok());
        let via_pred = apply_motor(m_hat, &embedded)
            .ok()
            .and_then(|img| down_project(&img.point, c).ok());
        if let (Some(a), Some(b)) = (via_gt, via_pred) {
            let d = a.sub(&b);
            sum += d.norm_squared();
            used += 1;
        }
    }
    if used == 0 {
        return Err(MetricsError::AllPointsDegenerate);
    }
    Ok(CloudMse {
        mse: sum / used as f64,
        points_used: used,
        points_excluded: cloud.len() - used,
    })
}
