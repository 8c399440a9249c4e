//! Trajectory accuracy: absolute trajectory error and KITTI-style
//! sub-sequence relative errors.

use crate::error::{Error, Result};
use crate::pose::{Rigid2, Trajectory};

/// Desk-scale segment lengths in meters.
pub const DESK_LENGTHS: [f64; 8] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0];

/// Full-scale KITTI segment lengths in meters.
pub const KITTI_LENGTHS: [f64; 8] = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0];

const TIME_MATCH_TOLERANCE: f64 = 1e-6;

/// Relative slack when deciding whether a segment has reached its length, so
/// that exact multiples of the step survive rounding.
pub const SEGMENT_REACH_TOLERANCE: f64 = 1e-9;

fn check_matched(estimate: &Trajectory, ground_truth: &Trajectory) -> Result<()> {
    if estimate.len() != ground_truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} poses, ground truth {}",
            estimate.len(),
            ground_truth.len()
        )));
    }
    if estimate.len() < 2 {
        return Err(Error::InvalidTrajectory("need at least 2 poses".into()));
    }
    for (k, (e, g)) in estimate.poses().iter().zip(ground_truth.poses()).enumerate() {
        if (e.t - g.t).abs() > TIME_MATCH_TOLERANCE {
            return Err(Error::DimensionMismatch(format!(
                "pose {k}: estimate at t={} but ground truth at t={}",
                e.t, g.t
            )));
        }
    }
    Ok(())
}

/// Root-mean-square translation error after first-pose alignment.
///
/// Both trajectories are expressed relative to their own first pose. The
/// first pose is the alignment anchor (zero error by construction) and is
/// left out of the mean.
pub fn ate_rmse(estimate: &Trajectory, ground_truth: &Trajectory) -> Result<f64> {
    check_matched(estimate, ground_truth)?;
    let e0 = estimate.poses()[0].rigid().inverse();
    let g0 = ground_truth.poses()[0].rigid().inverse();
    let sse: f64 = estimate
        .poses()
        .iter()
        .zip(ground_truth.poses())
        .skip(1)
        .map(|(e, g)| {
            let e = e0.compose(&e.rigid());
            let g = g0.compose(&g.rigid());
            (e.x - g.x).powi(2) + (e.y - g.y).powi(2)
        })
        .sum();
    Ok((sse / (estimate.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeErrors {
    /// Mean translation error as a percentage of segment length.
    pub translation_pct: f64,
    /// Mean rotation error in degrees per 100 m.
    pub rotation_deg_per_100m: f64,
    /// `(length, segments evaluated)` for every length that had any segment.
    pub segments: Vec<(f64, usize)>,
}

/// KITTI-style relative errors.
///
/// For every start pose and segment length `L`, the segment ends at the first
/// pose whose ground-truth path distance from the start reaches `L`. The
/// error pose is `(est_i⁻¹ est_j)⁻¹ (gt_i⁻¹ gt_j)`; its translation and
/// rotation are divided by `L`. Errors are averaged per length, then over the
/// lengths that had at least one segment.
pub fn kitti_relative_errors(
    estimate: &Trajectory,
    ground_truth: &Trajectory,
    lengths: &[f64],
) -> Result<RelativeErrors> {
    check_matched(estimate, ground_truth)?;
    if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Domain("segment lengths must be positive".into()));
    }
    let dist = ground_truth.path_distances();
    let total = *dist.last().expect("at least 2 poses");
    let shortest = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    if total < shortest {
        return Err(Error::TrajectoryTooShort {
            path_length: total,
            shortest,
        });
    }
    let gt: Vec<Rigid2> = ground_truth.poses().iter().map(|p| p.rigid()).collect();
    let est: Vec<Rigid2> = estimate.poses().iter().map(|p| p.rigid()).collect();

    let mut per_length = Vec::new();
    let mut segments = Vec::new();
    for &len in lengths {
        let (mut t_sum, mut r_sum, mut count) = (0.0, 0.0, 0usize);
        for i in 0..gt.len() {
            let reach = len * (1.0 - SEGMENT_REACH_TOLERANCE);
            let Some(j) = (i..gt.len()).find(|&j| dist[j] - dist[i] >= reach) else {
                // Later starts cannot reach this length either.
                break;
            };
            let d_gt = gt[i].inverse().compose(&gt[j]);
            let d_est = est[i].inverse().compose(&est[j]);
            let err = d_est.inverse().compose(&d_gt);
            t_sum += err.translation_norm() / len;
            r_sum += err.yaw.abs() / len;
            count += 1;
        }
        if count > 0 {
            per_length.push((t_sum / count as f64, r_sum / count as f64));
            segments.push((len, count));
        }
    }
    let n = per_length.len() as f64;
    let t_mean = per_length.iter().map(|p| p.0).sum::<f64>() / n;
    let r_mean = per_length.iter().map(|p| p.1).sum::<f64>() / n;
    Ok(RelativeErrors {
        translation_pct: 100.0 * t_mean,
        rotation_deg_per_100m: 100.0 * r_mean.to_degrees(),
        segments,
    })
}
