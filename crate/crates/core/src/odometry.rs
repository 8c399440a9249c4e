//! Scan-to-scan radar odometry: point-to-point ICP between consecutive
//! detection clouds, chained into a trajectory.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::detector::{detect_scan, k_strongest};
use crate::error::{Error, Result};
use crate::params::DetectorParams;
use crate::pose::{Pose2D, Rigid2, Trajectory};
use crate::scan::{Point, PolarScan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpConfig {
    /// Correspondences farther apart than this are dropped.
    pub max_distance: f64,
    pub max_iterations: usize,
    /// Stop once both the translation and rotation updates fall below this.
    pub tolerance: f64,
    /// A cloud counts as collinear when `sqrt(λmin / λmax)` of its scatter
    /// matrix is below this.
    pub collinear_tolerance: f64,
    pub initial: Rigid2,
}

impl Default for IcpConfig {
    fn default() -> Self {
        Self {
            max_distance: 2.0,
            max_iterations: 50,
            tolerance: 1e-6,
            collinear_tolerance: 1e-6,
            initial: Rigid2::IDENTITY,
        }
    }
}

/// Transform mapping source points onto target points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationResult {
    pub transform: Rigid2,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when either cloud was collinear; the transform is then identity.
    pub degenerate: bool,
}

/// Uniform hash grid for fixed-radius nearest-neighbor queries.
struct NeighborGrid<'a> {
    points: &'a [(f64, f64)],
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> NeighborGrid<'a> {
    fn new(points: &'a [(f64, f64)], radius: f64) -> Self {
        let cell = radius;
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        if cell.is_finite() {
            for (k, p) in points.iter().enumerate() {
                buckets.entry(Self::key(cell, p)).or_default().push(k as u32);
            }
        }
        Self { points, cell, buckets }
    }

    fn key(cell: f64, p: &(f64, f64)) -> (i64, i64) {
        ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64)
    }

    /// Index of the nearest point within `cell`; lower index wins ties.
    fn nearest(&self, q: (f64, f64)) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |k: usize| {
            let p = self.points[k];
            let d2 = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
            if d2 <= self.cell * self.cell {
                match best {
                    Some((bd, bk)) if d2 > bd || (d2 == bd && k > bk) => {}
                    _ => best = Some((d2, k)),
                }
            }
        };
        if !self.cell.is_finite() {
            (0..self.points.len()).for_each(&mut consider);
        } else {
            let (cx, cy) = Self::key(self.cell, &q);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy)) {
                        bucket.iter().for_each(|&k| consider(k as usize));
                    }
                }
            }
        }
        best.map(|(_, k)| k)
    }
}

fn is_collinear(points: &[(f64, f64)], tol: f64) -> bool {
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let (lmax, lmin) = (half_trace + disc, (half_trace - disc).max(0.0));
    lmax <= 0.0 || (lmin / lmax).sqrt() < tol
}

/// Least-squares rigid transform taking `src[k]` to `dst[k]`.
///
/// Centroid-aligned cross-covariance; the 2-D rotation of its polar
/// decomposition has angle `atan2(Sxy - Syx, Sxx + Syy)`.
pub fn fit_rigid(src: &[(f64, f64)], dst: &[(f64, f64)]) -> Rigid2 {
    let n = src.len() as f64;
    let centroid = |pts: &[(f64, f64)]| {
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        (sx / n, sy / n)
    };
    let (csx, csy) = centroid(src);
    let (cdx, cdy) = centroid(dst);
    let (mut sxx, mut sxy, mut syx, mut syy) = (0.0, 0.0, 0.0, 0.0);
    for (s, d) in src.iter().zip(dst) {
        let (ax, ay) = (s.0 - csx, s.1 - csy);
        let (bx, by) = (d.0 - cdx, d.1 - cdy);
        sxx += ax * bx;
        sxy += ax * by;
        syx += ay * bx;
        syy += ay * by;
    }
    let yaw = (sxy - syx).atan2(sxx + syy);
    let (s, c) = yaw.sin_cos();
    Rigid2::new(cdx - (c * csx - s * csy), cdy - (s * csx + c * csy), yaw)
}

/// Registers `source` onto `target`: the result maps source coordinates into
/// the target frame.
pub fn icp_register(
    source: &[(f64, f64)],
    target: &[(f64, f64)],
    config: &IcpConfig,
) -> Result<RegistrationResult> {
    if source.len() < 3 || target.len() < 3 {
        return Err(Error::TooFewPoints {
            source_len: source.len(),
            target_len: target.len(),
        });
    }
    if is_collinear(source, config.collinear_tolerance)
        || is_collinear(target, config.collinear_tolerance)
    {
        return Ok(RegistrationResult {
            transform: Rigid2::IDENTITY,
            rmse: f64::NAN,
            iterations: 0,
            converged: false,
            degenerate: true,
        });
    }
    let grid = NeighborGrid::new(target, config.max_distance);
    let mut transform = config.initial;
    let mut converged = false;
    let mut iterations = 0;
    let mut src = Vec::with_capacity(source.len());
    let mut dst = Vec::with_capacity(source.len());

    let associate = |t: &Rigid2, src: &mut Vec<(f64, f64)>, dst: &mut Vec<(f64, f64)>| {
        let matches: Vec<Option<usize>> = source
            .par_iter()
            .map(|p| grid.nearest(t.apply(p.0, p.1)))
            .collect();
        src.clear();
        dst.clear();
        for (p, m) in source.iter().zip(matches) {
            if let Some(k) = m {
                src.push(*p);
                dst.push(target[k]);
            }
        }
    };

    while iterations < config.max_iterations {
        iterations += 1;
        associate(&transform, &mut src, &mut dst);
        if src.len() < 3 {
            return Err(Error::EmptyAfterGating {
                gate: config.max_distance,
            });
        }
        let next = fit_rigid(&src, &dst);
        let delta = next.compose(&transform.inverse());
        transform = next;
        if delta.translation_norm() < config.tolerance && delta.yaw.abs() < config.tolerance {
            converged = true;
            break;
        }
    }

    associate(&transform, &mut src, &mut dst);
    let rmse = if src.is_empty() {
        f64::NAN
    } else {
        let sse: f64 = src
            .iter()
            .zip(&dst)
            .map(|(s, d)| {
                let (x, y) = transform.apply(s.0, s.1);
                (x - d.0).powi(2) + (y - d.1).powi(2)
            })
            .sum();
        (sse / src.len() as f64).sqrt()
    };
    Ok(RegistrationResult {
        transform,
        rmse,
        iterations,
        converged,
        degenerate: false,
    })
}

/// How each scan is reduced to a point cloud before registration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointFilter {
    Detector(DetectorParams),
    KStrongest(usize),
}

impl PointFilter {
    pub fn apply(&self, scan: &PolarScan) -> Result<Vec<Point>> {
        let set = match self {
            PointFilter::Detector(params) => detect_scan(scan, params)?,
            PointFilter::KStrongest(k) => k_strongest(scan, *k)?,
        };
        Ok(set.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainFailure {
    /// Index of the scan whose registration against its predecessor failed.
    pub index: usize,
    pub reason: String,
}

/// Outcome of chaining registrations along a scan sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct OdometryRun {
    /// Poses up to (not including) the first failed scan.
    pub trajectory: Trajectory,
    pub registrations: Vec<RegistrationResult>,
    pub detection_counts: Vec<usize>,
    pub failure: Option<ChainFailure>,
}

impl OdometryRun {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn mean_detections(&self) -> f64 {
        if self.detection_counts.is_empty() {
            return 0.0;
        }
        self.detection_counts.iter().sum::<usize>() as f64 / self.detection_counts.len() as f64
    }
}

/// Detects every scan, then chains scan-to-scan registrations from an
/// identity start pose.
pub fn chain_odometry(
    scans: &[PolarScan],
    timestamps: &[f64],
    filter: &PointFilter,
    icp: &IcpConfig,
) -> Result<OdometryRun> {
    let clouds = scans
        .iter()
        .map(|s| filter.apply(s))
        .collect::<Result<Vec<_>>>()?;
    chain_clouds(&clouds, timestamps, icp)
}

/// Chains registrations over precomputed point clouds.
///
/// Each registration starts from the previous relative motion. A failed
/// registration ends the chain; the failure is reported in the run.
pub fn chain_clouds(clouds: &[Vec<Point>], timestamps: &[f64], icp: &IcpConfig) -> Result<OdometryRun> {
    if clouds.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 scans, got {}", clouds.len())));
    }
    if timestamps.len() != clouds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} timestamps for {} scans",
            timestamps.len(),
            clouds.len()
        )));
    }
    let xy: Vec<Vec<(f64, f64)>> = clouds
        .iter()
        .map(|c| c.iter().map(|p| (p.x, p.y)).collect())
        .collect();
    let detection_counts = clouds.iter().map(Vec::len).collect();

    let mut poses = vec![Pose2D::new(timestamps[0], 0.0, 0.0, 0.0)];
    let mut registrations = Vec::with_capacity(clouds.len() - 1);
    let mut current = Rigid2::IDENTITY;
    let mut prior = Rigid2::IDENTITY;
    let mut failure = None;
    for k in 1..clouds.len() {
        let config = IcpConfig {
            initial: prior,
            ..*icp
        };
        let reason = match icp_register(&xy[k], &xy[k - 1], &config) {
            Ok(r) if r.degenerate => Some("degenerate (collinear) point cloud".to_string()),
            Ok(r) => {
                registrations.push(r);
                current = current.compose(&r.transform);
                prior = r.transform;
                poses.push(Pose2D::from_rigid(timestamps[k], current));
                None
            }
            Err(e) => Some(e.to_string()),
        };
        if let Some(reason) = reason {
            failure = Some(ChainFailure { index: k, reason });
            break;
        }
    }
    Ok(OdometryRun {
        trajectory: Trajectory::new(poses)?,
        registrations,
        detection_counts,
        failure,
    })
}
