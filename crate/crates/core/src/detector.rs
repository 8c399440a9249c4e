//! Sliding-window detection along each azimuth ray.
//!
//! For every cell under test (CUT) the detector estimates a noise level `Z`
//! from `W/2` reference cells on each side, skipping `guard_per_side` cells
//! next to the CUT, and flags the cell when `X > a * Z + b`. With `b = 0`
//! this is CA-CFAR; with `a = 0` it is a fixed-level detector.
//!
//! Profiles are mirror-padded (reflection without repeating the edge sample)
//! by `W/2 + guard` cells at both ends, so every cell sees a full window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{DetectorParams, EstimatorKind};
use crate::scan::{DetectionSet, PolarScan};

/// Noise statistic `Z` for one cell under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    pub z: f64,
}

/// Reflects `k` (which may run `pad` cells past either end) into `0..len`.
#[inline]
fn mirror(k: isize, len: usize) -> usize {
    let last = len as isize - 1;
    if k < 0 {
        (-k) as usize
    } else if k > last {
        (2 * last - k) as usize
    } else {
        k as usize
    }
}

fn check_len(profile: &[f64], params: &DetectorParams) -> Result<()> {
    let min = params.min_profile_len();
    if profile.len() < min {
        return Err(Error::ProfileTooShort {
            len: profile.len(),
            min,
        });
    }
    Ok(())
}

fn pad_profile(profile: &[f64], pad: usize) -> Vec<f64> {
    let n = profile.len();
    (-(pad as isize)..(n + pad) as isize)
        .map(|k| profile[mirror(k, n)])
        .collect()
}

/// Computes `Z` from the two reference half-windows.
fn reduce(left: &[f64], right: &[f64], kind: EstimatorKind, scratch: &mut Vec<f64>) -> f64 {
    match kind {
        EstimatorKind::CellAveraging => left.iter().chain(right).sum(),
        EstimatorKind::GreatestOf => {
            let (l, r): (f64, f64) = (left.iter().sum(), right.iter().sum());
            2.0 * l.max(r)
        }
        EstimatorKind::SmallestOf => {
            let (l, r): (f64, f64) = (left.iter().sum(), right.iter().sum());
            2.0 * l.min(r)
        }
        EstimatorKind::OrderedStatistic(k) => {
            scratch.clear();
            scratch.extend_from_slice(left);
            scratch.extend_from_slice(right);
            let w = scratch.len();
            let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
            w as f64 * *kth
        }
    }
}

/// Noise statistic for the cell at `cut_index`.
pub fn estimate_noise(
    profile: &[f64],
    cut_index: usize,
    params: &DetectorParams,
) -> Result<NoiseEstimate> {
    check_len(profile, params)?;
    if cut_index >= profile.len() {
        return Err(Error::Domain(format!(
            "cut index {cut_index} outside profile of length {}",
            profile.len()
        )));
    }
    let n = profile.len();
    let h = params.half_window() as isize;
    let g = params.guard_per_side() as isize;
    let c = cut_index as isize;
    let left: Vec<f64> = (c - g - h..c - g).map(|k| profile[mirror(k, n)]).collect();
    let right: Vec<f64> = (c + g + 1..=c + g + h).map(|k| profile[mirror(k, n)]).collect();
    let z = reduce(&left, &right, params.estimator(), &mut Vec::new());
    Ok(NoiseEstimate { z })
}

/// `Z` for every cell of a profile.
pub fn noise_profile(profile: &[f64], params: &DetectorParams) -> Result<Vec<f64>> {
    check_len(profile, params)?;
    let pad = params.padding();
    let padded = pad_profile(profile, pad);
    let h = params.half_window();
    let g = params.guard_per_side();
    let mut scratch = Vec::with_capacity(params.window_w());
    Ok((0..profile.len())
        .map(|j| {
            // CUT sits at padded index j + pad.
            let left = &padded[j..j + h];
            let right = &padded[j + h + 2 * g + 1..j + 2 * pad + 1];
            reduce(left, right, params.estimator(), &mut scratch)
        })
        .collect())
}

/// Flags cell `j` iff `profile[j] > a * Z_j + b`.
pub fn detect_profile(profile: &[f64], params: &DetectorParams) -> Result<Vec<bool>> {
    let z = noise_profile(profile, params)?;
    Ok(apply_threshold(profile, &z, params.scale_a(), params.offset_b()))
}

/// Threshold step alone, for callers that reuse a precomputed noise profile.
pub fn apply_threshold(samples: &[f64], noise: &[f64], a: f64, b: f64) -> Vec<bool> {
    samples
        .iter()
        .zip(noise)
        .map(|(x, z)| *x > a * z + b)
        .collect()
}

/// Noise statistic for every cell of a scan, azimuth-major.
pub fn noise_field(scan: &PolarScan, params: &DetectorParams) -> Result<Vec<f64>> {
    check_scan(scan, params)?;
    let rows: Vec<Vec<f64>> = scan
        .cells()
        .par_chunks(scan.num_range_bins())
        .map(|row| noise_profile(row, params))
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

fn check_scan(scan: &PolarScan, params: &DetectorParams) -> Result<()> {
    if scan.num_range_bins() < params.min_profile_len() {
        return Err(Error::ProfileTooShort {
            len: scan.num_range_bins(),
            min: params.min_profile_len(),
        });
    }
    Ok(())
}

/// Applies [`detect_profile`] independently to every azimuth.
pub fn detect_scan(scan: &PolarScan, params: &DetectorParams) -> Result<DetectionSet> {
    check_scan(scan, params)?;
    let rows: Vec<Vec<bool>> = scan
        .cells()
        .par_chunks(scan.num_range_bins())
        .map(|row| detect_profile(row, params))
        .collect::<Result<_>>()?;
    DetectionSet::from_mask(scan, rows.concat())
}

/// Thresholds a scan against a noise field from [`noise_field`].
pub fn detect_with_noise(
    scan: &PolarScan,
    noise: &[f64],
    a: f64,
    b: f64,
) -> Result<DetectionSet> {
    if noise.len() != scan.len() {
        return Err(Error::DimensionMismatch(format!(
            "noise field has {} cells, scan has {}",
            noise.len(),
            scan.len()
        )));
    }
    DetectionSet::from_mask(scan, apply_threshold(scan.cells(), noise, a, b))
}

/// Classical CA-CFAR on one profile: flags `X > scale * Σ reference cells`.
///
/// Uses the same window geometry and padding as the affine detector.
pub fn ca_cfar_profile(
    profile: &[f64],
    scale: f64,
    window_w: usize,
    guard_per_side: usize,
) -> Result<Vec<bool>> {
    let params = DetectorParams::new(
        scale,
        0.0,
        window_w,
        guard_per_side,
        EstimatorKind::CellAveraging,
    )?;
    check_len(profile, &params)?;
    let n = profile.len() as isize;
    let h = params.half_window() as isize;
    let g = guard_per_side as isize;
    Ok((0..n)
        .map(|c| {
            let mut z = 0.0;
            for k in c - g - h..=c + g + h {
                if (k - c).abs() > g {
                    z += profile[mirror(k, n as usize)];
                }
            }
            profile[c as usize] > scale * z
        })
        .collect())
}

/// Classical fixed-level detector: flags `X > level`.
pub fn fixed_level_profile(profile: &[f64], level: f64) -> Vec<bool> {
    profile.iter().map(|x| *x > level).collect()
}

pub fn ca_cfar_scan(
    scan: &PolarScan,
    scale: f64,
    window_w: usize,
    guard_per_side: usize,
) -> Result<DetectionSet> {
    let rows: Vec<Vec<bool>> = scan
        .rows()
        .map(|row| ca_cfar_profile(row, scale, window_w, guard_per_side))
        .collect::<Result<_>>()?;
    DetectionSet::from_mask(scan, rows.concat())
}

pub fn fixed_level_scan(scan: &PolarScan, level: f64) -> Result<DetectionSet> {
    DetectionSet::from_mask(scan, fixed_level_profile(scan.cells(), level))
}

/// Keeps the `k` strongest returns of every azimuth; ties go to the nearer bin.
pub fn k_strongest(scan: &PolarScan, k: usize) -> Result<DetectionSet> {
    let bins = scan.num_range_bins();
    if k == 0 || k > bins {
        return Err(Error::Domain(format!("k = {k} outside 1..={bins}")));
    }
    let mut mask = vec![false; scan.len()];
    let mut order: Vec<usize> = Vec::with_capacity(bins);
    for (row, row_mask) in scan.rows().zip(mask.chunks_exact_mut(bins)) {
        order.clear();
        order.extend(0..bins);
        order.sort_by(|&i, &j| row[j].total_cmp(&row[i]).then(i.cmp(&j)));
        for &j in &order[..k] {
            row_mask[j] = true;
        }
    }
    DetectionSet::from_mask(scan, mask)
}
