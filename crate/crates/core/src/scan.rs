//! Polar scan container, detection output and polar/Cartesian geometry.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Azimuth x range matrix of square-law intensity samples.
///
/// Cells are stored azimuth-major: `cells[i * num_range_bins + j]` is range
/// bin `j` of azimuth `i`. Bin `j` covers ranges
/// `[j * range_resolution, (j + 1) * range_resolution)` and its center sits at
/// `(j + 0.5) * range_resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarScan {
    num_azimuths: usize,
    num_range_bins: usize,
    range_resolution: f64,
    azimuth_offsets: Vec<f64>,
    cells: Vec<f64>,
}

impl PolarScan {
    /// Builds a scan with uniformly spaced azimuths `2π i / num_azimuths`.
    pub fn new(
        num_azimuths: usize,
        num_range_bins: usize,
        range_resolution: f64,
        cells: Vec<f64>,
    ) -> Result<Self> {
        let offsets = uniform_azimuths(num_azimuths);
        Self::with_azimuths(num_range_bins, range_resolution, offsets, cells)
    }

    /// Builds a scan with an explicit bearing table, one entry per azimuth row.
    pub fn with_azimuths(
        num_range_bins: usize,
        range_resolution: f64,
        azimuth_offsets: Vec<f64>,
        cells: Vec<f64>,
    ) -> Result<Self> {
        let num_azimuths = azimuth_offsets.len();
        if num_azimuths == 0 || num_range_bins == 0 {
            return Err(Error::InvalidScan(format!(
                "dimensions must be positive, got {num_azimuths}x{num_range_bins}"
            )));
        }
        if !(range_resolution > 0.0 && range_resolution.is_finite()) {
            return Err(Error::InvalidScan(format!(
                "range resolution must be positive, got {range_resolution}"
            )));
        }
        if cells.len() != num_azimuths * num_range_bins {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {num_azimuths}x{num_range_bins} scan",
                cells.len()
            )));
        }
        if let Some(pos) = cells.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidScan(format!(
                "cell {pos} holds {}, intensities must be finite and non-negative",
                cells[pos]
            )));
        }
        if azimuth_offsets.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidScan("non-finite azimuth offset".into()));
        }
        Ok(Self {
            num_azimuths,
            num_range_bins,
            range_resolution,
            azimuth_offsets,
            cells,
        })
    }

    pub fn num_azimuths(&self) -> usize {
        self.num_azimuths
    }

    pub fn num_range_bins(&self) -> usize {
        self.num_range_bins
    }

    pub fn range_resolution(&self) -> f64 {
        self.range_resolution
    }

    pub fn azimuth_offsets(&self) -> &[f64] {
        &self.azimuth_offsets
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The range profile of azimuth `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * self.num_range_bins;
        &self.cells[start..start + self.num_range_bins]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.cells.chunks_exact(self.num_range_bins)
    }

    pub fn get(&self, azimuth: usize, bin: usize) -> f64 {
        self.cells[azimuth * self.num_range_bins + bin]
    }

    /// Range of the center of bin `j`.
    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.range_resolution
    }

    pub fn max_range(&self) -> f64 {
        self.num_range_bins as f64 * self.range_resolution
    }

    /// Multiplies every intensity by `factor` (which must be non-negative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let cells = self.cells.iter().map(|v| v * factor).collect();
        Self::with_azimuths(
            self.num_range_bins,
            self.range_resolution,
            self.azimuth_offsets.clone(),
            cells,
        )
    }

    /// Maps a sensor-frame point back to the (azimuth, bin) cell containing it.
    ///
    /// Only meaningful for uniformly spaced azimuths; returns `None` when the
    /// point lies beyond the last range bin.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let range = x.hypot(y);
        let bin = (range / self.range_resolution).floor() as usize;
        if bin >= self.num_range_bins {
            return None;
        }
        Some((azimuth_index(y.atan2(x), self.num_azimuths), bin))
    }
}

/// `2π i / n` for `i` in `0..n`.
pub fn uniform_azimuths(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Nearest uniformly spaced azimuth row for a bearing in radians.
pub fn azimuth_index(bearing: f64, num_azimuths: usize) -> usize {
    let step = 2.0 * PI / num_azimuths as f64;
    let idx = (bearing.rem_euclid(2.0 * PI) / step).round() as usize;
    idx % num_azimuths
}

/// One detected cell in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub intensity: f64,
}

/// Boolean detection mask congruent to a scan plus its Cartesian points.
///
/// Points are emitted in mask order (azimuth-major, ascending range).
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub num_azimuths: usize,
    pub num_range_bins: usize,
    pub mask: Vec<bool>,
    pub points: Vec<Point>,
}

impl DetectionSet {
    /// Builds a detection set from a mask, computing points from `scan`.
    pub fn from_mask(scan: &PolarScan, mask: Vec<bool>) -> Result<Self> {
        let points = polar_to_cartesian(scan, &mask)?;
        Ok(Self {
            num_azimuths: scan.num_azimuths(),
            num_range_bins: scan.num_range_bins(),
            mask,
            points,
        })
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn mask_row(&self, i: usize) -> &[bool] {
        let start = i * self.num_range_bins;
        &self.mask[start..start + self.num_range_bins]
    }

    pub fn is_set(&self, azimuth: usize, bin: usize) -> bool {
        self.mask[azimuth * self.num_range_bins + bin]
    }
}

/// Converts every flagged cell to a point at its bin center.
///
/// Cell `(i, j)` maps to range `(j + 0.5) * res` along bearing
/// `azimuth_offsets[i]`.
pub fn polar_to_cartesian(scan: &PolarScan, mask: &[bool]) -> Result<Vec<Point>> {
    if mask.len() != scan.len() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} cells, scan has {}",
            mask.len(),
            scan.len()
        )));
    }
    let bins = scan.num_range_bins();
    let mut points = Vec::new();
    for (i, (row_mask, row)) in mask.chunks_exact(bins).zip(scan.rows()).enumerate() {
        let (sin, cos) = scan.azimuth_offsets()[i].sin_cos();
        for (j, _) in row_mask.iter().enumerate().filter(|(_, m)| **m) {
            let r = scan.bin_center(j);
            points.push(Point {
                x: r * cos,
                y: r * sin,
                intensity: row[j],
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid_scans() {
        assert!(PolarScan::new(0, 3, 1.0, vec![]).is_err());
        assert!(PolarScan::new(1, 3, 0.0, vec![1.0; 3]).is_err());
        assert!(PolarScan::new(1, 3, 1.0, vec![1.0; 4]).is_err());
        assert!(PolarScan::new(1, 3, 1.0, vec![1.0, -1.0, 0.0]).is_err());
        assert!(PolarScan::new(1, 3, 1.0, vec![1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn first_cell_center() {
        let scan = PolarScan::new(4, 2, 1.0, vec![1.0; 8]).unwrap();
        let mut mask = vec![false; 8];
        mask[0] = true;
        let pts = polar_to_cartesian(&scan, &mask).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].x - 0.5).abs() < 1e-15);
        assert!(pts[0].y.abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_cell() {
        // 4 azimuths: row 1 points along +y; bin 2 at res 1 has center 2.5.
        let scan = PolarScan::new(4, 3, 1.0, vec![7.0; 12]).unwrap();
        let mut mask = vec![false; 12];
        mask[3 + 2] = true;
        let pts = polar_to_cartesian(&scan, &mask).unwrap();
        assert!(pts[0].x.abs() < 1e-12);
        assert!((pts[0].y - 2.5).abs() < 1e-12);
        assert_eq!(pts[0].intensity, 7.0);
    }

    #[test]
    fn mask_size_must_match() {
        let scan = PolarScan::new(2, 2, 1.0, vec![0.0; 4]).unwrap();
        assert!(polar_to_cartesian(&scan, &[true; 3]).is_err());
    }

    proptest! {
        #[test]
        fn points_project_back_to_their_cell(
            az in 1usize..64,
            bins in 1usize..64,
            res in 0.05f64..3.0,
            seed in any::<u64>(),
        ) {
            let scan = PolarScan::new(az, bins, res, vec![1.0; az * bins]).unwrap();
            // Pseudo-random mask derived from the seed.
            let mask: Vec<bool> = (0..az * bins)
                .map(|k| (seed.rotate_left((k % 64) as u32) ^ k as u64) & 3 == 0)
                .collect();
            let pts = polar_to_cartesian(&scan, &mask).unwrap();
            let flagged: Vec<(usize, usize)> = (0..az * bins)
                .filter(|k| mask[*k])
                .map(|k| (k / bins, k % bins))
                .collect();
            prop_assert_eq!(pts.len(), flagged.len());
            for (p, cell) in pts.iter().zip(flagged) {
                prop_assert_eq!(scan.locate(p.x, p.y), Some(cell));
            }
        }
    }
}
