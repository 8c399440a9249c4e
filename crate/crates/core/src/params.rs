//! Detector threshold specification.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default guard cells on each side of the cell under test.
pub const DEFAULT_GUARD: usize = 2;

/// Noise-level estimator plugged into the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Sum of all reference cells.
    CellAveraging,
    /// Twice the larger half-window sum.
    GreatestOf,
    /// Twice the smaller half-window sum.
    SmallestOf,
    /// `W` times the k-th smallest reference sample (1-based).
    OrderedStatistic(usize),
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::CellAveraging => write!(f, "ca"),
            EstimatorKind::GreatestOf => write!(f, "go"),
            EstimatorKind::SmallestOf => write!(f, "so"),
            EstimatorKind::OrderedStatistic(k) => write!(f, "os:{k}"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ca" | "cell_averaging" => Ok(EstimatorKind::CellAveraging),
            "go" | "greatest_of" => Ok(EstimatorKind::GreatestOf),
            "so" | "smallest_of" => Ok(EstimatorKind::SmallestOf),
            other => {
                let k = other
                    .strip_prefix("os:")
                    .or_else(|| other.strip_prefix("ordered_statistic:"))
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| {
                        Error::InvalidParams(format!(
                            "unknown estimator '{s}' (expected ca, go, so or os:<k>)"
                        ))
                    })?;
                Ok(EstimatorKind::OrderedStatistic(k))
            }
        }
    }
}

/// Full threshold specification `T = scale_a * Z + offset_b`.
///
/// `window_w` is the total number of reference cells (both sides together),
/// so `Z` for cell averaging is a sum over `window_w` samples, not a mean.
/// Useful scales are therefore small: `a = pfa^(-1/W) - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    scale_a: f64,
    offset_b: f64,
    window_w: usize,
    guard_per_side: usize,
    estimator: EstimatorKind,
}

impl DetectorParams {
    pub fn new(
        scale_a: f64,
        offset_b: f64,
        window_w: usize,
        guard_per_side: usize,
        estimator: EstimatorKind,
    ) -> Result<Self> {
        if !(scale_a >= 0.0 && scale_a.is_finite()) {
            return Err(Error::InvalidParams(format!("scale a = {scale_a} must be >= 0")));
        }
        if !(offset_b >= 0.0 && offset_b.is_finite()) {
            return Err(Error::InvalidParams(format!("offset b = {offset_b} must be >= 0")));
        }
        if window_w < 2 || window_w % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "window W = {window_w} must be even and at least 2"
            )));
        }
        if scale_a == 0.0 && offset_b == 0.0 {
            return Err(Error::InvalidParams(
                "a = 0 and b = 0 flags every positive sample".into(),
            ));
        }
        if let EstimatorKind::OrderedStatistic(k) = estimator {
            if k == 0 || k > window_w {
                return Err(Error::InvalidParams(format!(
                    "ordered statistic rank {k} outside 1..={window_w}"
                )));
            }
        }
        Ok(Self {
            scale_a,
            offset_b,
            window_w,
            guard_per_side,
            estimator,
        })
    }

    /// Cell-averaging detector with the default guard band.
    pub fn cell_averaging(scale_a: f64, offset_b: f64, window_w: usize) -> Result<Self> {
        Self::new(scale_a, offset_b, window_w, DEFAULT_GUARD, EstimatorKind::CellAveraging)
    }

    /// Same as [`DetectorParams::new`] but takes the half window `N` (`W = 2N`).
    pub fn from_half_window(
        scale_a: f64,
        offset_b: f64,
        half_window_n: usize,
        guard_per_side: usize,
        estimator: EstimatorKind,
    ) -> Result<Self> {
        Self::new(scale_a, offset_b, 2 * half_window_n, guard_per_side, estimator)
    }

    pub fn with_threshold(&self, scale_a: f64, offset_b: f64) -> Result<Self> {
        Self::new(scale_a, offset_b, self.window_w, self.guard_per_side, self.estimator)
    }

    pub fn scale_a(&self) -> f64 {
        self.scale_a
    }

    pub fn offset_b(&self) -> f64 {
        self.offset_b
    }

    pub fn window_w(&self) -> usize {
        self.window_w
    }

    pub fn half_window(&self) -> usize {
        self.window_w / 2
    }

    pub fn guard_per_side(&self) -> usize {
        self.guard_per_side
    }

    pub fn estimator(&self) -> EstimatorKind {
        self.estimator
    }

    /// Cells mirrored onto each end of a profile.
    pub fn padding(&self) -> usize {
        self.half_window() + self.guard_per_side
    }

    /// Shortest profile the sliding window can run on.
    pub fn min_profile_len(&self) -> usize {
        self.window_w + 2 * self.guard_per_side + 1
    }

    pub fn threshold(&self, z: f64) -> f64 {
        self.scale_a * z + self.offset_b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_threshold() {
        assert!(DetectorParams::cell_averaging(0.0, 0.0, 4).is_err());
        assert!(DetectorParams::cell_averaging(0.0, 1.0, 4).is_ok());
        assert!(DetectorParams::cell_averaging(1.0, 0.0, 4).is_ok());
    }

    #[test]
    fn window_must_be_even_and_positive() {
        assert!(DetectorParams::cell_averaging(1.0, 0.0, 0).is_err());
        assert!(DetectorParams::cell_averaging(1.0, 0.0, 3).is_err());
        assert!(DetectorParams::cell_averaging(1.0, 0.0, 2).is_ok());
    }

    #[test]
    fn rejects_negative_values_and_bad_rank() {
        assert!(DetectorParams::cell_averaging(-0.1, 1.0, 4).is_err());
        assert!(DetectorParams::cell_averaging(0.1, -1.0, 4).is_err());
        let os = |k| DetectorParams::new(1.0, 0.0, 4, 0, EstimatorKind::OrderedStatistic(k));
        assert!(os(0).is_err());
        assert!(os(5).is_err());
        assert!(os(4).is_ok());
    }

    #[test]
    fn half_window_constructor() {
        let p = DetectorParams::from_half_window(1.0, 20.0, 20, 2, EstimatorKind::CellAveraging)
            .unwrap();
        assert_eq!(p.window_w(), 40);
        assert_eq!(p.guard_per_side(), 2);
        assert_eq!(p.min_profile_len(), 45);
    }

    #[test]
    fn estimator_names_round_trip() {
        for kind in [
            EstimatorKind::CellAveraging,
            EstimatorKind::GreatestOf,
            EstimatorKind::SmallestOf,
            EstimatorKind::OrderedStatistic(7),
        ] {
            assert_eq!(kind.to_string().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("median".parse::<EstimatorKind>().is_err());
    }
}
