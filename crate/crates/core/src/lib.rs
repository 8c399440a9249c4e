//! Radar target detection with an affine noise-level threshold.
//!
//! The detector flags a cell when its square-law intensity exceeds
//! `a * Z + b`, where `Z` is a noise statistic from a sliding reference
//! window. `b = 0` gives classical CA-CFAR and `a = 0` a fixed-level
//! detector; in between, the false-alarm probability stays below
//! `(1 + a)^-W` for any background power.
//!
//! Modules:
//! - [`scan`], [`params`], [`pose`], [`io`]: shared types and file formats.
//! - [`detector`]: noise estimators and thresholding.
//! - [`analysis`]: closed-form PFA/PD and Monte Carlo validation.
//! - [`simulator`]: synthetic scans with ground truth.
//! - [`odometry`]: ICP scan matching chained into a trajectory.
//! - [`metrics`]: ATE and KITTI-style relative errors.
//! - [`learning`]: grid search over `(a, b)`.

pub mod analysis;
pub mod detector;
pub mod error;
pub mod io;
pub mod learning;
pub mod metrics;
pub mod odometry;
pub mod params;
pub mod pose;
pub mod scan;
pub mod simulator;

pub use error::{Error, Result};
pub use params::{DetectorParams, EstimatorKind};
pub use pose::{Pose2D, Rigid2, Trajectory};
pub use scan::{DetectionSet, Point, PolarScan};
