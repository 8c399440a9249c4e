//! Offline tuning of the detector threshold `(a, b)` by grid search over
//! odometry accuracy on a training sequence.
//!
//! The usual procedure: fix the window, pick `a` from a target false-alarm
//! bound with [`solve_a_for_bound`](crate::analysis::solve_a_for_bound), and
//! learn `b` from data. Learned values stay fixed afterwards.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{pfa_upper_bound, solve_a_for_bound};
use crate::detector::{detect_with_noise, noise_field};
use crate::error::{Error, Result};
use crate::metrics::{ate_rmse, kitti_relative_errors, DESK_LENGTHS};
use crate::odometry::{chain_clouds, IcpConfig};
use crate::params::DetectorParams;
use crate::pose::Trajectory;
use crate::scan::{Point, PolarScan};

/// Scale grid used for the published error surface.
pub const DEFAULT_A_GRID: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0];

/// Offset grid used for the published error surface.
pub const DEFAULT_B_GRID: [f64; 8] = [5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 60.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Translation,
    Ate,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translation" | "transl" => Ok(Objective::Translation),
            "ate" => Ok(Objective::Ate),
            _ => Err(Error::Domain(format!("unknown objective '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub objective: Objective,
    pub icp: IcpConfig,
    pub lengths: Vec<f64>,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Translation,
            icp: IcpConfig::default(),
            lengths: DESK_LENGTHS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    InvalidParams(String),
    OdometryFailed { index: usize },
    MetricsFailed(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => write!(f, "ok"),
            CellStatus::InvalidParams(_) => write!(f, "invalid"),
            CellStatus::OdometryFailed { index } => write!(f, "odometry_failed@{index}"),
            CellStatus::MetricsFailed(_) => write!(f, "metrics_failed"),
        }
    }
}

/// Pipeline outcome for one `(a, b)` setting. Metrics are NaN unless `status` is ok.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub a: f64,
    pub b: f64,
    pub pfa_ub: f64,
    pub transl_pct: f64,
    pub rot_deg: f64,
    pub ate_m: f64,
    /// Mean detections per scan; NaN when the parameters were rejected.
    pub detection_count_mean: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchReport {
    pub window_w: usize,
    pub rows: Vec<GridRow>,
    /// Index into `rows` of the selected cell.
    pub best: usize,
}

impl GridSearchReport {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,pfa_ub,transl_pct,rot_deg,ate_m,detection_count_mean,status\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.a, r.b, r.pfa_ub, r.transl_pct, r.rot_deg, r.ate_m, r.detection_count_mean, r.status
            )
            .expect("writing to a String");
        }
        out
    }

    /// Translation-error surface over `(pfa_ub, b)`.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("pfa_ub,b,transl_pct\n");
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.pfa_ub, r.b, r.transl_pct).expect("writing to a String");
        }
        out
    }
}

/// Training sequence: scans with the ground-truth pose of each.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a> {
    pub scans: &'a [PolarScan],
    pub ground_truth: &'a Trajectory,
}

impl TrainingSet<'_> {
    fn validate(&self) -> Result<()> {
        if self.scans.len() < 2 {
            return Err(Error::Domain("training sequence needs at least 2 scans".into()));
        }
        if self.scans.len() != self.ground_truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scans but {} ground-truth poses",
                self.scans.len(),
                self.ground_truth.len()
            )));
        }
        Ok(())
    }

    fn timestamps(&self) -> Vec<f64> {
        self.ground_truth.poses().iter().map(|p| p.t).collect()
    }
}

/// Noise fields shared by every grid cell with the same window settings.
struct Prepared<'a> {
    set: TrainingSet<'a>,
    noise: Vec<Vec<f64>>,
    timestamps: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(set: TrainingSet<'a>, base: &DetectorParams) -> Result<Self> {
        set.validate()?;
        let noise = set
            .scans
            .iter()
            .map(|s| noise_field(s, base))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            timestamps: set.timestamps(),
            set,
            noise,
        })
    }

    fn evaluate(&self, base: &DetectorParams, a: f64, b: f64, config: &LearnConfig) -> Result<GridRow> {
        let pfa_ub = pfa_upper_bound(a, base.window_w())?;
        let mut row = GridRow {
            a,
            b,
            pfa_ub,
            transl_pct: f64::NAN,
            rot_deg: f64::NAN,
            ate_m: f64::NAN,
            detection_count_mean: f64::NAN,
            status: CellStatus::Ok,
        };
        if let Err(e) = base.with_threshold(a, b) {
            row.status = CellStatus::InvalidParams(e.to_string());
            return Ok(row);
        }
        let clouds: Vec<Vec<Point>> = self
            .set
            .scans
            .iter()
            .zip(&self.noise)
            .map(|(scan, z)| detect_with_noise(scan, z, a, b).map(|d| d.points))
            .collect::<Result<_>>()?;
        let run = chain_clouds(&clouds, &self.timestamps, &config.icp)?;
        row.detection_count_mean = run.mean_detections();
        if let Some(f) = run.failure {
            row.status = CellStatus::OdometryFailed { index: f.index };
            return Ok(row);
        }
        let gt = self.set.ground_truth;
        match (
            kitti_relative_errors(&run.trajectory, gt, &config.lengths),
            ate_rmse(&run.trajectory, gt),
        ) {
            (Ok(rel), Ok(ate)) => {
                row.transl_pct = rel.translation_pct;
                row.rot_deg = rel.rotation_deg_per_100m;
                row.ate_m = ate;
            }
            (Err(e), _) | (_, Err(e)) => row.status = CellStatus::MetricsFailed(e.to_string()),
        }
        Ok(row)
    }
}

/// Runs detection, odometry and evaluation for every `(a, b)` pair.
///
/// Rows are ordered with `a` outer and `b` inner, in grid order. The best
/// cell minimizes the objective among successful cells; ties go to smaller
/// ATE, then smaller `b`, then smaller `a`.
pub fn grid_search(
    set: TrainingSet<'_>,
    a_grid: &[f64],
    b_grid: &[f64],
    base: &DetectorParams,
    config: &LearnConfig,
) -> Result<GridSearchReport> {
    if a_grid.is_empty() || b_grid.is_empty() {
        return Err(Error::Domain("grids must be non-empty".into()));
    }
    let prepared = Prepared::new(set, base)?;
    let cells: Vec<(f64, f64)> = a_grid
        .iter()
        .flat_map(|&a| b_grid.iter().map(move |&b| (a, b)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(a, b)| prepared.evaluate(base, a, b, config))
        .collect::<Result<Vec<_>>>()?;

    let key = |r: &GridRow| match config.objective {
        Objective::Translation => r.transl_pct,
        Objective::Ate => r.ate_m,
    };
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status.is_ok())
        .min_by(|(_, x), (_, y)| {
            key(x)
                .total_cmp(&key(y))
                .then(x.ate_m.total_cmp(&y.ate_m))
                .then(x.b.total_cmp(&y.b))
                .then(x.a.total_cmp(&y.a))
        })
        .map(|(k, _)| k)
        .ok_or(Error::AllCellsFailed)?;
    Ok(GridSearchReport {
        window_w: base.window_w(),
        rows,
        best,
    })
}

/// One CA-CFAR (`b = 0`) setting of a false-alarm sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pfa: f64,
    pub a: f64,
    pub transl_pct: f64,
    pub rot_deg: f64,
    pub ate_m: f64,
    pub detections_per_scan: f64,
    pub detections_per_azimuth: f64,
    pub status: CellStatus,
}

/// Runs the pipeline at `b = 0` for each target false-alarm probability.
pub fn sensitivity_sweep(
    set: TrainingSet<'_>,
    base: &DetectorParams,
    pfa_grid: &[f64],
    config: &LearnConfig,
) -> Result<Vec<SweepRow>> {
    let w = base.window_w();
    let scales = pfa_grid
        .iter()
        .map(|&p| solve_a_for_bound(p, w))
        .collect::<Result<Vec<_>>>()?;
    let prepared = Prepared::new(set, base)?;
    let azimuths = set.scans[0].num_azimuths() as f64;
    pfa_grid
        .par_iter()
        .zip(scales.par_iter())
        .map(|(&pfa, &a)| {
            let row = prepared.evaluate(base, a, 0.0, config)?;
            Ok(SweepRow {
                pfa,
                a,
                transl_pct: row.transl_pct,
                rot_deg: row.rot_deg,
                ate_m: row.ate_m,
                detections_per_scan: row.detection_count_mean,
                detections_per_azimuth: row.detection_count_mean / azimuths,
                status: row.status,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("pfa,a,transl_pct,rot_deg,ate_m,detections_per_scan,detections_per_azimuth,status\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.pfa, r.a, r.transl_pct, r.rot_deg, r.ate_m, r.detections_per_scan, r.detections_per_azimuth, r.status
        )
        .expect("writing to a String");
    }
    out
}
