//! Synthetic polar scans with ground truth.
//!
//! Every cell draws an exponential sample with mean `2μ(r)`; cells hit by a
//! landmark draw with mean `2μ(r)(1 + S·weight)` instead, where the weight
//! halves for each further range bin the target spreads into. The noise floor
//! is radial: `μ(r) = μ0 (1 + α exp(-r / r0))`.
//!
//! Randomness is keyed per azimuth row (ChaCha stream = row index) and per
//! scan (seed derived from the sequence seed and the scan index), so output
//! depends only on the inputs and the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pose::{Pose2D, Rigid2, Trajectory};
use crate::scan::{azimuth_index, PolarScan};

/// Default bound on the relative change of μ between adjacent range bins.
pub const DEFAULT_MAX_RELATIVE_STEP: f64 = 0.05;

/// Radial background power `μ(r) = μ0 (1 + α exp(-r / r0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloor {
    pub mu0: f64,
    pub alpha: f64,
    pub r0: f64,
}

impl NoiseFloor {
    pub fn new(mu0: f64, alpha: f64, r0: f64) -> Result<Self> {
        if !(mu0 > 0.0 && mu0.is_finite()) {
            return Err(Error::Domain(format!("mu0 = {mu0} must be positive")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha = {alpha} must be >= 0")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Domain(format!("r0 = {r0} must be positive")));
        }
        Ok(Self { mu0, alpha, r0 })
    }

    pub fn flat(mu: f64) -> Result<Self> {
        Self::new(mu, 0.0, 1.0)
    }

    pub fn mu_at(&self, range: f64) -> f64 {
        self.mu0 * (1.0 + self.alpha * (-range / self.r0).exp())
    }

    /// Largest `|μ(r_{j+1}) / μ(r_j) - 1|` over the bin centers of a scan geometry.
    pub fn max_relative_step(&self, num_range_bins: usize, range_resolution: f64) -> f64 {
        (1..num_range_bins)
            .map(|j| {
                let prev = self.mu_at((j as f64 - 0.5) * range_resolution);
                let next = self.mu_at((j as f64 + 0.5) * range_resolution);
                (next / prev - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Background power field plus a target SNR, as used in analysis and simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub floor: NoiseFloor,
    pub snr_s: f64,
    pub max_relative_step: f64,
}

impl NoiseModel {
    pub fn new(floor: NoiseFloor, snr_s: f64) -> Result<Self> {
        if !(snr_s >= 0.0 && snr_s.is_finite()) {
            return Err(Error::Domain(format!("snr = {snr_s} must be >= 0")));
        }
        Ok(Self {
            floor,
            snr_s,
            max_relative_step: DEFAULT_MAX_RELATIVE_STEP,
        })
    }

    /// Checks smoothness of μ on a scan geometry.
    pub fn validate(&self, config: &SimConfig) -> Result<()> {
        let step = self
            .floor
            .max_relative_step(config.num_range_bins, config.range_resolution);
        if step >= self.max_relative_step {
            return Err(Error::Domain(format!(
                "noise floor changes by {:.1}% between adjacent bins (limit {:.1}%)",
                100.0 * step,
                100.0 * self.max_relative_step
            )));
        }
        Ok(())
    }

    /// Mean of a noise-only sample at range `r`.
    pub fn noise_mean(&self, r: f64) -> f64 {
        2.0 * self.floor.mu_at(r)
    }

    /// Mean of a target sample at range `r`.
    pub fn target_mean(&self, r: f64) -> f64 {
        self.noise_mean(r) * (1.0 + self.snr_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub snr: f64,
    pub spread_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn new(min_x: f64, max_x: f64, min_y: f64, max_y: f64) -> Result<Self> {
        if !(min_x < max_x && min_y < max_y) {
            return Err(Error::Domain(format!(
                "degenerate bounds [{min_x}, {max_x}] x [{min_y}, {max_y}]"
            )));
        }
        Ok(Self {
            min_x,
            max_x,
            min_y,
            max_y,
        })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.min_x..=self.max_x).contains(&x) && (self.min_y..=self.max_y).contains(&y)
    }

    pub fn area(&self) -> f64 {
        (self.max_x - self.min_x) * (self.max_y - self.min_y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub landmarks: Vec<Landmark>,
    pub bounds: Bounds,
    pub noise_floor: NoiseFloor,
    pub max_range: f64,
    pub seed: u64,
}

impl WorldSpec {
    pub fn new(
        landmarks: Vec<Landmark>,
        bounds: Bounds,
        noise_floor: NoiseFloor,
        max_range: f64,
        seed: u64,
    ) -> Result<Self> {
        for (k, l) in landmarks.iter().enumerate() {
            if !bounds.contains(l.x, l.y) {
                return Err(Error::Domain(format!("landmark {k} lies outside the bounds")));
            }
            if !(l.snr >= 0.0 && l.snr.is_finite()) || l.spread_bins == 0 {
                return Err(Error::Domain(format!("landmark {k} has invalid snr or spread")));
            }
        }
        if !(max_range > 0.0) {
            return Err(Error::Domain(format!("max range {max_range} must be positive")));
        }
        Ok(Self {
            landmarks,
            bounds,
            noise_floor,
            max_range,
            seed,
        })
    }

    /// Ground-truth table rows `(x, y, snr)`.
    pub fn landmark_table(&self) -> Vec<(f64, f64, f64)> {
        self.landmarks.iter().map(|l| (l.x, l.y, l.snr)).collect()
    }
}

/// Sensor geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub num_azimuths: usize,
    pub num_range_bins: usize,
    pub range_resolution: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_azimuths: 400,
            num_range_bins: 512,
            range_resolution: 0.25,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_azimuths == 0 || self.num_range_bins == 0 || !(self.range_resolution > 0.0) {
            return Err(Error::Domain(format!("invalid sensor geometry {self:?}")));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.num_azimuths * self.num_range_bins
    }
}

/// Parameters for [`generate_world`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldParams {
    pub bounds: Bounds,
    /// Landmarks per square meter; the count is `round(density * area)`.
    pub density: f64,
    /// SNRs are log-uniform in `[lo, hi]`.
    pub snr_range: (f64, f64),
    /// Spread is uniform over `lo..=hi` range bins.
    pub spread_range: (usize, usize),
    pub noise_floor: NoiseFloor,
    pub max_range: f64,
}

impl WorldParams {
    pub fn new(bounds: Bounds, density: f64, noise_floor: NoiseFloor, max_range: f64) -> Self {
        Self {
            bounds,
            density,
            snr_range: (10.0, 1000.0),
            spread_range: (1, 3),
            noise_floor,
            max_range,
        }
    }

    /// Density that yields exactly `count` landmarks in `bounds`.
    pub fn with_count(mut self, count: usize) -> Self {
        self.density = count as f64 / self.bounds.area();
        self
    }
}

/// Uniformly scattered landmarks with log-uniform SNR.
pub fn generate_world(params: &WorldParams, seed: u64) -> Result<WorldSpec> {
    let b = Bounds::new(
        params.bounds.min_x,
        params.bounds.max_x,
        params.bounds.min_y,
        params.bounds.max_y,
    )?;
    if !(params.density > 0.0 && params.density.is_finite()) {
        return Err(Error::Domain(format!("density {} must be positive", params.density)));
    }
    let (lo, hi) = params.snr_range;
    if !(lo > 0.0 && lo <= hi) {
        return Err(Error::Domain(format!("invalid snr range [{lo}, {hi}]")));
    }
    let (s_lo, s_hi) = params.spread_range;
    if s_lo == 0 || s_lo > s_hi {
        return Err(Error::Domain(format!("invalid spread range {s_lo}..={s_hi}")));
    }
    let count = (params.density * b.area()).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let landmarks = (0..count)
        .map(|_| {
            let x = rng.random_range(b.min_x..=b.max_x);
            let y = rng.random_range(b.min_y..=b.max_y);
            let snr = if ln_hi > ln_lo {
                rng.random_range(ln_lo..ln_hi).exp()
            } else {
                lo
            };
            let spread_bins = rng.random_range(s_lo..=s_hi);
            Landmark { x, y, snr, spread_bins }
        })
        .collect();
    WorldSpec::new(landmarks, b, params.noise_floor, params.max_range, seed)
}

/// A landmark-affected cell: `gain` is the summed `S * weight` of every
/// landmark touching it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetCell {
    pub azimuth: usize,
    pub bin: usize,
    pub gain: f64,
}

/// Cells hit by landmarks seen from `pose`, sorted by (azimuth, bin).
pub fn target_cells(world: &WorldSpec, pose: &Pose2D, config: &SimConfig) -> Vec<TargetCell> {
    let to_sensor = pose.rigid().inverse();
    let max_range = world
        .max_range
        .min(config.num_range_bins as f64 * config.range_resolution);
    let mut cells: Vec<TargetCell> = Vec::new();
    for l in &world.landmarks {
        let (x, y) = to_sensor.apply(l.x, l.y);
        let r = x.hypot(y);
        if r >= max_range {
            continue;
        }
        let azimuth = azimuth_index(y.atan2(x), config.num_azimuths);
        let bin0 = (r / config.range_resolution).floor() as usize;
        let mut weight = 1.0;
        for bin in bin0..(bin0 + l.spread_bins).min(config.num_range_bins) {
            cells.push(TargetCell {
                azimuth,
                bin,
                gain: l.snr * weight,
            });
            weight *= 0.5;
        }
    }
    cells.sort_by_key(|c| (c.azimuth, c.bin));
    // Merge landmarks sharing a cell.
    let mut merged: Vec<TargetCell> = Vec::with_capacity(cells.len());
    for c in cells {
        match merged.last_mut() {
            Some(last) if last.azimuth == c.azimuth && last.bin == c.bin => last.gain += c.gain,
            _ => merged.push(c),
        }
    }
    merged
}

/// Renders one scan from `pose`.
pub fn render_scan(
    world: &WorldSpec,
    pose: &Pose2D,
    config: &SimConfig,
    seed: u64,
) -> Result<PolarScan> {
    config.validate()?;
    if !world.bounds.contains(pose.x, pose.y) {
        return Err(Error::Domain(format!(
            "pose ({}, {}) lies outside the world bounds",
            pose.x, pose.y
        )));
    }
    let model = NoiseModel::new(world.noise_floor, 0.0)?;
    model.validate(config)?;

    let bins = config.num_range_bins;
    let mut gain = vec![0.0; config.num_cells()];
    for c in target_cells(world, pose, config) {
        gain[c.azimuth * bins + c.bin] = c.gain;
    }
    let noise_mean: Vec<f64> = (0..bins)
        .map(|j| model.noise_mean((j as f64 + 0.5) * config.range_resolution))
        .collect();

    let rows: Vec<Vec<f64>> = (0..config.num_azimuths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let row_gain = &gain[i * bins..(i + 1) * bins];
            (0..bins)
                .map(|j| {
                    let e: f64 = Exp1.sample(&mut rng);
                    e * noise_mean[j] * (1.0 + row_gain[j])
                })
                .collect()
        })
        .collect();
    PolarScan::new(
        config.num_azimuths,
        bins,
        config.range_resolution,
        rows.concat(),
    )
}

/// Per-scan seed derived from a sequence seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Renders one scan per trajectory pose with derived seeds.
pub fn render_sequence(
    world: &WorldSpec,
    trajectory: &Trajectory,
    config: &SimConfig,
    seed: u64,
) -> Result<Vec<PolarScan>> {
    trajectory
        .poses()
        .iter()
        .enumerate()
        .map(|(k, pose)| render_scan(world, pose, config, derive_seed(seed, k as u64)))
        .collect()
}

/// Mean number of landmark cells per scan along a trajectory.
pub fn mean_target_cells(world: &WorldSpec, trajectory: &Trajectory, config: &SimConfig) -> f64 {
    let total: usize = trajectory
        .poses()
        .iter()
        .map(|p| target_cells(world, p, config).len())
        .sum();
    total as f64 / trajectory.len().max(1) as f64
}

/// Shared fixture: a landmark world, a constant-velocity run through it and
/// the rendered scans.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub world: WorldSpec,
    pub trajectory: Trajectory,
    pub config: SimConfig,
    pub scans: Vec<PolarScan>,
}

/// Settings for [`Benchmark::generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSpec {
    pub num_landmarks: usize,
    pub num_poses: usize,
    pub step_m: f64,
    pub yaw_rate: f64,
    pub dt: f64,
    pub config: SimConfig,
    pub noise_floor: NoiseFloor,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            num_landmarks: 200,
            num_poses: 50,
            step_m: 1.8,
            yaw_rate: 0.004,
            dt: 1.0,
            config: SimConfig {
                num_azimuths: 400,
                num_range_bins: 256,
                range_resolution: 0.5,
            },
            noise_floor: NoiseFloor {
                mu0: 2.0,
                alpha: 4.0,
                r0: 15.0,
            },
            seed: 42,
        }
    }
}

impl Benchmark {
    pub fn generate(spec: &BenchmarkSpec) -> Result<Self> {
        let trajectory =
            Trajectory::constant_velocity(spec.num_poses, spec.dt, spec.step_m, spec.yaw_rate)?;
        let max_range = spec.config.num_range_bins as f64 * spec.config.range_resolution;
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for p in trajectory.poses() {
            lo_x = lo_x.min(p.x);
            hi_x = hi_x.max(p.x);
            lo_y = lo_y.min(p.y);
            hi_y = hi_y.max(p.y);
        }
        // Landmarks fill the region the sensor can see along the run.
        let reach = 0.7 * max_range;
        let bounds = Bounds::new(lo_x - reach, hi_x + reach, lo_y - reach, hi_y + reach)?;
        let params = WorldParams::new(bounds, 1.0, spec.noise_floor, max_range)
            .with_count(spec.num_landmarks);
        let world = generate_world(&params, spec.seed)?;
        let scans = render_sequence(&world, &trajectory, &spec.config, derive_seed(spec.seed, 1 << 32))?;
        Ok(Self {
            world,
            trajectory,
            config: spec.config,
            scans,
        })
    }

    pub fn mean_target_cells(&self) -> f64 {
        mean_target_cells(&self.world, &self.trajectory, &self.config)
    }
}

/// Cells rendered with pure noise (no landmarks), used for false-alarm checks.
pub fn render_noise(floor: &NoiseFloor, config: &SimConfig, seed: u64) -> Result<PolarScan> {
    let max_range = config.num_range_bins as f64 * config.range_resolution;
    let bounds = Bounds::new(-1.0, 1.0, -1.0, 1.0)?;
    let world = WorldSpec::new(Vec::new(), bounds, *floor, max_range, seed)?;
    render_scan(&world, &Pose2D::new(0.0, 0.0, 0.0, 0.0), config, seed)
}

/// Landmark positions seen from `pose`, in the sensor frame.
pub fn landmarks_in_sensor_frame(world: &WorldSpec, pose: &Pose2D) -> Vec<(f64, f64)> {
    let to_sensor: Rigid2 = pose.rigid().inverse();
    world
        .landmarks
        .iter()
        .map(|l| to_sensor.apply(l.x, l.y))
        .collect()
}
