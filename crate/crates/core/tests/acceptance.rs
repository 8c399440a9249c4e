//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use bfar::analysis::{
    mc_estimate, pd_closed_form, pfa_closed_form, pfa_upper_bound, solve_a_for_bound,
    wilson_interval, McConfig,
};
use bfar::detector::{ca_cfar_scan, detect_profile, detect_scan, fixed_level_scan};
use bfar::learning::{grid_search, sensitivity_sweep, LearnConfig, TrainingSet, DEFAULT_B_GRID};
use bfar::metrics::{ate_rmse, kitti_relative_errors, DESK_LENGTHS, SEGMENT_REACH_TOLERANCE};
use bfar::odometry::{icp_register, IcpConfig};
use bfar::simulator::{render_noise, Benchmark, BenchmarkSpec, NoiseFloor, SimConfig};
use bfar::{DetectorParams, EstimatorKind, PolarScan, Pose2D, Rigid2, Trajectory};

/// Frozen from the first verified run of the bundled benchmark.
const REGRESSION_B: f64 = 5.0;
const REGRESSION_TRANSL_PCT: f64 = 0.3875408232406306;
const REGRESSION_ATE_M: f64 = 0.09451410327707248;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn same_to_2_sig(x: f64, reference: f64) -> bool {
    let mag = 10f64.powf(reference.abs().log10().floor() - 1.0);
    (x / mag).round() == (reference / mag).round()
}

fn pfa_bound_table() -> Outcome {
    let a = [0.25, 0.5, 1.0, 2.0, 3.0];
    let published = [0.0115, 3.0e-4, 9.54e-7, 2.87e-10, 9.09e-13];
    let mut bad = Vec::new();
    for (a, p) in a.iter().zip(published) {
        let v = pfa_upper_bound(*a, 20).unwrap();
        if !same_to_2_sig(v, p) {
            bad.push(format!("a={a}: {v:.3e} vs {p:e}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "5/5 match".into() } else { bad.join("; ") })
}

fn closed_form_vs_monte_carlo() -> Outcome {
    let mut points = Vec::new();
    for w in [8usize, 16, 32] {
        for bound in [1e-2, 1e-3] {
            for (k, ratio) in [0.0, 0.5, 1.0, 2.0].into_iter().enumerate() {
                let mu = if k % 2 == 0 { 1.0 } else { 5.0 };
                let s = if (k / 2) % 2 == 0 { 5.0 } else { 20.0 };
                let a = solve_a_for_bound(bound, w).unwrap();
                points.push((a, ratio * 2.0 * mu, mu, s, w));
            }
        }
    }
    let mut checked = 0;
    let mut bad = Vec::new();
    for (idx, &(a, b, mu, s, w)) in points.iter().enumerate() {
        let mc = mc_estimate(&McConfig {
            a,
            b,
            mu,
            snr: s,
            w,
            guard: 2,
            trials: 10_000_000,
            seed: 1000 + idx as u64,
        })
        .unwrap();
        let pfa = pfa_closed_form(a, b, mu, w).unwrap();
        let pd = pd_closed_form(a, b, mu, s, w).unwrap();
        for (name, closed, est, half) in [
            ("pfa", pfa, mc.pfa, mc.wilson_halfwidth),
            ("pd", pd, mc.pd, mc.pd_wilson_halfwidth),
        ] {
            if closed < 1e-5 {
                continue;
            }
            checked += 1;
            if (closed - est).abs() > 3.0 * half {
                bad.push(format!("point {idx} {name}: closed {closed:.4e} mc {est:.4e} hw {half:.1e}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} points, {checked} probabilities checked{}", points.len(), fail_suffix(&bad)),
    )
}

fn fail_suffix(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; {} off: {}", bad.len(), bad.join("; "))
    }
}

fn degeneracy_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let scans = 1000;
    for _ in 0..scans {
        let w = 2 * rng.random_range(1..=16usize);
        let guard = rng.random_range(0..=4usize);
        let azimuths = rng.random_range(1..=6usize);
        let bins = rng.random_range(w + 2 * guard + 1..=200);
        let quantized = rng.random_bool(0.5);
        let cells: Vec<f64> = (0..azimuths * bins)
            .map(|_| {
                let x: f64 = Exp1.sample(&mut rng);
                let x = 10.0 * x * if rng.random_bool(0.02) { 30.0 } else { 1.0 };
                if quantized {
                    x.floor()
                } else {
                    x
                }
            })
            .collect();
        let scan = PolarScan::new(azimuths, bins, 0.5, cells).unwrap();
        let a = rng.random_range(0.01..3.0);
        let level = rng.random_range(0.5..80.0);

        let ca = DetectorParams::new(a, 0.0, w, guard, EstimatorKind::CellAveraging).unwrap();
        if detect_scan(&scan, &ca).unwrap().mask != ca_cfar_scan(&scan, a, w, guard).unwrap().mask {
            mismatches += 1;
        }
        let fixed = DetectorParams::new(0.0, level, w, guard, EstimatorKind::CellAveraging).unwrap();
        if detect_scan(&scan, &fixed).unwrap().mask != fixed_level_scan(&scan, level).unwrap().mask {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{scans} scans x 2 reductions, {mismatches} mask mismatches"),
    )
}

fn bound_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = 16;
    let config = SimConfig {
        num_azimuths: 64,
        num_range_bins: 512,
        range_resolution: 0.25,
    };
    let (mut sum_far, mut sum_bound) = (0.0, 0.0);
    let mut bad = Vec::new();
    for k in 0..100u64 {
        let a = rng.random_range(0.05..0.2);
        let mu = 10f64.powf(rng.random_range(-0.3..1.3));
        let b = rng.random_range(0.05..2.0) * 2.0 * mu;
        let scan = render_noise(&NoiseFloor::flat(mu).unwrap(), &config, 500 + k).unwrap();
        let params = DetectorParams::new(a, b, w, 2, EstimatorKind::CellAveraging).unwrap();
        let hits: u64 = scan
            .rows()
            .map(|row| detect_profile(row, &params).unwrap().iter().filter(|d| **d).count() as u64)
            .sum();
        let n = scan.len() as u64;
        let far = hits as f64 / n as f64;
        let (_, half) = wilson_interval(hits, n);
        let bound = pfa_upper_bound(a, w).unwrap();
        if far > bound + 3.0 * half {
            bad.push(format!("a={a:.3} b={b:.2} mu={mu:.2}: {far:.3e} > {bound:.3e}"));
        }
        sum_far += far;
        sum_bound += bound;
    }
    let ok = bad.is_empty() && sum_far < sum_bound;
    outcome(
        ok,
        format!(
            "100 triples, mean FAR {:.3e} vs mean bound {:.3e}{}",
            sum_far / 100.0,
            sum_bound / 100.0,
            fail_suffix(&bad)
        ),
    )
}

fn sensitivity_and_regression(bench: &Benchmark) -> (Outcome, Outcome) {
    let set = TrainingSet {
        scans: &bench.scans,
        ground_truth: &bench.trajectory,
    };
    let base = DetectorParams::new(1.0, 0.0, 20, 2, EstimatorKind::CellAveraging).unwrap();
    let config = LearnConfig::default();
    let cells = bench.config.num_cells() as f64;
    let landmark_cells = bench.mean_target_cells();

    let report = grid_search(set, &[1.0], &DEFAULT_B_GRID, &base, &config).unwrap();
    let in_band: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.b > 0.0 && r.status.is_ok())
        .filter(|r| {
            let ratio = r.detection_count_mean / landmark_cells;
            (0.5..=2.0).contains(&ratio)
        })
        .map(|r| r.b)
        .collect();

    let sweep = sensitivity_sweep(set, &base, &[0.5, 1e-12], &config).unwrap();
    let flood = sweep[0].detections_per_scan / cells;
    let sparse = sweep[1].detections_per_azimuth;
    let sensitivity = outcome(
        flood > 0.25 && sparse < 1.0 && !in_band.is_empty(),
        format!(
            "PFA 0.5: {:.1}% of cells; PFA 1e-12: {sparse:.3}/azimuth; \
             a=1 cells within [0.5x, 2x] of {landmark_cells:.0} landmark cells at b = {in_band:?}",
            100.0 * flood
        ),
    );

    let best = report.best_row();
    let rel = |x: f64, r: f64| ((x - r) / r).abs();
    let regression = outcome(
        best.b == REGRESSION_B
            && rel(best.transl_pct, REGRESSION_TRANSL_PCT) <= 0.01
            && rel(best.ate_m, REGRESSION_ATE_M) <= 0.01,
        format!(
            "learned b={} transl {:.4}% (frozen {REGRESSION_TRANSL_PCT:.4}) ate {:.4} m (frozen {REGRESSION_ATE_M:.4})",
            best.b, best.transl_pct, best.ate_m
        ),
    );
    (sensitivity, regression)
}

/// Five points on irregular radii. Under any rotation up to 20 degrees and
/// translation up to 0.2 m per axis, every point moves less than half the
/// smallest pairwise spacing, so nearest neighbours are the true matches from
/// the first iteration.
fn constellation() -> Vec<(f64, f64)> {
    [3.0, 2.0, 2.6, 2.2, 2.8]
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let theta = (72.0 * k as f64).to_radians();
            (r * theta.cos(), r * theta.sin())
        })
        .collect()
}

fn icp_oracle() -> Outcome {
    let cloud = constellation();
    let (max_yaw, max_shift) = (20f64.to_radians(), 0.2);
    let spacing = cloud
        .iter()
        .enumerate()
        .flat_map(|(i, p)| cloud[i + 1..].iter().map(move |q| (p.0 - q.0).hypot(p.1 - q.1)))
        .fold(f64::INFINITY, f64::min);
    let reach = cloud.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
    let travel = 2.0 * reach * (max_yaw / 2.0).sin() + max_shift * 2f64.sqrt();
    if 2.0 * travel >= spacing {
        return outcome(false, format!("constellation too tight: travel {travel:.3} spacing {spacing:.3}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = IcpConfig {
        max_distance: f64::INFINITY,
        tolerance: 1e-12,
        ..IcpConfig::default()
    };
    let (mut worst_t, mut worst_r) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let truth = Rigid2::new(
            rng.random_range(-max_shift..=max_shift),
            rng.random_range(-max_shift..=max_shift),
            rng.random_range(-max_yaw..=max_yaw),
        );
        let target: Vec<(f64, f64)> = cloud.iter().map(|p| truth.apply(p.0, p.1)).collect();
        let got = icp_register(&cloud, &target, &config).unwrap().transform;
        worst_t = worst_t.max((got.x - truth.x).hypot(got.y - truth.y));
        worst_r = worst_r.max((got.yaw - truth.yaw).abs());
    }
    outcome(
        worst_t <= 1e-5 && worst_r <= 1e-5,
        format!("100 perturbations up to 20 deg, worst {worst_t:.2e} m / {worst_r:.2e} rad"),
    )
}

type Mat3 = [[f64; 3]; 3];

fn mat(x: f64, y: f64, yaw: f64) -> Mat3 {
    let (s, c) = yaw.sin_cos();
    [[c, -s, x], [s, c, y], [0.0, 0.0, 1.0]]
}

fn mul(p: &Mat3, q: &Mat3) -> Mat3 {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
        }
    }
    r
}

fn inv(m: &Mat3) -> Mat3 {
    let (c, s) = (m[0][0], m[1][0]);
    let (x, y) = (m[0][2], m[1][2]);
    [[c, s, -(c * x + s * y)], [-s, c, s * x - c * y], [0.0, 0.0, 1.0]]
}

/// Straightforward reference evaluator on homogeneous matrices.
fn reference_metrics(est: &[Pose2D], gt: &[Pose2D], lengths: &[f64]) -> (f64, f64, f64) {
    let e: Vec<Mat3> = est.iter().map(|p| mat(p.x, p.y, p.yaw)).collect();
    let g: Vec<Mat3> = gt.iter().map(|p| mat(p.x, p.y, p.yaw)).collect();
    let (e0, g0) = (inv(&e[0]), inv(&g[0]));
    let mut sse = 0.0;
    for k in 1..e.len() {
        let (a, b) = (mul(&e0, &e[k]), mul(&g0, &g[k]));
        sse += (a[0][2] - b[0][2]).powi(2) + (a[1][2] - b[1][2]).powi(2);
    }
    let ate = (sse / (e.len() - 1) as f64).sqrt();

    let mut dist = vec![0.0];
    for k in 1..gt.len() {
        let d = (gt[k].x - gt[k - 1].x).hypot(gt[k].y - gt[k - 1].y);
        dist.push(dist[k - 1] + d);
    }
    let (mut t_means, mut r_means) = (Vec::new(), Vec::new());
    for &len in lengths {
        let (mut t, mut r, mut n) = (0.0, 0.0, 0);
        for i in 0..gt.len() {
            for j in i..gt.len() {
                if dist[j] - dist[i] >= len * (1.0 - SEGMENT_REACH_TOLERANCE) {
                    let dg = mul(&inv(&g[i]), &g[j]);
                    let de = mul(&inv(&e[i]), &e[j]);
                    let err = mul(&inv(&de), &dg);
                    t += err[0][2].hypot(err[1][2]) / len;
                    r += err[1][0].atan2(err[0][0]).abs() / len;
                    n += 1;
                    break;
                }
            }
        }
        if n > 0 {
            t_means.push(t / n as f64);
            r_means.push(r / n as f64);
        }
    }
    let m = t_means.len() as f64;
    (
        ate,
        100.0 * t_means.iter().sum::<f64>() / m,
        100.0 * (r_means.iter().sum::<f64>() / m) * 180.0 / PI,
    )
}

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let runs = 50;
    for _ in 0..runs {
        let n = rng.random_range(20..=200usize);
        let mut gt = Vec::with_capacity(n);
        let mut est = Vec::with_capacity(n);
        let (mut g, mut e) = (Rigid2::new(5.0, -3.0, 0.4), Rigid2::new(5.0, -3.0, 0.4));
        for k in 0..n {
            gt.push(Pose2D::from_rigid(k as f64 * 0.1, g));
            est.push(Pose2D::from_rigid(k as f64 * 0.1, e));
            let step = Rigid2::new(rng.random_range(1.0..3.0), rng.random_range(-0.2..0.2), rng.random_range(-0.1..0.1));
            let noise = Rigid2::new(
                0.03 * rng.random_range(-1.0..1.0) + 0.01,
                0.03 * rng.random_range(-1.0..1.0),
                0.005 * rng.random_range(-1.0..1.0),
            );
            g = g.compose(&step);
            e = e.compose(&step.compose(&noise));
        }
        let (t_gt, t_est) = (Trajectory::new(gt.clone()).unwrap(), Trajectory::new(est.clone()).unwrap());
        let ate = ate_rmse(&t_est, &t_gt).unwrap();
        let rel = kitti_relative_errors(&t_est, &t_gt, &DESK_LENGTHS).unwrap();
        let (r_ate, r_t, r_r) = reference_metrics(&est, &gt, &DESK_LENGTHS);
        worst = worst
            .max((ate - r_ate).abs())
            .max((rel.translation_pct - r_t).abs())
            .max((rel.rotation_deg_per_100m - r_r).abs());
    }
    outcome(worst <= 1e-12, format!("{runs} sequences of 20-200 poses, worst difference {worst:.2e}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let bench = Benchmark::generate(&BenchmarkSpec::default()).expect("benchmark generation");
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "PFA bound table", pfa_bound_table()),
        (2, "closed form vs Monte Carlo", closed_form_vs_monte_carlo()),
        (3, "degeneracy equivalences", degeneracy_equivalences()),
        (4, "false-alarm bound", bound_property()),
    ];
    let (sensitivity, regression) = sensitivity_and_regression(&bench);
    results.push((5, "detector sensitivity", sensitivity));
    results.push((6, "odometry regression", regression));
    results.push((7, "ICP oracle", icp_oracle()));
    results.push((8, "metrics oracle", metrics_oracle()));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
