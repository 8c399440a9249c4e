use bfar::metrics::ate_rmse;
use bfar::odometry::{chain_clouds, chain_odometry, IcpConfig, PointFilter};
use bfar::simulator::{
    derive_seed, generate_world, landmarks_in_sensor_frame, render_sequence, Benchmark,
    BenchmarkSpec, Bounds, NoiseFloor, SimConfig, WorldParams,
};
use bfar::{DetectorParams, EstimatorKind, Point, Pose2D, Trajectory};

fn detector() -> PointFilter {
    PointFilter::Detector(DetectorParams::new(1.0, 20.0, 20, 2, EstimatorKind::CellAveraging).unwrap())
}

fn times(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64).collect()
}

#[test]
fn stationary_sensor_stays_put() {
    let config = SimConfig {
        num_azimuths: 400,
        num_range_bins: 256,
        range_resolution: 0.5,
    };
    let floor = NoiseFloor::new(2.0, 4.0, 15.0).unwrap();
    let params = WorldParams::new(Bounds::new(-90.0, 90.0, -90.0, 90.0).unwrap(), 1.0, floor, 128.0)
        .with_count(150);
    let world = generate_world(&params, 5).unwrap();
    let gt = Trajectory::new((0..8).map(|k| Pose2D::new(k as f64, 0.0, 0.0, 0.0)).collect()).unwrap();
    let scans = render_sequence(&world, &gt, &config, derive_seed(5, 99)).unwrap();
    let run = chain_odometry(&scans, &times(8), &detector(), &IcpConfig::default()).unwrap();
    assert!(run.is_complete());
    for p in run.trajectory.poses() {
        assert!(p.x.hypot(p.y) < 0.1 && p.yaw.abs() < 0.2f64.to_radians(), "{p:?}");
    }
}

#[test]
fn straight_run_length_within_two_percent() {
    let spec = BenchmarkSpec {
        num_poses: 10,
        yaw_rate: 0.0,
        seed: 3,
        ..BenchmarkSpec::default()
    };
    let bench = Benchmark::generate(&spec).unwrap();
    let run = chain_odometry(&bench.scans, &times(10), &detector(), &IcpConfig::default()).unwrap();
    assert!(run.is_complete());
    let est = run.trajectory.path_distances();
    let truth = bench.trajectory.path_distances();
    let (e, t) = (est.last().unwrap(), truth.last().unwrap());
    assert!((e / t - 1.0).abs() < 0.02, "estimated {e} m, true {t} m");
}

#[test]
fn perfect_detections_give_negligible_drift() {
    let spec = BenchmarkSpec {
        num_poses: 30,
        ..BenchmarkSpec::default()
    };
    let bench = Benchmark::generate(&spec).unwrap();
    let clouds: Vec<Vec<Point>> = bench
        .trajectory
        .poses()
        .iter()
        .map(|p| {
            landmarks_in_sensor_frame(&bench.world, p)
                .into_iter()
                .map(|(x, y)| Point { x, y, intensity: 1.0 })
                .collect()
        })
        .collect();
    let stamps: Vec<f64> = bench.trajectory.poses().iter().map(|p| p.t).collect();
    let run = chain_clouds(&clouds, &stamps, &IcpConfig::default()).unwrap();
    assert!(run.is_complete());
    let ate = ate_rmse(&run.trajectory, &bench.trajectory).unwrap();
    assert!(ate < 1e-6, "ate {ate}");
}
