//! `bfar` command-line front end.
//!
//! Numeric settings come from flags, then from an optional `--config` file of
//! `key=value` lines (keys are the long flag names), then from built-in
//! defaults. Exit status: 0 on success, 1 when a computation fails, 2 on bad
//! usage.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use bfar::analysis::{self, McConfig, RocSweep};
use bfar::io::{self, ScanFormat};
use bfar::learning::{self, LearnConfig, Objective, TrainingSet};
use bfar::metrics::{self, DESK_LENGTHS};
use bfar::odometry::{self, IcpConfig, PointFilter};
use bfar::simulator::{Benchmark, BenchmarkSpec, NoiseFloor, SimConfig};
use bfar::{detector, DetectorParams, EstimatorKind, PolarScan, Trajectory};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "bfar", version, about = "Bounded false-alarm rate radar detection toolkit")]
struct Cli {
    /// Plain-text `key=value` settings file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic landmark world along a constant-velocity run.
    Simulate(SimulateArgs),
    /// Detect targets in one scan and write the point cloud.
    Detect(DetectArgs),
    /// Closed-form false-alarm bound, PFA and PD for one setting.
    Analyze(AnalyzeArgs),
    /// Compare closed forms against a Monte Carlo estimate.
    McValidate(McArgs),
    /// Closed-form ROC curve over a sweep of a or b.
    Roc(RocArgs),
    /// Scan-to-scan odometry over a directory of scans.
    Odom(OdomArgs),
    /// Trajectory error metrics against ground truth.
    Eval(EvalArgs),
    /// Grid search over (a, b) on a training sequence.
    Learn(LearnArgs),
    /// CA-CFAR (b = 0) sweep over target false-alarm probabilities.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct DetectorFlags {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Total reference cells W (both sides).
    #[arg(long)]
    window: Option<usize>,
    /// Guard cells per side.
    #[arg(long)]
    guard: Option<usize>,
    /// ca, go, so or os:k.
    #[arg(long)]
    estimator: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    landmarks: Option<usize>,
    #[arg(long)]
    poses: Option<usize>,
    /// Distance travelled per scan, meters.
    #[arg(long)]
    step: Option<f64>,
    /// Heading change per scan, radians.
    #[arg(long)]
    yaw_rate: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    azimuths: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    /// csv or pgm.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[arg(long)]
    scan: PathBuf,
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Keep the k strongest returns per azimuth instead of thresholding.
    #[arg(long)]
    k_strongest: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Target SNR; when positive, PD is checked as well.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    guard: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RocArgs {
    /// Parameter to vary: a or b.
    #[arg(long)]
    vary: Option<String>,
    /// Comma-separated values of the varied parameter.
    #[arg(long)]
    values: Option<String>,
    /// Fixed value of the other parameter.
    #[arg(long)]
    fixed: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IcpFlags {
    /// Nearest-neighbour gate, meters.
    #[arg(long)]
    max_distance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Args, Debug)]
struct OdomArgs {
    /// Directory holding scan_XXXX files.
    #[arg(long)]
    scans: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long)]
    k_strongest: Option<usize>,
    #[command(flatten)]
    icp: IcpFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    est: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated segment lengths in meters.
    #[arg(long)]
    lengths: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    scans: PathBuf,
    /// Ground-truth trajectory CSV, one pose per scan.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    a_grid: Option<String>,
    #[arg(long)]
    b_grid: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    guard: Option<usize>,
    #[arg(long)]
    estimator: Option<String>,
    /// translation or ate.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    lengths: Option<String>,
    #[command(flatten)]
    icp: IcpFlags,
    #[arg(long)]
    out: PathBuf,
    /// Optional pfa_ub,b,transl_pct surface export.
    #[arg(long)]
    surface: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    scans: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated target false-alarm probabilities.
    #[arg(long)]
    pfa: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    guard: Option<usize>,
    #[arg(long)]
    lengths: Option<String>,
    #[command(flatten)]
    icp: IcpFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Run(bfar::Error),
}

impl From<bfar::Error> for CliError {
    fn from(e: bfar::Error) -> Self {
        CliError::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Settings loaded from `--config`.
#[derive(Debug, Default)]
struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| bfar::Error::io(path, e))?;
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    n + 1
                )));
            };
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Flag value, else config value, else `default`.
    fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.lookup(flag, key)?.unwrap_or(default))
    }

    fn lookup<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    /// `--seed`, then config `seed`, then `BFAR_SEED`, then 42.
    fn seed(&self, flag: Option<u64>) -> CliResult<u64> {
        if let Some(s) = self.lookup(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var("BFAR_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("BFAR_SEED: {e}"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    fn list(&self, flag: Option<String>, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.lookup(flag, key)? {
            Some(s) => parse_list(&s).map_err(|e| CliError::Usage(format!("--{key}: {e}"))),
            None => Ok(default.to_vec()),
        }
    }

    fn detector(&self, f: &DetectorFlags) -> CliResult<DetectorParams> {
        let estimator: EstimatorKind =
            self.pick(f.estimator.clone(), "estimator", "ca".to_string())?
                .parse()
                .map_err(|e: bfar::Error| CliError::Usage(e.to_string()))?;
        Ok(DetectorParams::new(
            self.pick(f.a, "a", 1.0)?,
            self.pick(f.b, "b", 20.0)?,
            self.pick(f.window, "window", 20)?,
            self.pick(f.guard, "guard", bfar::params::DEFAULT_GUARD)?,
            estimator,
        )?)
    }

    fn filter(&self, f: &DetectorFlags, k_strongest: Option<usize>) -> CliResult<PointFilter> {
        match self.lookup(k_strongest, "k-strongest")? {
            Some(k) => Ok(PointFilter::KStrongest(k)),
            None => Ok(PointFilter::Detector(self.detector(f)?)),
        }
    }

    fn icp(&self, f: &IcpFlags) -> CliResult<IcpConfig> {
        let d = IcpConfig::default();
        Ok(IcpConfig {
            max_distance: self.pick(f.max_distance, "max-distance", d.max_distance)?,
            max_iterations: self.pick(f.max_iterations, "max-iterations", d.max_iterations)?,
            ..d
        })
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

fn parse_format(s: Option<String>, path: &Path) -> CliResult<ScanFormat> {
    match s {
        Some(s) => s.parse().map_err(|e: bfar::Error| CliError::Usage(e.to_string())),
        None => ScanFormat::from_path(path).ok_or_else(|| {
            CliError::Usage(format!("cannot infer scan format of {}; pass --format", path.display()))
        }),
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| bfar::Error::io(p, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Scans named `scan_*.csv` or `scan_*.pgm` in `dir`, in file-name order.
fn load_scan_dir(dir: &Path) -> CliResult<Vec<PolarScan>> {
    let entries = fs::read_dir(dir).map_err(|e| bfar::Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| bfar::Error::io(dir, e))?.path();
        let is_scan = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("scan_"));
        if let (true, Some(format)) = (is_scan, ScanFormat::from_path(&path)) {
            files.push((path, format));
        }
    }
    files.sort_by(|x, y| x.0.cmp(&y.0));
    if files.is_empty() {
        return Err(bfar::Error::Domain(format!("no scan_* files in {}", dir.display())).into());
    }
    Ok(files
        .iter()
        .map(|(p, f)| io::read_scan(p, *f))
        .collect::<bfar::Result<Vec<_>>>()?)
}

fn simulate(args: SimulateArgs, cfg: &Settings) -> CliResult<()> {
    let d = BenchmarkSpec::default();
    let spec = BenchmarkSpec {
        num_landmarks: cfg.pick(args.landmarks, "landmarks", d.num_landmarks)?,
        num_poses: cfg.pick(args.poses, "poses", d.num_poses)?,
        step_m: cfg.pick(args.step, "step", d.step_m)?,
        yaw_rate: cfg.pick(args.yaw_rate, "yaw-rate", d.yaw_rate)?,
        dt: cfg.pick(args.dt, "dt", d.dt)?,
        config: SimConfig {
            num_azimuths: cfg.pick(args.azimuths, "azimuths", d.config.num_azimuths)?,
            num_range_bins: cfg.pick(args.bins, "bins", d.config.num_range_bins)?,
            range_resolution: cfg.pick(args.resolution, "resolution", d.config.range_resolution)?,
        },
        noise_floor: NoiseFloor::new(
            cfg.pick(args.mu0, "mu0", d.noise_floor.mu0)?,
            cfg.pick(args.alpha, "alpha", d.noise_floor.alpha)?,
            cfg.pick(args.r0, "r0", d.noise_floor.r0)?,
        )?,
        seed: cfg.seed(args.seed)?,
    };
    let format = parse_format(Some(cfg.pick(args.format, "format", "csv".to_string())?), &args.out_dir)?;
    let bench = Benchmark::generate(&spec)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| bfar::Error::io(&args.out_dir, e))?;
    for (k, scan) in bench.scans.iter().enumerate() {
        let path = args.out_dir.join(format!("scan_{k:04}.{}", format.extension()));
        io::write_scan(scan, &path, format)?;
    }
    io::write_landmarks(&args.out_dir.join("landmarks.csv"), &bench.world.landmark_table())?;
    io::write_trajectory(&args.out_dir.join("trajectory.csv"), &bench.trajectory)?;
    eprintln!(
        "wrote {} scans, {} landmarks, {:.1} landmark cells per scan",
        bench.scans.len(),
        bench.world.landmarks.len(),
        bench.mean_target_cells()
    );
    Ok(())
}

fn detect(args: DetectArgs, cfg: &Settings) -> CliResult<()> {
    let format = parse_format(args.format, &args.scan)?;
    let scan = io::read_scan(&args.scan, format)?;
    let set = match cfg.filter(&args.detector, args.k_strongest)? {
        PointFilter::Detector(p) => detector::detect_scan(&scan, &p)?,
        PointFilter::KStrongest(k) => detector::k_strongest(&scan, k)?,
    };
    io::write_points(&args.out, &set.points)?;
    eprintln!("{} detections", set.count());
    Ok(())
}

fn analyze(args: AnalyzeArgs, cfg: &Settings) -> CliResult<()> {
    let a = cfg.pick(args.a, "a", 1.0)?;
    let b = cfg.pick(args.b, "b", 20.0)?;
    let mu = cfg.pick(args.mu, "mu", 1.0)?;
    let s = cfg.pick(args.s, "s", 10.0)?;
    let w = cfg.pick(args.w, "w", 20)?;
    let st = analysis::DetectionStats::closed_form(a, b, mu, s, w)?;
    let text = format!(
        "a,b,mu,s,w,pfa_ub,pfa,pd\n{a},{b},{mu},{s},{w},{},{},{}\n",
        st.pfa_upper_bound, st.pfa, st.pd
    );
    emit(args.out.as_deref(), &text)
}

fn mc_validate(args: McArgs, cfg: &Settings) -> CliResult<()> {
    let mc = McConfig {
        a: cfg.pick(args.a, "a", 1.0)?,
        b: cfg.pick(args.b, "b", 20.0)?,
        mu: cfg.pick(args.mu, "mu", 5.0)?,
        snr: cfg.pick(args.s, "s", 0.0)?,
        w: cfg.pick(args.w, "w", 20)?,
        guard: cfg.pick(args.guard, "guard", bfar::params::DEFAULT_GUARD)?,
        trials: cfg.pick(args.trials, "trials", 1_000_000)?,
        seed: cfg.seed(args.seed)?,
    };
    let closed = analysis::DetectionStats::closed_form(mc.a, mc.b, mc.mu, mc.snr, mc.w)?;
    let est = analysis::mc_estimate(&mc)?;
    let mut pass = (closed.pfa - est.pfa).abs() <= 3.0 * est.wilson_halfwidth;
    if mc.snr > 0.0 {
        pass &= (closed.pd - est.pd).abs() <= 3.0 * est.pd_wilson_halfwidth;
    }
    let text = format!(
        "a,b,mu,s,w,closed_pfa,mc_pfa,halfwidth,pass\n{},{},{},{},{},{},{},{},{}\n",
        mc.a, mc.b, mc.mu, mc.snr, mc.w, closed.pfa, est.pfa, est.wilson_halfwidth, pass
    );
    emit(args.out.as_deref(), &text)
}

fn roc(args: RocArgs, cfg: &Settings) -> CliResult<()> {
    let vary = cfg.pick(args.vary, "vary", "a".to_string())?;
    let sweep = match vary.as_str() {
        "a" => RocSweep::Scale {
            values: cfg.list(args.values, "values", &[0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0])?,
            offset_b: cfg.pick(args.fixed, "fixed", 20.0)?,
        },
        "b" => RocSweep::Offset {
            values: cfg.list(args.values, "values", &learning::DEFAULT_B_GRID)?,
            scale_a: cfg.pick(args.fixed, "fixed", 1.0)?,
        },
        other => return Err(CliError::Usage(format!("--vary must be a or b, got '{other}'"))),
    };
    let points = analysis::roc_curve(
        &sweep,
        cfg.pick(args.mu, "mu", 1.0)?,
        cfg.pick(args.s, "s", 10.0)?,
        cfg.pick(args.w, "w", 20)?,
    )?;
    let mut text = String::from("param,pfa,pd\n");
    for p in points {
        text += &format!("{},{},{}\n", p.param, p.pfa, p.pd);
    }
    emit(args.out.as_deref(), &text)
}

fn odom(args: OdomArgs, cfg: &Settings) -> CliResult<()> {
    let scans = load_scan_dir(&args.scans)?;
    let dt = cfg.pick(args.dt, "dt", 1.0)?;
    let times: Vec<f64> = (0..scans.len()).map(|k| k as f64 * dt).collect();
    let filter = cfg.filter(&args.detector, args.k_strongest)?;
    let run = odometry::chain_odometry(&scans, &times, &filter, &cfg.icp(&args.icp)?)?;
    io::write_trajectory(&args.out, &run.trajectory)?;
    eprintln!("{:.1} detections per scan", run.mean_detections());
    match run.failure {
        None => Ok(()),
        Some(f) => Err(bfar::Error::Domain(format!(
            "registration failed at scan {}: {} (partial trajectory written)",
            f.index, f.reason
        ))
        .into()),
    }
}

fn eval(args: EvalArgs, cfg: &Settings) -> CliResult<()> {
    let est = io::read_trajectory(&args.est)?;
    let gt = io::read_trajectory(&args.gt)?;
    let lengths = cfg.list(args.lengths, "lengths", &DESK_LENGTHS)?;
    let rel = metrics::kitti_relative_errors(&est, &gt, &lengths)?;
    let ate = metrics::ate_rmse(&est, &gt)?;
    let text = format!(
        "transl_pct,rot_deg_per_100m,ate_m\n{},{},{}\n",
        rel.translation_pct, rel.rotation_deg_per_100m, ate
    );
    emit(args.out.as_deref(), &text)
}

fn training_data(scans: &Path, gt: &Path) -> CliResult<(Vec<PolarScan>, Trajectory)> {
    Ok((load_scan_dir(scans)?, io::read_trajectory(gt)?))
}

fn learn(args: LearnArgs, cfg: &Settings) -> CliResult<()> {
    let (scans, gt) = training_data(&args.scans, &args.gt)?;
    let flags = DetectorFlags {
        a: Some(1.0),
        b: Some(0.0),
        window: args.window,
        guard: args.guard,
        estimator: args.estimator,
    };
    let base = cfg.detector(&flags)?;
    let objective: Objective = cfg
        .pick(args.objective, "objective", "translation".to_string())?
        .parse()
        .map_err(|e: bfar::Error| CliError::Usage(e.to_string()))?;
    let config = LearnConfig {
        objective,
        icp: cfg.icp(&args.icp)?,
        lengths: cfg.list(args.lengths, "lengths", &DESK_LENGTHS)?,
    };
    let a_grid = cfg.list(args.a_grid, "a-grid", &learning::DEFAULT_A_GRID)?;
    let b_grid = cfg.list(args.b_grid, "b-grid", &learning::DEFAULT_B_GRID)?;
    let set = TrainingSet {
        scans: &scans,
        ground_truth: &gt,
    };
    let report = learning::grid_search(set, &a_grid, &b_grid, &base, &config)?;
    emit(Some(&args.out), &report.to_csv())?;
    if let Some(p) = &args.surface {
        emit(Some(p), &report.surface_csv())?;
    }
    let best = report.best_row();
    eprintln!(
        "best a={} b={} transl={:.4}% ate={:.4} m",
        best.a, best.b, best.transl_pct, best.ate_m
    );
    Ok(())
}

fn sweep(args: SweepArgs, cfg: &Settings) -> CliResult<()> {
    let (scans, gt) = training_data(&args.scans, &args.gt)?;
    let flags = DetectorFlags {
        a: Some(1.0),
        b: Some(0.0),
        window: args.window,
        guard: args.guard,
        estimator: None,
    };
    let base = cfg.detector(&flags)?;
    let config = LearnConfig {
        icp: cfg.icp(&args.icp)?,
        lengths: cfg.list(args.lengths, "lengths", &DESK_LENGTHS)?,
        ..LearnConfig::default()
    };
    let pfa = cfg.list(args.pfa, "pfa", &[0.5, 1e-2, 1e-4, 1e-6, 1e-9, 1e-12])?;
    let set = TrainingSet {
        scans: &scans,
        ground_truth: &gt,
    };
    let rows = learning::sensitivity_sweep(set, &base, &pfa, &config)?;
    emit(Some(&args.out), &learning::sweep_csv(&rows))
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => simulate(a, &cfg),
        Command::Detect(a) => detect(a, &cfg),
        Command::Analyze(a) => analyze(a, &cfg),
        Command::McValidate(a) => mc_validate(a, &cfg),
        Command::Roc(a) => roc(a, &cfg),
        Command::Odom(a) => odom(a, &cfg),
        Command::Eval(a) => eval(a, &cfg),
        Command::Learn(a) => learn(a, &cfg),
        Command::Sweep(a) => sweep(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
