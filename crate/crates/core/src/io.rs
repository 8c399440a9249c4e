//! Scan, point-cloud, trajectory and landmark file formats.
//!
//! Scans are stored either as comma-separated decimals (one azimuth per
//! line) or as binary 8-bit PGM (`P5`, width = range bins, height =
//! azimuths, maxval 255). Both carry a `<stem>.meta` sidecar:
//!
//! ```text
//! num_azimuths=400
//! num_range_bins=512
//! range_resolution=0.25
//! ```
//!
//! PGM writes clamp intensities to `[0, 255]` and truncate toward zero.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pose::{Pose2D, Trajectory};
use crate::scan::{Point, PolarScan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanFormat {
    CsvFloat,
    Pgm8,
}

impl ScanFormat {
    /// Guesses the format from a file extension (`.csv` or `.pgm`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(ScanFormat::CsvFloat),
            "pgm" => Some(ScanFormat::Pgm8),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ScanFormat::CsvFloat => "csv",
            ScanFormat::Pgm8 => "pgm",
        }
    }
}

impl FromStr for ScanFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "csv_float" => Ok(ScanFormat::CsvFloat),
            "pgm" | "pgm8" => Ok(ScanFormat::Pgm8),
            _ => Err(Error::Domain(format!("unknown scan format '{s}'"))),
        }
    }
}

/// Path of the metadata sidecar for a scan file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ScanMeta {
    num_azimuths: usize,
    num_range_bins: usize,
    range_resolution: f64,
}

fn parse_err(what: &'static str, path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        what,
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn read_meta(path: &Path) -> Result<ScanMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut az = None;
    let mut bins = None;
    let mut res = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err("sidecar", path, format!("expected key=value, got '{line}'")))?;
        let value = value.trim();
        let bad = |_| parse_err("sidecar", path, format!("bad value for {}: '{value}'", key.trim()));
        match key.trim() {
            "num_azimuths" => az = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "num_range_bins" => bins = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "range_resolution" => res = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            _ => {}
        }
    }
    let missing = |k: &str| parse_err("sidecar", path, format!("missing {k}"));
    Ok(ScanMeta {
        num_azimuths: az.ok_or_else(|| missing("num_azimuths"))?,
        num_range_bins: bins.ok_or_else(|| missing("num_range_bins"))?,
        range_resolution: res.ok_or_else(|| missing("range_resolution"))?,
    })
}

fn write_meta(path: &Path, scan: &PolarScan) -> Result<()> {
    let text = format!(
        "num_azimuths={}\nnum_range_bins={}\nrange_resolution={}\n",
        scan.num_azimuths(),
        scan.num_range_bins(),
        scan.range_resolution()
    );
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a scan and its sidecar.
pub fn read_scan(path: &Path, format: ScanFormat) -> Result<PolarScan> {
    let meta = read_meta(&sidecar_path(path))?;
    let cells = match format {
        ScanFormat::CsvFloat => read_csv_cells(path, &meta)?,
        ScanFormat::Pgm8 => read_pgm_cells(path, &meta)?,
    };
    PolarScan::new(meta.num_azimuths, meta.num_range_bins, meta.range_resolution, cells)
}

/// Writes a scan and its sidecar. Uniform azimuths are assumed on re-read.
pub fn write_scan(scan: &PolarScan, path: &Path, format: ScanFormat) -> Result<()> {
    let body = match format {
        ScanFormat::CsvFloat => {
            let mut text = String::with_capacity(scan.len() * 8);
            for row in scan.rows() {
                for (j, v) in row.iter().enumerate() {
                    if j > 0 {
                        text.push(',');
                    }
                    // `Display` for f64 is the shortest exact round-trip form.
                    write!(text, "{v}").expect("writing to a String");
                }
                text.push('\n');
            }
            text.into_bytes()
        }
        ScanFormat::Pgm8 => {
            let mut bytes =
                format!("P5\n{} {}\n255\n", scan.num_range_bins(), scan.num_azimuths()).into_bytes();
            bytes.extend(scan.cells().iter().map(|v| quantize_pgm(*v)));
            bytes
        }
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    write_meta(&sidecar_path(path), scan)
}

/// 8-bit quantization: clamp to `[0, 255]`, then truncate toward zero.
pub fn quantize_pgm(v: f64) -> u8 {
    v.clamp(0.0, 255.0) as u8
}

fn read_csv_cells(path: &Path, meta: &ScanMeta) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != meta.num_azimuths {
        return Err(Error::DimensionMismatch(format!(
            "{}: {} rows, sidecar says {} azimuths",
            path.display(),
            rows.len(),
            meta.num_azimuths
        )));
    }
    let mut cells = Vec::with_capacity(meta.num_azimuths * meta.num_range_bins);
    for (i, row) in rows.iter().enumerate() {
        let before = cells.len();
        for field in row.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err("csv scan", path, format!("row {i}: '{}' is not a number", field.trim()))
            })?;
            if v < 0.0 {
                return Err(parse_err("csv scan", path, format!("row {i}: negative value {v}")));
            }
            cells.push(v);
        }
        if cells.len() - before != meta.num_range_bins {
            return Err(Error::DimensionMismatch(format!(
                "{}: row {i} has {} values, sidecar says {} range bins",
                path.display(),
                cells.len() - before,
                meta.num_range_bins
            )));
        }
    }
    Ok(cells)
}

fn read_pgm_cells(path: &Path, meta: &ScanMeta) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    // Header: magic, width, height, maxval separated by whitespace, '#' comments.
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err("pgm header", path, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    if tokens[0] != "P5" {
        return Err(parse_err("pgm header", path, format!("magic '{}' is not P5", tokens[0])));
    }
    let num = |k: usize, name: &str| -> Result<usize> {
        tokens[k]
            .parse()
            .map_err(|_| parse_err("pgm header", path, format!("bad {name} '{}'", tokens[k])))
    };
    let (width, height, maxval) = (num(1, "width")?, num(2, "height")?, num(3, "maxval")?);
    if maxval != 255 {
        return Err(parse_err("pgm header", path, format!("maxval {maxval}, expected 255")));
    }
    if width != meta.num_range_bins || height != meta.num_azimuths {
        return Err(Error::DimensionMismatch(format!(
            "{}: pgm is {width}x{height}, sidecar says {}x{}",
            path.display(),
            meta.num_range_bins,
            meta.num_azimuths
        )));
    }
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "{}: raster holds {} bytes, expected {}",
            path.display(),
            raster.len(),
            width * height
        )));
    }
    Ok(raster.iter().map(|b| f64::from(*b)).collect())
}

fn read_table(path: &Path, what: &'static str, header: &str) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| parse_err(what, path, "empty file"))?;
    let cols: Vec<&str> = first.split(',').map(str::trim).collect();
    let expected: Vec<&str> = header.split(',').collect();
    if cols != expected {
        return Err(parse_err(what, path, format!("header '{first}', expected '{header}'")));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(what, path, format!("line {}: {e}", k + 2)))?;
            if row.len() != expected.len() {
                return Err(parse_err(
                    what,
                    path,
                    format!("line {} has {} fields, expected {}", k + 2, row.len(), expected.len()),
                ));
            }
            Ok(row)
        })
        .collect()
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_points(path: &Path, points: &[Point]) -> Result<()> {
    let mut text = String::from("x,y,intensity\n");
    for p in points {
        writeln!(text, "{},{},{}", p.x, p.y, p.intensity).expect("writing to a String");
    }
    write_text(path, text)
}

pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    Ok(read_table(path, "point cloud", "x,y,intensity")?
        .into_iter()
        .map(|r| Point {
            x: r[0],
            y: r[1],
            intensity: r[2],
        })
        .collect())
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut text = String::from("t,x,y,yaw\n");
    for p in traj.poses() {
        writeln!(text, "{},{},{},{}", p.t, p.x, p.y, p.yaw).expect("writing to a String");
    }
    write_text(path, text)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let poses = read_table(path, "trajectory", "t,x,y,yaw")?
        .into_iter()
        .map(|r| Pose2D::new(r[0], r[1], r[2], r[3]))
        .collect();
    Trajectory::new(poses)
}

/// Ground-truth landmark table `x,y,snr`.
pub fn write_landmarks(path: &Path, landmarks: &[(f64, f64, f64)]) -> Result<()> {
    let mut text = String::from("x,y,snr\n");
    for (x, y, s) in landmarks {
        writeln!(text, "{x},{y},{s}").expect("writing to a String");
    }
    write_text(path, text)
}

pub fn read_landmarks(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    Ok(read_table(path, "landmarks", "x,y,snr")?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn meta(dir: &Path, stem: &str, az: usize, bins: usize, res: f64) {
        fs::write(
            dir.join(format!("{stem}.meta")),
            format!("num_azimuths={az}\nnum_range_bins={bins}\nrange_resolution={res}\n"),
        )
        .unwrap();
    }

    #[test]
    fn reads_small_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, "1,2,3\n4,5,6").unwrap();
        meta(dir.path(), "s", 2, 3, 0.5);
        let scan = read_scan(&path, ScanFormat::CsvFloat).unwrap();
        assert_eq!(scan.cells(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(scan.num_range_bins(), 3);
        assert_eq!(scan.range_resolution(), 0.5);
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        meta(dir.path(), "s", 2, 3, 0.5);
        fs::write(&path, "1,2,3\n4,-5,6").unwrap();
        assert!(matches!(read_scan(&path, ScanFormat::CsvFloat), Err(Error::Parse { .. })));
        fs::write(&path, "1,2,3\n4,5").unwrap();
        assert!(matches!(
            read_scan(&path, ScanFormat::CsvFloat),
            Err(Error::DimensionMismatch(_))
        ));
        fs::write(&path, "1,2,3").unwrap();
        assert!(matches!(
            read_scan(&path, ScanFormat::CsvFloat),
            Err(Error::DimensionMismatch(_))
        ));
        fs::write(dir.path().join("s.meta"), "num_azimuths=two\n").unwrap();
        assert!(matches!(read_scan(&path, ScanFormat::CsvFloat), Err(Error::Parse { .. })));
    }

    #[test]
    fn pgm_maps_bytes_to_floats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pgm");
        let mut bytes = b"P5\n# comment\n3 1\n255\n".to_vec();
        bytes.extend([0u8, 127, 255]);
        fs::write(&path, bytes).unwrap();
        meta(dir.path(), "p", 1, 3, 1.0);
        let scan = read_scan(&path, ScanFormat::Pgm8).unwrap();
        assert_eq!(scan.cells(), &[0.0, 127.0, 255.0]);
    }

    #[test]
    fn pgm_header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.pgm");
        meta(dir.path(), "p", 1, 3, 1.0);
        fs::write(&path, b"P2\n3 1\n255\n0 1 2").unwrap();
        assert!(read_scan(&path, ScanFormat::Pgm8).is_err());
        fs::write(&path, b"P5\n4 1\n255\n\0\0\0\0").unwrap();
        assert!(matches!(read_scan(&path, ScanFormat::Pgm8), Err(Error::DimensionMismatch(_))));
        fs::write(&path, b"P5\n3 1\n255\n\0\0").unwrap();
        assert!(matches!(read_scan(&path, ScanFormat::Pgm8), Err(Error::DimensionMismatch(_))));
        fs::write(&path, b"P5\n3").unwrap();
        assert!(read_scan(&path, ScanFormat::Pgm8).is_err());
    }

    #[test]
    fn pgm_quantization_rule() {
        assert_eq!(quantize_pgm(300.0), 255);
        assert_eq!(quantize_pgm(127.4), 127);
        assert_eq!(quantize_pgm(127.9), 127);
        assert_eq!(quantize_pgm(0.2), 0);
    }

    #[test]
    fn pgm_round_trip_within_one_unit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.pgm");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cells: Vec<f64> = (0..40 * 30).map(|_| rng.random_range(0.0..255.0)).collect();
        let scan = PolarScan::new(40, 30, 0.25, cells).unwrap();
        write_scan(&scan, &path, ScanFormat::Pgm8).unwrap();
        let back = read_scan(&path, ScanFormat::Pgm8).unwrap();
        for (a, b) in scan.cells().iter().zip(back.cells()) {
            assert!((a - b).abs() < 1.0 && b <= a);
        }
    }

    #[test]
    fn trajectory_and_points_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let traj = Trajectory::constant_velocity(5, 0.5, 1.3, 0.01).unwrap();
        let tpath = dir.path().join("t.csv");
        write_trajectory(&tpath, &traj).unwrap();
        assert_eq!(read_trajectory(&tpath).unwrap(), traj);

        let pts = vec![
            Point { x: 0.5, y: -1.25, intensity: 3.0 },
            Point { x: 1e-3, y: 7.0, intensity: 0.1 },
        ];
        let ppath = dir.path().join("p.csv");
        write_points(&ppath, &pts).unwrap();
        assert_eq!(read_points(&ppath).unwrap(), pts);

        fs::write(&ppath, "a,b,c\n1,2,3\n").unwrap();
        assert!(read_points(&ppath).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn csv_round_trip_is_bit_exact(
            az in 1usize..12,
            bins in 1usize..12,
            seed in any::<u64>(),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cells: Vec<f64> = (0..az * bins)
                .map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-5..6)))
                .collect();
            let scan = PolarScan::new(az, bins, 0.173, cells).unwrap();
            write_scan(&scan, &path, ScanFormat::CsvFloat).unwrap();
            let back = read_scan(&path, ScanFormat::CsvFloat).unwrap();
            prop_assert_eq!(back, scan);
        }
    }
}
