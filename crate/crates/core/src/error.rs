use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scan: {0}")]
    InvalidScan(String),

    #[error("invalid detector parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("profile of length {len} is shorter than the minimum window {min}")]
    ProfileTooShort { len: usize, min: usize },

    #[error("malformed {what} in {path}: {reason}")]
    Parse {
        what: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("registration needs at least 3 points per cloud, got {source_len} and {target_len}")]
    TooFewPoints { source_len: usize, target_len: usize },

    #[error("fewer than 3 correspondences survived the {gate} m distance gate")]
    EmptyAfterGating { gate: f64 },

    #[error("trajectory too short: path length {path_length:.3} m < shortest segment {shortest:.3} m")]
    TrajectoryTooShort { path_length: f64, shortest: f64 },

    #[error("every grid cell failed")]
    AllCellsFailed,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
