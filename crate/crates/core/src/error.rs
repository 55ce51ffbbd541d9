use std::path::PathBuf;

use thiserror::Error;

/// Which numerical guard tripped in the kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    /// Range at or below the minimum guard radius.
    Range,
    /// LOS elevation too close to the poles (`r cos θ` vanishes).
    Elevation,
    /// Vehicle flight-path elevation too close to ±π/2 (`V cos γ` vanishes).
    FlightPath,
    /// Lateral acceleration commanded on a vehicle below the guard speed.
    Speed,
}

impl std::fmt::Display for Guard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Guard::Range => "range",
            Guard::Elevation => "LOS elevation",
            Guard::FlightPath => "flight-path elevation",
            Guard::Speed => "speed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{guard} guard violated (value {value:.6e})")]
    GuardViolation { guard: Guard, value: f64 },

    #[error("line of sight is degenerate: range {range:.3e} m below guard")]
    DegenerateLos { range: f64 },

    #[error("body frame undefined: speed {speed:.3e} m/s with nonzero command")]
    ZeroSpeedFrame { speed: f64 },

    #[error("range error {epsilon:.6} m left the barrier interval ({lower}, {upper})")]
    OutOfBarrier {
        epsilon: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised by the safety machinery (barrier or numerical
    /// guards) rather than bad input.
    pub fn is_safety(&self) -> bool {
        matches!(
            self,
            Error::GuardViolation { .. }
                | Error::DegenerateLos { .. }
                | Error::ZeroSpeedFrame { .. }
                | Error::OutOfBarrier { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
