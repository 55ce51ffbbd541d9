//! Scripted target motion.
//!
//! Targets follow inertial velocity profiles; their body-frame accelerations
//! are only ever needed for diagnostics and for the guidance gain condition,
//! which works from the declared [`AccelBounds`].

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{body_axes, AccelCommand, LosFrame};

/// Declared bounds on the target's body-frame acceleration components, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccelBounds {
    pub radial: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl AccelBounds {
    pub fn new(radial: f64, pitch: f64, yaw: f64) -> Self {
        Self { radial, pitch, yaw }
    }

    /// `a_max^r + a_max^γ + a_max^χ`, the bound on the target term in the
    /// range-error dynamics.
    pub fn sum(&self) -> f64 {
        self.radial.abs() + self.pitch.abs() + self.yaw.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetMotion {
    Stationary,
    ConstantVelocity(Vector3<f64>),
    /// Per axis: `v_i(t) = base_i + amplitude_i · sin(omega_i · t)`.
    Sinusoidal {
        base: [f64; 3],
        amplitude: [f64; 3],
        omega: [f64; 3],
    },
    Custom(VelocityProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    pub motion: TargetMotion,
    pub bounds: AccelBounds,
}

impl TargetModel {
    pub fn stationary() -> Self {
        Self {
            motion: TargetMotion::Stationary,
            bounds: AccelBounds::default(),
        }
    }

    pub fn constant_velocity(v: Vector3<f64>) -> Self {
        Self {
            motion: TargetMotion::ConstantVelocity(v),
            bounds: AccelBounds::default(),
        }
    }

    /// The maneuvering target: `[3.5, 1.5 sin(4πt/100), sin(8πt/100)]` m/s.
    pub fn maneuvering() -> Self {
        let b = mt_accel_bound();
        Self {
            motion: TargetMotion::Sinusoidal {
                base: [3.5, 0.0, 0.0],
                amplitude: [0.0, 1.5, 1.0],
                omega: [0.0, 4.0 * PI / 100.0, 8.0 * PI / 100.0],
            },
            bounds: AccelBounds::new(b, b, b),
        }
    }

    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        match &self.motion {
            TargetMotion::Stationary => Vector3::zeros(),
            TargetMotion::ConstantVelocity(v) => *v,
            TargetMotion::Sinusoidal {
                base,
                amplitude,
                omega,
            } => Vector3::from_fn(|i, _| base[i] + amplitude[i] * (omega[i] * t).sin()),
            TargetMotion::Custom(p) => p.velocity(t),
        }
    }

    pub fn accel(&self, t: f64) -> Vector3<f64> {
        match &self.motion {
            TargetMotion::Stationary | TargetMotion::ConstantVelocity(_) => Vector3::zeros(),
            TargetMotion::Sinusoidal {
                amplitude, omega, ..
            } => Vector3::from_fn(|i, _| amplitude[i] * omega[i] * (omega[i] * t).cos()),
            TargetMotion::Custom(p) => p.accel(t),
        }
    }

    /// Samples the profile on `[0, horizon]` and compares the worst body-frame
    /// components against the declared bounds.
    ///
    /// The lateral axes depend on the LOS, so each lateral bound is checked
    /// against the full lateral magnitude, which dominates any split.
    pub fn check_bounds(&self, horizon: f64, step: f64) -> BoundsReport {
        let n = (horizon / step).ceil().max(0.0) as usize;
        let mut worst_radial: f64 = 0.0;
        let mut worst_lateral: f64 = 0.0;
        for k in 0..=n {
            let t = (k as f64 * step).min(horizon);
            let a = self.accel(t);
            let v = self.velocity(t);
            let speed = v.norm();
            if speed > 0.0 {
                let along = a.dot(&(v / speed));
                worst_radial = worst_radial.max(along.abs());
                worst_lateral = worst_lateral.max((a - v / speed * along).norm());
            } else {
                worst_radial = worst_radial.max(a.norm());
                worst_lateral = worst_lateral.max(a.norm());
            }
        }
        BoundsReport {
            worst_radial,
            worst_lateral,
            holds: worst_radial <= self.bounds.radial
                && worst_lateral <= self.bounds.pitch
                && worst_lateral <= self.bounds.yaw,
        }
    }
}

/// Worst acceleration components seen by [`TargetModel::check_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub worst_radial: f64,
    pub worst_lateral: f64,
    pub holds: bool,
}

/// Peak acceleration magnitude of the maneuvering profile, rounded up.
fn mt_accel_bound() -> f64 {
    let ay = 1.5 * 4.0 * PI / 100.0;
    let az = 8.0 * PI / 100.0;
    ((ay * ay + az * az).sqrt() * 100.0).ceil() / 100.0
}

pub fn target_velocity(t: f64, model: &TargetModel) -> Vector3<f64> {
    model.velocity(t)
}

pub fn target_accel(t: f64, model: &TargetModel) -> Vector3<f64> {
    model.accel(t)
}

/// Inertial velocity with speed `speed` and LOS-frame angles `(gamma, chi)`.
pub fn init_target_inertial(chi: f64, gamma: f64, speed: f64, los: &LosFrame) -> Vector3<f64> {
    los.direction(gamma, chi) * speed
}

/// Body-frame components of an inertial acceleration for a vehicle moving
/// with `velocity`. Zero at zero speed, where the body frame is undefined.
pub fn body_components(
    accel: &Vector3<f64>,
    velocity: &Vector3<f64>,
    frame: &LosFrame,
) -> AccelCommand {
    let h = frame.heading_of(velocity);
    if h.speed == 0.0 {
        return AccelCommand::ZERO;
    }
    let (e_gamma, e_chi) = body_axes(frame, h.gamma, h.chi);
    AccelCommand {
        a_r: accel.dot(&(velocity / h.speed)),
        a_gamma: accel.dot(&e_gamma),
        a_chi: accel.dot(&e_chi),
    }
}

/// Tabulated velocity profile with natural cubic-spline interpolation.
/// Outside the table the end velocities are held.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    t: Vec<f64>,
    axes: [Spline; 3],
}

impl VelocityProfile {
    /// `samples` are `[t, vx, vy, vz]` rows with strictly increasing `t`.
    pub fn new(samples: &[[f64; 4]]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::config("velocity profile needs at least two samples"));
        }
        let t: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        if let Some(w) = t.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::config(format!(
                "profile times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if samples.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::config("profile contains non-finite values"));
        }
        let axes = [1, 2, 3].map(|c| {
            let y: Vec<f64> = samples.iter().map(|s| s[c]).collect();
            Spline::natural(&t, y)
        });
        Ok(Self { t, axes })
    }

    /// Reads a CSV with header `t,vx,vy,vz` (SI units).
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?;
        let header = rdr
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?
            .clone();
        let expected = ["t", "vx", "vy", "vz"];
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                context: path.display().to_string(),
                message: format!("expected header t,vx,vy,vz, found {:?}", header),
            });
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?;
            let mut row = [0.0; 4];
            for (j, field) in rec.iter().enumerate().take(4) {
                row[j] = field.parse().map_err(|e| Error::Parse {
                    context: format!("{} line {}", path.display(), i + 2),
                    message: format!("column {}: {e}", expected[j]),
                })?;
            }
            samples.push(row);
        }
        Self::new(&samples)
    }

    pub fn samples(&self) -> Vec<[f64; 4]> {
        (0..self.t.len())
            .map(|i| {
                [
                    self.t[i],
                    self.axes[0].y[i],
                    self.axes[1].y[i],
                    self.axes[2].y[i],
                ]
            })
            .collect()
    }

    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.axes[i].value(&self.t, t))
    }

    pub fn accel(&self, t: f64) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.axes[i].slope(&self.t, t))
    }
}

/// One component of a natural cubic spline (second derivatives at knots).
#[derive(Debug, Clone, PartialEq)]
struct Spline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn natural(t: &[f64], y: Vec<f64>) -> Self {
        let n = t.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives (Thomas algorithm).
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = t[i] - t[i - 1];
                let h1 = t[i + 1] - t[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = t[i + 1] - t[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut x = vec![0.0; k];
            x[k - 1] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
            }
            m[1..n - 1].copy_from_slice(&x);
        }
        Self { y, m }
    }

    fn segment(t: &[f64], x: f64) -> usize {
        match t.partition_point(|&ti| ti <= x) {
            0 => 0,
            i => (i - 1).min(t.len() - 2),
        }
    }

    fn value(&self, t: &[f64], x: f64) -> f64 {
        let n = t.len();
        if x <= t[0] {
            return self.y[0];
        }
        if x >= t[n - 1] {
            return self.y[n - 1];
        }
        let i = Self::segment(t, x);
        let h = t[i + 1] - t[i];
        let a = (t[i + 1] - x) / h;
        let b = (x - t[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn slope(&self, t: &[f64], x: f64) -> f64 {
        let n = t.len();
        if x < t[0] || x > t[n - 1] {
            return 0.0;
        }
        let i = Self::segment(t, x);
        let h = t[i + 1] - t[i];
        let a = (t[i + 1] - x) / h;
        let b = (x - t[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}
