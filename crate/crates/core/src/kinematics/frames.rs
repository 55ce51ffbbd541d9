use nalgebra::Vector3;

use super::{EngagementState, VehicleState, R_MIN_GUARD};
use crate::error::{Error, Result};

/// World-frame positions and velocities of both vehicles. The inertial
/// frame is right-handed with `z` up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialState {
    pub t: f64,
    pub pos_p: Vector3<f64>,
    pub vel_p: Vector3<f64>,
    pub pos_t: Vector3<f64>,
    pub vel_t: Vector3<f64>,
}

/// Orthonormal LOS basis: `e_r` from pursuer to target, `e_psi` horizontal
/// (direction of increasing azimuth), `e_theta` completing the right-handed
/// triad (direction of increasing elevation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosFrame {
    pub e_r: Vector3<f64>,
    pub e_psi: Vector3<f64>,
    pub e_theta: Vector3<f64>,
}

impl LosFrame {
    pub fn from_angles(theta: f64, psi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = psi.sin_cos();
        Self {
            e_r: Vector3::new(ct * cp, ct * sp, st),
            e_psi: Vector3::new(-sp, cp, 0.0),
            e_theta: Vector3::new(-st * cp, -st * sp, ct),
        }
    }

    /// Frame and spherical coordinates `(r, θ, ψ)` of the relative position
    /// `target − pursuer`.
    pub fn from_relative_position(rel: &Vector3<f64>) -> Result<(Self, f64, f64, f64)> {
        let r = rel.norm();
        if !(r >= R_MIN_GUARD) {
            return Err(Error::DegenerateLos { range: r });
        }
        let theta = (rel.z / r).clamp(-1.0, 1.0).asin();
        let psi = rel.y.atan2(rel.x);
        Ok((Self::from_angles(theta, psi), r, theta, psi))
    }

    /// Unit vector with LOS-frame elevation `gamma` and azimuth `chi`.
    pub fn direction(&self, gamma: f64, chi: f64) -> Vector3<f64> {
        let (sg, cg) = gamma.sin_cos();
        let (sc, cc) = chi.sin_cos();
        self.e_r * (cg * cc) + self.e_psi * (cg * sc) + self.e_theta * sg
    }

    /// Speed and LOS-frame heading angles of an inertial velocity. A zero
    /// vector maps to zero angles.
    pub fn heading_of(&self, v: &Vector3<f64>) -> VehicleState {
        let speed = v.norm();
        if speed == 0.0 {
            return VehicleState::default();
        }
        let along = v.dot(&self.e_r);
        let side = v.dot(&self.e_psi);
        let up = v.dot(&self.e_theta);
        VehicleState {
            speed,
            gamma: (up / speed).clamp(-1.0, 1.0).asin(),
            chi: side.atan2(along),
        }
    }
}

/// Body lateral axes `(e_gamma, e_chi)` of a vehicle whose velocity has
/// LOS-frame angles `(gamma, chi)`.
///
/// `e_chi` lies in the LOS yaw plane (orthogonal to `e_theta`), `e_gamma`
/// completes `(velocity, e_chi, e_gamma)` to a right-handed triad. A
/// positive `a_gamma` raises `gamma`, a positive `a_chi` raises `chi`.
pub fn body_axes(frame: &LosFrame, gamma: f64, chi: f64) -> (Vector3<f64>, Vector3<f64>) {
    let (sg, cg) = gamma.sin_cos();
    let (sc, cc) = chi.sin_cos();
    let e_gamma = frame.e_r * (-sg * cc) + frame.e_psi * (-sg * sc) + frame.e_theta * cg;
    let e_chi = frame.e_r * (-sc) + frame.e_psi * cc;
    (e_gamma, e_chi)
}

/// Relative state induced by a world-frame state.
pub fn to_relative(s: &InertialState) -> Result<EngagementState> {
    let (frame, r, theta, psi) = LosFrame::from_relative_position(&(s.pos_t - s.pos_p))?;
    Ok(EngagementState {
        t: s.t,
        r,
        theta,
        psi,
        pursuer: frame.heading_of(&s.vel_p),
        target: frame.heading_of(&s.vel_t),
    })
}

/// World-frame realisation of a relative state with the pursuer placed at
/// `pos_p`. Absolute position is not observable from the relative state.
pub fn to_inertial(s: &EngagementState, pos_p: Vector3<f64>) -> InertialState {
    let frame = LosFrame::from_angles(s.theta, s.psi);
    InertialState {
        t: s.t,
        pos_p,
        vel_p: frame.direction(s.pursuer.gamma, s.pursuer.chi) * s.pursuer.speed,
        pos_t: pos_p + frame.e_r * s.r,
        vel_t: frame.direction(s.target.gamma, s.target.chi) * s.target.speed,
    }
}
