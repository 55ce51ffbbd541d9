//! Relative pursuer–target kinematics in the line-of-sight (LOS) frame.
//!
//! The engagement is described by the range `r`, the LOS elevation `theta`
//! and azimuth `psi`, and for each vehicle its speed together with the
//! elevation `gamma` and azimuth `chi` of its velocity measured in the LOS
//! frame. Accelerations are expressed in each vehicle's body frame as a
//! radial (along-velocity) component and two lateral components.

mod frames;
pub(crate) mod integrate;

use std::f64::consts::{FRAC_PI_2, PI};

pub use frames::{body_axes, to_inertial, to_relative, InertialState, LosFrame};
pub use integrate::{rk4_step, step_inertial, step_relative};

use crate::error::{Error, Guard, Result};

/// Smallest range accepted by the kinematics, m.
pub const R_MIN_GUARD: f64 = 0.01;
/// Margin kept from the LOS and flight-path poles, rad.
pub const THETA_GUARD: f64 = 1e-3;
/// Speed below which the body frame is considered undefined, m/s.
pub const V_GUARD: f64 = 1e-3;

/// Speed and LOS-frame heading of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    /// m/s
    pub speed: f64,
    /// Elevation of the velocity in the LOS frame, rad.
    pub gamma: f64,
    /// Azimuth of the velocity in the LOS frame, rad.
    pub chi: f64,
}

impl VehicleState {
    pub fn new(speed: f64, gamma: f64, chi: f64) -> Self {
        Self { speed, gamma, chi }
    }

    /// Projection of the unit velocity onto the LOS, `cos γ cos χ`.
    pub fn los_cosine(&self) -> f64 {
        self.gamma.cos() * self.chi.cos()
    }
}

/// Full relative state of the engagement at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementState {
    /// s
    pub t: f64,
    /// m
    pub r: f64,
    /// LOS elevation, rad.
    pub theta: f64,
    /// LOS azimuth, rad.
    pub psi: f64,
    pub pursuer: VehicleState,
    pub target: VehicleState,
}

/// Body-frame acceleration `[a_r, a_gamma, a_chi]` of one vehicle, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccelCommand {
    /// Along the velocity.
    pub a_r: f64,
    /// Pitch-plane lateral component.
    pub a_gamma: f64,
    /// Yaw-plane lateral component.
    pub a_chi: f64,
}

impl AccelCommand {
    pub const ZERO: AccelCommand = AccelCommand {
        a_r: 0.0,
        a_gamma: 0.0,
        a_chi: 0.0,
    };

    pub fn new(a_r: f64, a_gamma: f64, a_chi: f64) -> Self {
        Self {
            a_r,
            a_gamma,
            a_chi,
        }
    }

    pub fn has_lateral(&self) -> bool {
        self.a_gamma != 0.0 || self.a_chi != 0.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a_r, self.a_gamma, self.a_chi]
    }
}

/// Rates of one vehicle's speed and heading angles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleRates {
    pub dspeed: f64,
    pub dgamma: f64,
    pub dchi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub dr: f64,
    pub dtheta: f64,
    pub dpsi: f64,
    pub pursuer: VehicleRates,
    pub target: VehicleRates,
}

/// Range and LOS angular rates `(ṙ, θ̇, ψ̇)`.
///
/// These depend only on the geometry and both velocities, never on the
/// accelerations, so guidance can read them without a command in hand.
pub fn los_rates(state: &EngagementState) -> Result<(f64, f64, f64)> {
    check_geometry(state)?;
    let (p, tg) = (&state.pursuer, &state.target);
    let dr = tg.speed * tg.gamma.cos() * tg.chi.cos() - p.speed * p.gamma.cos() * p.chi.cos();
    let dtheta = (tg.speed * tg.gamma.sin() - p.speed * p.gamma.sin()) / state.r;
    let dpsi = (tg.speed * tg.gamma.cos() * tg.chi.sin() - p.speed * p.gamma.cos() * p.chi.sin())
        / (state.r * state.theta.cos());
    Ok((dr, dtheta, dpsi))
}

fn check_geometry(state: &EngagementState) -> Result<()> {
    if !(state.r > R_MIN_GUARD) {
        return Err(Error::GuardViolation {
            guard: Guard::Range,
            value: state.r,
        });
    }
    if !(state.theta.abs() < FRAC_PI_2 - THETA_GUARD) {
        return Err(Error::GuardViolation {
            guard: Guard::Elevation,
            value: state.theta,
        });
    }
    Ok(())
}

fn vehicle_rates(
    v: &VehicleState,
    u: &AccelCommand,
    theta: f64,
    dtheta: f64,
    dpsi: f64,
) -> Result<VehicleRates> {
    if !(v.gamma.abs() < FRAC_PI_2 - THETA_GUARD) {
        return Err(Error::GuardViolation {
            guard: Guard::FlightPath,
            value: v.gamma,
        });
    }
    let (sg, cg) = v.gamma.sin_cos();
    let (sc, cc) = v.chi.sin_cos();
    let (st, ct) = theta.sin_cos();

    let (turn_gamma, turn_chi) = if u.has_lateral() {
        if v.speed < V_GUARD {
            return Err(Error::GuardViolation {
                guard: Guard::Speed,
                value: v.speed,
            });
        }
        (u.a_gamma / v.speed, u.a_chi / (v.speed * cg))
    } else {
        (0.0, 0.0)
    };

    let tg = sg / cg;
    Ok(VehicleRates {
        dspeed: u.a_r,
        dgamma: turn_gamma - dpsi * st * sc - dtheta * cc,
        dchi: turn_chi + dpsi * tg * cc * st - dpsi * ct - dtheta * tg * sc,
    })
}

/// Time derivative of the engagement state under body-frame accelerations.
///
/// The heading-angle rates carry the rotation of the LOS frame, so they are
/// evaluated with the `θ̇`, `ψ̇` computed here.
pub fn relative_derivatives(
    state: &EngagementState,
    u_p: &AccelCommand,
    u_t: &AccelCommand,
) -> Result<StateDerivative> {
    let (dr, dtheta, dpsi) = los_rates(state)?;
    Ok(StateDerivative {
        dr,
        dtheta,
        dpsi,
        pursuer: vehicle_rates(&state.pursuer, u_p, state.theta, dtheta, dpsi)?,
        target: vehicle_rates(&state.target, u_t, state.theta, dtheta, dpsi)?,
    })
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Spherical reflection of an (elevation, azimuth) pair. Returns the
/// canonical pair and whether the reflection flipped the elevation.
fn reflect(elevation: f64, azimuth: f64) -> (f64, f64, bool) {
    let e = wrap_pi(elevation);
    let (e, az, flipped) = if e > FRAC_PI_2 {
        (PI - e, azimuth + PI, true)
    } else if e < -FRAC_PI_2 {
        (-PI - e, azimuth + PI, true)
    } else {
        (e, azimuth, false)
    };
    (e, wrap_pi(az), flipped)
}

fn wrap_vehicle(v: VehicleState) -> VehicleState {
    let (gamma, chi, _) = reflect(v.gamma, v.chi);
    VehicleState { gamma, chi, ..v }
}

/// Brings every angle of the state into its canonical range.
///
/// An LOS elevation past a pole is reflected (`θ → π − θ`, `ψ → ψ + π`).
/// That flips the sense of the frame's lateral axes, so both vehicles'
/// heading angles are negated to keep the physical velocity directions.
pub fn wrap_angles(state: &EngagementState) -> EngagementState {
    let (theta, psi, flipped) = reflect(state.theta, state.psi);
    let mut pursuer = state.pursuer;
    let mut target = state.target;
    if flipped {
        for v in [&mut pursuer, &mut target] {
            v.gamma = -v.gamma;
            v.chi = -v.chi;
        }
    }
    EngagementState {
        theta,
        psi,
        pursuer: wrap_vehicle(pursuer),
        target: wrap_vehicle(target),
        ..*state
    }
}

/// A negative speed along `u` is the same velocity as a positive one along `−u`.
pub(crate) fn canonical_speed(v: VehicleState) -> VehicleState {
    if v.speed < 0.0 {
        VehicleState {
            speed: -v.speed,
            gamma: -v.gamma,
            chi: v.chi + PI,
        }
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(r: f64, theta: f64, psi: f64, p: VehicleState, t: VehicleState) -> EngagementState {
        EngagementState {
            t: 0.0,
            r,
            theta,
            psi,
            pursuer: p,
            target: t,
        }
    }

    #[test]
    fn head_on_closing() {
        let s = state(
            18.0,
            0.0,
            0.3,
            VehicleState::new(5.0, 0.0, 0.0),
            VehicleState::default(),
        );
        let d = relative_derivatives(&s, &AccelCommand::ZERO, &AccelCommand::ZERO).unwrap();
        assert_eq!(d.dr, -5.0);
        assert_eq!(d.dtheta, 0.0);
        assert_eq!(d.dpsi, 0.0);
    }

    #[test]
    fn matched_velocities_cancel() {
        let v = VehicleState::new(3.0, 0.2, -0.7);
        let s = state(10.0, 0.4, 1.0, v, v);
        let d = relative_derivatives(&s, &AccelCommand::ZERO, &AccelCommand::ZERO).unwrap();
        assert_eq!((d.dr, d.dtheta, d.dpsi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn guards() {
        let v = VehicleState::new(3.0, 0.2, -0.7);
        let near = state(0.005, 0.0, 0.0, v, v);
        assert!(matches!(
            los_rates(&near),
            Err(Error::GuardViolation {
                guard: Guard::Range,
                ..
            })
        ));
        let pole = state(5.0, FRAC_PI_2 - 1e-4, 0.0, v, v);
        assert!(matches!(
            los_rates(&pole),
            Err(Error::GuardViolation {
                guard: Guard::Elevation,
                ..
            })
        ));
        let parked = state(5.0, 0.0, 0.0, v, VehicleState::default());
        let turn = AccelCommand::new(0.0, 1.0, 0.0);
        assert!(relative_derivatives(&parked, &AccelCommand::ZERO, &turn).is_err());
        assert!(relative_derivatives(&parked, &AccelCommand::ZERO, &AccelCommand::ZERO).is_ok());
    }

    #[test]
    fn wrap_examples() {
        let v = VehicleState::new(1.0, 0.1, 0.2);
        let s = state(5.0, 0.0, PI + 0.1, v, v);
        let w = wrap_angles(&s);
        assert!((w.psi - (-PI + 0.1)).abs() < 1e-12);

        let s = state(5.0, FRAC_PI_2 + 0.1, 0.5, v, v);
        let w = wrap_angles(&s);
        assert!((w.theta - (FRAC_PI_2 - 0.1)).abs() < 1e-12);
        assert!((w.psi - wrap_pi(0.5 + PI)).abs() < 1e-12);
        assert!((w.pursuer.gamma + 0.1).abs() < 1e-12);

        let canonical = state(5.0, 0.3, -2.0, v, v);
        assert_eq!(wrap_angles(&canonical), canonical);
    }

    #[test]
    fn wrap_pi_boundaries() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI + 0.25) - (-PI + 0.25)).abs() < 1e-12);
    }
}
