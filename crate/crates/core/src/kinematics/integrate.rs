use nalgebra::{SVector, Vector3};

use super::frames::{body_axes, InertialState, LosFrame};
use super::{
    canonical_speed, relative_derivatives, wrap_angles, AccelCommand, EngagementState,
    VehicleState, V_GUARD,
};
use crate::error::{Error, Result};

/// One classical fourth-order Runge–Kutta step of `ẏ = f(t, y)`.
pub fn rk4_step<const N: usize, F>(
    t: f64,
    y: &SVector<f64, N>,
    h: f64,
    mut f: F,
) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

fn pack_relative(s: &EngagementState) -> SVector<f64, 9> {
    SVector::<f64, 9>::from_column_slice(&[
        s.r,
        s.theta,
        s.psi,
        s.pursuer.speed,
        s.pursuer.gamma,
        s.pursuer.chi,
        s.target.speed,
        s.target.gamma,
        s.target.chi,
    ])
}

fn unpack_relative(t: f64, y: &SVector<f64, 9>) -> EngagementState {
    EngagementState {
        t,
        r: y[0],
        theta: y[1],
        psi: y[2],
        pursuer: VehicleState::new(y[3], y[4], y[5]),
        target: VehicleState::new(y[6], y[7], y[8]),
    }
}

/// Advances the relative state by `dt` with both commands held constant.
pub fn step_relative(
    state: &EngagementState,
    u_p: &AccelCommand,
    u_t: &AccelCommand,
    dt: f64,
) -> Result<EngagementState> {
    if !(dt > 0.0) {
        return Err(Error::config(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let y = rk4_step(state.t, &pack_relative(state), dt, |t, y| {
        let d = relative_derivatives(&unpack_relative(t, y), u_p, u_t)?;
        Ok(SVector::<f64, 9>::from_column_slice(&[
            d.dr,
            d.dtheta,
            d.dpsi,
            d.pursuer.dspeed,
            d.pursuer.dgamma,
            d.pursuer.dchi,
            d.target.dspeed,
            d.target.dgamma,
            d.target.dchi,
        ]))
    })?;
    let mut next = unpack_relative(state.t + dt, &y);
    next.pursuer = canonical_speed(next.pursuer);
    next.target = canonical_speed(next.target);
    Ok(wrap_angles(&next))
}

/// Rate of change of a vehicle's unit heading under body-frame lateral
/// accelerations, with the body axes taken relative to `frame`.
pub(crate) fn heading_rate(
    frame: &LosFrame,
    dir: &Vector3<f64>,
    speed: f64,
    cmd: &AccelCommand,
) -> Result<Vector3<f64>> {
    if !cmd.has_lateral() {
        return Ok(Vector3::zeros());
    }
    if speed < V_GUARD {
        return Err(Error::ZeroSpeedFrame { speed });
    }
    let h = frame.heading_of(dir);
    let (e_gamma, e_chi) = body_axes(frame, h.gamma, h.chi);
    Ok((e_gamma * cmd.a_gamma + e_chi * cmd.a_chi) / speed)
}

/// Splits a velocity into speed and unit heading. A zero velocity gets the
/// `fallback` heading.
pub(crate) fn split_velocity(v: &Vector3<f64>, fallback: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let speed = v.norm();
    if speed > 0.0 {
        (speed, v / speed)
    } else {
        (0.0, *fallback)
    }
}

/// Advances the world-frame state by `dt` with body-frame commands held
/// constant.
///
/// Each vehicle is carried as position, speed and unit heading so that the
/// speed obeys `V̇ = a_r` exactly; the heading is re-normalised after the step.
pub fn step_inertial(
    state: &InertialState,
    u_p: &AccelCommand,
    u_t: &AccelCommand,
    dt: f64,
) -> Result<InertialState> {
    if !(dt > 0.0) {
        return Err(Error::config(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let los = state.pos_t - state.pos_p;
    let fallback = if los.norm() > 0.0 {
        los.normalize()
    } else {
        Vector3::x()
    };
    let (vp, dp) = split_velocity(&state.vel_p, &fallback);
    let (vt, dtg) = split_velocity(&state.vel_t, &fallback);
    if u_p.has_lateral() && vp < V_GUARD {
        return Err(Error::ZeroSpeedFrame { speed: vp });
    }
    if u_t.has_lateral() && vt < V_GUARD {
        return Err(Error::ZeroSpeedFrame { speed: vt });
    }

    let mut y = SVector::<f64, 14>::zeros();
    y.fixed_rows_mut::<3>(0).copy_from(&state.pos_p);
    y[3] = vp;
    y.fixed_rows_mut::<3>(4).copy_from(&dp);
    y.fixed_rows_mut::<3>(7).copy_from(&state.pos_t);
    y[10] = vt;
    y.fixed_rows_mut::<3>(11).copy_from(&dtg);

    let y = rk4_step(state.t, &y, dt, |_, y| {
        let pos_p: Vector3<f64> = y.fixed_rows::<3>(0).into();
        let dir_p: Vector3<f64> = y.fixed_rows::<3>(4).into();
        let pos_t: Vector3<f64> = y.fixed_rows::<3>(7).into();
        let dir_t: Vector3<f64> = y.fixed_rows::<3>(11).into();
        let (frame, ..) = LosFrame::from_relative_position(&(pos_t - pos_p))?;

        let mut d = SVector::<f64, 14>::zeros();
        d.fixed_rows_mut::<3>(0).copy_from(&(dir_p * y[3]));
        d[3] = u_p.a_r;
        d.fixed_rows_mut::<3>(4)
            .copy_from(&heading_rate(&frame, &dir_p, y[3], u_p)?);
        d.fixed_rows_mut::<3>(7).copy_from(&(dir_t * y[10]));
        d[10] = u_t.a_r;
        d.fixed_rows_mut::<3>(11)
            .copy_from(&heading_rate(&frame, &dir_t, y[10], u_t)?);
        Ok(d)
    })?;

    let dir_p: Vector3<f64> = y.fixed_rows::<3>(4).into();
    let dir_t: Vector3<f64> = y.fixed_rows::<3>(11).into();
    Ok(InertialState {
        t: state.t + dt,
        pos_p: y.fixed_rows::<3>(0).into(),
        vel_p: dir_p.normalize() * y[3],
        pos_t: y.fixed_rows::<3>(7).into(),
        vel_t: dir_t.normalize() * y[10],
    })
}
