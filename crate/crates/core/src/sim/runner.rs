use nalgebra::{SVector, Vector3};

use super::metrics::MetricsSummary;
use super::scenario::{Disturbance, Plant, ScenarioConfig, SpeedLoop};
use crate::error::{Error, Result};
use crate::guidance::{guidance_step_sampled, radial_accel, GuidanceParams, PursuerCommand};
use crate::kinematics::{
    body_axes, integrate::split_velocity, rk4_step, to_relative, AccelCommand, EngagementState,
    InertialState, LosFrame, V_GUARD,
};
use crate::target::{body_components, TargetModel};

/// Safety state of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SafetyFlags {
    /// `−a < ε < b`
    pub in_barrier: bool,
    /// `r_T < r < r_C`
    pub in_safe_shell: bool,
    pub saturated: bool,
}

/// Flags for a sample at range `r`.
///
/// The barrier interval and the safe shell are the same open set written in
/// two coordinates, so the two flags agree away from rounding at the edges.
pub fn safety_monitor(r: f64, command: &PursuerCommand, p: &GuidanceParams) -> SafetyFlags {
    let epsilon = r - p.desired_range;
    let in_barrier = p.contains(epsilon);
    let in_safe_shell = p.threat_radius() < r && r < p.connectivity_radius();
    debug_assert!(
        in_barrier == in_safe_shell
            || (epsilon + p.inner_bound).abs() < 1e-9
            || (epsilon - p.outer_bound).abs() < 1e-9
    );
    SafetyFlags {
        in_barrier,
        in_safe_shell,
        saturated: command.diag.saturated,
    }
}

/// Adds the plant disturbance to the masked channels.
pub fn inject_disturbance(u: &AccelCommand, t: f64, d: &Disturbance) -> AccelCommand {
    let w = d.amplitude * (d.frequency * t).sin();
    let [mr, mg, mc] = d.channels;
    AccelCommand {
        a_r: u.a_r + if mr { w } else { 0.0 },
        a_gamma: u.a_gamma + if mg { w } else { 0.0 },
        a_chi: u.a_chi + if mc { w } else { 0.0 },
    }
}

/// Target term of the range-error dynamics, i.e. the projection of the
/// target's acceleration on the LOS:
/// `a_T^r cos γ_T cos χ_T − a_T^γ sin γ_T cos χ_T − a_T^χ sin χ_T`.
pub fn target_range_term(u_t: &AccelCommand, state: &EngagementState) -> f64 {
    let (sg, cg) = state.target.gamma.sin_cos();
    let (sc, cc) = state.target.chi.sin_cos();
    u_t.a_r * cg * cc - u_t.a_gamma * sg * cc - u_t.a_chi * sc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub state: EngagementState,
    pub inertial: InertialState,
    pub command: PursuerCommand,
    /// Target term entering `ε̈`, m/s².
    pub delta: f64,
    pub flags: SafetyFlags,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&SimRecord> {
        self.records.last()
    }
}

/// Why and when a run stopped early.
#[derive(Debug)]
pub struct SafetyReport {
    pub t: f64,
    pub error: Error,
}

#[derive(Debug)]
pub enum Termination {
    Completed,
    Aborted(SafetyReport),
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

#[derive(Debug)]
pub struct SimOutcome {
    pub trace: SimTrace,
    pub metrics: MetricsSummary,
    pub termination: Termination,
}

/// Plant state: pursuer position, speed, unit heading; target position.
type PlantState = SVector<f64, 10>;

/// Command held over one guidance interval.
///
/// The lateral channels are resolved on the body axes at the sample instant
/// and the resulting world-frame vector is held, projected onto the plane
/// normal to the current velocity. Re-resolving the held `(a_gamma, a_chi)`
/// on the instantaneous axes instead would make the command swing with the
/// heading azimuth, which is ill-conditioned when the velocity is close to
/// the LOS-frame vertical.
struct Held {
    command: PursuerCommand,
    e_gamma: Vector3<f64>,
    e_chi: Vector3<f64>,
}

impl Held {
    fn new(command: PursuerCommand, inertial: &InertialState) -> Result<Self> {
        let (frame, ..) = LosFrame::from_relative_position(&(inertial.pos_t - inertial.pos_p))?;
        let h = frame.heading_of(&inertial.vel_p);
        let (e_gamma, e_chi) = body_axes(&frame, h.gamma, h.chi);
        Ok(Self {
            command,
            e_gamma,
            e_chi,
        })
    }
}

struct ClosedLoop<'a> {
    cfg: &'a ScenarioConfig,
    model: TargetModel,
}

impl ClosedLoop<'_> {
    fn pack(&self, s: &InertialState) -> PlantState {
        let fallback = (s.pos_t - s.pos_p).normalize();
        let (speed, dir) = split_velocity(&s.vel_p, &fallback);
        let mut y = PlantState::zeros();
        y.fixed_rows_mut::<3>(0).copy_from(&s.pos_p);
        y[3] = speed;
        y.fixed_rows_mut::<3>(4).copy_from(&dir);
        y.fixed_rows_mut::<3>(7).copy_from(&s.pos_t);
        y
    }

    fn unpack(&self, t: f64, y: &PlantState) -> InertialState {
        let dir: Vector3<f64> = y.fixed_rows::<3>(4).into();
        InertialState {
            t,
            pos_p: y.fixed_rows::<3>(0).into(),
            vel_p: dir * y[3],
            pos_t: y.fixed_rows::<3>(7).into(),
            vel_t: self.model.velocity(t),
        }
    }

    /// Body-frame command actually applied at time `t`.
    fn applied(&self, held: &PursuerCommand, speed: f64, t: f64) -> AccelCommand {
        let mut u = held.accel();
        if self.cfg.speed_loop == SpeedLoop::Continuous {
            u.a_r = radial_accel(speed, &self.cfg.guidance);
        }
        match self.cfg.plant {
            Plant::Kinematic => u,
            Plant::Uncertain => inject_disturbance(&u, t, &self.cfg.disturbance),
        }
    }

    fn derivative(&self, t: f64, y: &PlantState, held: &Held) -> Result<PlantState> {
        let dir: Vector3<f64> = y.fixed_rows::<3>(4).into();
        let speed = y[3];
        let u = self.applied(&held.command, speed, t);
        let lateral = held.e_gamma * u.a_gamma + held.e_chi * u.a_chi;
        let normal = lateral - dir * lateral.dot(&dir);

        let mut d = PlantState::zeros();
        d.fixed_rows_mut::<3>(0).copy_from(&(dir * speed));
        d[3] = u.a_r;
        if normal != Vector3::zeros() {
            if speed < V_GUARD {
                return Err(Error::ZeroSpeedFrame { speed });
            }
            d.fixed_rows_mut::<3>(4).copy_from(&(normal / speed));
        }
        d.fixed_rows_mut::<3>(7).copy_from(&self.model.velocity(t));
        Ok(d)
    }

    fn record(&self, inertial: InertialState, command: PursuerCommand) -> Result<SimRecord> {
        let state = to_relative(&inertial)?;
        let (frame, ..) = LosFrame::from_relative_position(&(inertial.pos_t - inertial.pos_p))?;
        let u_t = body_components(&self.model.accel(inertial.t), &inertial.vel_t, &frame);
        Ok(SimRecord {
            t: inertial.t,
            state,
            inertial,
            command,
            delta: target_range_term(&u_t, &state),
            flags: safety_monitor(state.r, &command, &self.cfg.guidance),
        })
    }

    /// Record for a sample where guidance could not be evaluated.
    fn failure_record(&self, inertial: InertialState) -> Option<SimRecord> {
        let mut rec = self.record(inertial, PursuerCommand::default()).ok()?;
        rec.command.diag.epsilon = rec.state.r - self.cfg.guidance.desired_range;
        Some(rec)
    }
}

/// Runs one closed-loop engagement.
///
/// Guidance is evaluated every `dt_guidance` from ground-truth relative
/// state; the lateral commands are held over the `n_substeps` RK4 plant
/// steps in between. The run stops early, with a [`SafetyReport`] and a
/// final record at the failure time, if the range error leaves the barrier
/// interval at any plant step or a kinematic guard trips.
///
/// Configuration errors are returned as `Err`; safety aborts are not.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimOutcome> {
    cfg.validate()?;
    let plant = ClosedLoop {
        cfg,
        model: cfg.target_model()?,
    };
    let p = &cfg.guidance;

    let frame0 = cfg.initial_frame()?;
    let mut inertial = InertialState {
        t: 0.0,
        pos_p: cfg.pursuer_position(),
        vel_p: frame0.direction(cfg.pursuer.gamma, cfg.pursuer.chi) * cfg.pursuer.speed,
        pos_t: cfg.target_position(),
        vel_t: plant.model.velocity(0.0),
    };

    let steps = cfg.steps();
    let h = cfg.dt_guidance / cfg.n_substeps as f64;
    let mut records = Vec::with_capacity(steps + 1);
    let mut termination = Termination::Completed;

    'outer: for k in 0..=steps {
        let t_k = k as f64 * cfg.dt_guidance;
        let state = match to_relative(&inertial) {
            Ok(s) => s,
            Err(error) => {
                termination = Termination::Aborted(SafetyReport { t: t_k, error });
                break;
            }
        };
        let command = match guidance_step_sampled(&state, p, cfg.dt_guidance) {
            Ok(c) => c,
            Err(error) => {
                records.extend(plant.failure_record(inertial));
                termination = Termination::Aborted(SafetyReport { t: t_k, error });
                break;
            }
        };
        records.push(plant.record(inertial, command)?);
        if k == steps {
            break;
        }

        let held = match Held::new(command, &inertial) {
            Ok(h) => h,
            Err(error) => {
                termination = Termination::Aborted(SafetyReport { t: t_k, error });
                break;
            }
        };
        let mut y = plant.pack(&inertial);
        for j in 0..cfg.n_substeps {
            let t = t_k + j as f64 * h;
            let next = rk4_step(t, &y, h, |ts, ys| plant.derivative(ts, ys, &held));
            let t_next = if j + 1 == cfg.n_substeps {
                (k + 1) as f64 * cfg.dt_guidance
            } else {
                t + h
            };
            match next {
                Ok(mut yn) => {
                    let dir: Vector3<f64> = yn.fixed_rows::<3>(4).into();
                    yn.fixed_rows_mut::<3>(4).copy_from(&dir.normalize());
                    y = yn;
                }
                Err(error) => {
                    records.extend(plant.failure_record(plant.unpack(t, &y)));
                    termination = Termination::Aborted(SafetyReport { t, error });
                    break 'outer;
                }
            }
            let r = (y.fixed_rows::<3>(7) - y.fixed_rows::<3>(0)).norm();
            let epsilon = r - p.desired_range;
            if !p.contains(epsilon) {
                let mut rec = plant.record(plant.unpack(t_next, &y), command)?;
                rec.command.diag.epsilon = epsilon;
                records.push(rec);
                termination = Termination::Aborted(SafetyReport {
                    t: t_next,
                    error: Error::OutOfBarrier {
                        epsilon,
                        lower: -p.inner_bound,
                        upper: p.outer_bound,
                    },
                });
                break 'outer;
            }
        }
        inertial = plant.unpack((k + 1) as f64 * cfg.dt_guidance, &y);
    }

    let trace = SimTrace { records };
    let metrics = MetricsSummary::compute(&trace, cfg, &termination);
    Ok(SimOutcome {
        trace,
        metrics,
        termination,
    })
}
