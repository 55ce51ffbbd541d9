//! Barrier-Lyapunov target-enclosing guidance.
//!
//! Three pieces make up a command:
//!
//! * a speed-hold law for the radial (along-velocity) acceleration,
//! * a backstepping range controller with an asymmetric barrier on the range
//!   error `ε = r − r_d ∈ (−a, b)`, producing the scalar effective lateral
//!   control `U = sin γ_P cos χ_P · a_γ + sin χ_P · a_χ`,
//! * a weighted least-effort split of `U` into pitch and yaw accelerations.
//!
//! All functions are pure; the same inputs give bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{los_rates, EngagementState, StateDerivative};

/// Allocation denominators below this are treated as singular.
pub const D_GUARD: f64 = 1e-8;

/// Escape magnitude used in the singular branch when saturation is disabled.
const UNSATURATED_ESCAPE: f64 = 40.0;

/// How the barrier term of the effective control pairs the branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierPairing {
    /// Outer branch (`ε > 0`) uses `b² − ε²`, inner branch `a² − ε²`,
    /// matching the barrier function and the stabilizing function.
    #[default]
    Matched,
    /// Branches transposed: outer uses `a² − ε²`, inner `b² − ε²`.
    Swapped,
}

/// Sign of the term compensating the pursuer's radial acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialCompensation {
    /// `U` contains `+a_r cos γ_P cos χ_P`, which cancels the
    /// `−a_r cos γ_P cos χ_P` the radial acceleration puts into `r̈`.
    #[default]
    Cancel,
    /// Opposite sign; doubles the radial coupling instead of removing it.
    Reinforce,
}

/// How the range law is realised when it is only evaluated every `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// The `α̇` feedforward and the sliding term are stepped implicitly over
    /// the hold interval, so their stiff parts cannot overshoot. Tends to
    /// the continuous law as `dt → 0`.
    #[default]
    Implicit,
    /// The continuous-time law evaluated at the sample instant and held.
    Explicit,
}

/// Active barrier branch, the switching function `q(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `ε ≤ 0`, `q = 0`.
    Inner,
    /// `ε > 0`, `q = 1`.
    Outer,
}

impl Branch {
    pub fn of(epsilon: f64) -> Self {
        if epsilon > 0.0 {
            Branch::Outer
        } else {
            Branch::Inner
        }
    }

    pub fn q(self) -> u8 {
        match self {
            Branch::Inner => 0,
            Branch::Outer => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceParams {
    /// `V_d`, m/s
    pub desired_speed: f64,
    /// `r_d`, m
    pub desired_range: f64,
    /// `a = r_d − r_T`, m
    pub inner_bound: f64,
    /// `b = r_C − r_d`, m
    pub outer_bound: f64,
    /// Speed gain, 1/s.
    pub k_v: f64,
    /// Stabilizing-function gain.
    pub k_1: f64,
    /// Sliding gain, m/s².
    pub k_2: f64,
    /// Pitch-channel allocation weight.
    pub w_1: f64,
    /// Yaw-channel allocation weight.
    pub w_2: f64,
    /// Half-width of the sliding boundary layer, m/s. Zero gives a pure sign.
    #[serde(default = "default_boundary_layer")]
    pub boundary_layer: f64,
    /// Lateral saturation per channel, m/s². May be infinite.
    #[serde(default = "default_a_sat")]
    pub a_sat: f64,
    #[serde(default)]
    pub barrier_pairing: BarrierPairing,
    #[serde(default)]
    pub radial_compensation: RadialCompensation,
    #[serde(default)]
    pub sampling: Sampling,
}

fn default_boundary_layer() -> f64 {
    0.05
}

fn default_a_sat() -> f64 {
    40.0
}

impl GuidanceParams {
    /// Gains used throughout the bundled scenarios for a given `r_d`, `V_d`.
    pub fn with_targets(desired_range: f64, desired_speed: f64) -> Self {
        Self {
            desired_speed,
            desired_range,
            inner_bound: 5.0,
            outer_bound: 15.0,
            k_v: 1.0,
            k_1: 0.008,
            k_2: 30.0,
            w_1: 0.5,
            w_2: 0.5,
            boundary_layer: default_boundary_layer(),
            a_sat: default_a_sat(),
            barrier_pairing: BarrierPairing::Matched,
            radial_compensation: RadialCompensation::Cancel,
            sampling: Sampling::Implicit,
        }
    }

    /// `r_T = r_d − a`
    pub fn threat_radius(&self) -> f64 {
        self.desired_range - self.inner_bound
    }

    /// `r_C = r_d + b`
    pub fn connectivity_radius(&self) -> f64 {
        self.desired_range + self.outer_bound
    }

    pub fn contains(&self, epsilon: f64) -> bool {
        -self.inner_bound < epsilon && epsilon < self.outer_bound
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("inner_bound", self.inner_bound),
            ("outer_bound", self.outer_bound),
            ("k_v", self.k_v),
            ("k_1", self.k_1),
            ("k_2", self.k_2),
            ("w_1", self.w_1),
            ("w_2", self.w_2),
            ("a_sat", self.a_sat),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.desired_range > self.inner_bound) {
            return Err(Error::config(format!(
                "desired_range {} must exceed inner_bound {} so the threat radius is positive",
                self.desired_range, self.inner_bound
            )));
        }
        if !(self.boundary_layer >= 0.0) {
            return Err(Error::config("boundary_layer must be non-negative"));
        }
        if !(self.desired_speed >= 0.0) {
            return Err(Error::config("desired_speed must be non-negative"));
        }
        Ok(())
    }

    fn check_barrier(&self, epsilon: f64) -> Result<()> {
        if self.contains(epsilon) {
            Ok(())
        } else {
            Err(Error::OutOfBarrier {
                epsilon,
                lower: -self.inner_bound,
                upper: self.outer_bound,
            })
        }
    }

    fn bound_sq(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Outer => self.outer_bound * self.outer_bound,
            Branch::Inner => self.inner_bound * self.inner_bound,
        }
    }
}

/// Speed-hold law `a_r = −K_v (V_P − V_d)`.
pub fn radial_accel(speed: f64, p: &GuidanceParams) -> f64 {
    -p.k_v * (speed - p.desired_speed)
}

/// Range error `ε = r − r_d` and its switching branch.
pub fn range_error(r: f64, p: &GuidanceParams) -> (f64, Branch) {
    let epsilon = r - p.desired_range;
    (epsilon, Branch::of(epsilon))
}

/// Stabilizing function `α = −(k² − ε²) K_1 ε³`, `k` the active bound.
pub fn stabilizing_alpha(epsilon: f64, branch: Branch, p: &GuidanceParams) -> Result<f64> {
    p.check_barrier(epsilon)?;
    let e2 = epsilon * epsilon;
    Ok(-(p.bound_sq(branch) - e2) * p.k_1 * e2 * epsilon)
}

/// `α̇ = (dα/dε) ε̇` with `dα/dε = −K_1 (3k²ε² − 5ε⁴)`.
pub fn alpha_dot(
    epsilon: f64,
    epsilon_dot: f64,
    branch: Branch,
    p: &GuidanceParams,
) -> Result<f64> {
    p.check_barrier(epsilon)?;
    let e2 = epsilon * epsilon;
    let slope = -p.k_1 * (3.0 * p.bound_sq(branch) * e2 - 5.0 * e2 * e2);
    Ok(slope * epsilon_dot)
}

/// Coefficient `B(ε)` of the barrier term `−B(ε) ε`.
pub fn barrier_gain(epsilon: f64, branch: Branch, p: &GuidanceParams) -> f64 {
    let e2 = epsilon * epsilon;
    let (a2, b2) = (p.inner_bound * p.inner_bound, p.outer_bound * p.outer_bound);
    let (outer, inner) = match p.barrier_pairing {
        BarrierPairing::Matched => (b2, a2),
        BarrierPairing::Swapped => (a2, b2),
    };
    match branch {
        Branch::Outer => 1.0 / (outer - e2),
        Branch::Inner => 1.0 / (inner - e2),
    }
}

/// Asymmetric barrier Lyapunov function
/// `V_1 = ½ log(k² / (k² − ε²))`, `k` the active bound.
///
/// Infinite outside the barrier interval. Its derivative along `ε̇` is
/// `B(ε) ε ε̇` for the matched pairing.
pub fn barrier_lyapunov(epsilon: f64, p: &GuidanceParams) -> f64 {
    if !p.contains(epsilon) {
        return f64::INFINITY;
    }
    let k2 = p.bound_sq(Branch::of(epsilon));
    0.5 * (k2 / (k2 - epsilon * epsilon)).ln()
}

/// Boundary-layer sign: `clamp(z / φ, −1, 1)`, or `sign(z)` when `φ = 0`.
pub fn smoothed_sign(z: f64, boundary_layer: f64) -> f64 {
    if boundary_layer > 0.0 {
        (z / boundary_layer).clamp(-1.0, 1.0)
    } else if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Intermediate quantities of the range controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveControl {
    /// `U`, m/s²
    pub u: f64,
    /// `z = ṙ − α`, m/s
    pub z: f64,
    pub epsilon: f64,
    pub branch: Branch,
    pub alpha: f64,
    pub alpha_dot: f64,
    /// Centripetal part `−r θ̇² − r cos²θ ψ̇²`.
    pub centripetal: f64,
}

/// Effective lateral control of the range loop.
///
/// `derivs` must carry the true `ṙ`, `θ̇`, `ψ̇` of `state`; only those three
/// rates are read.
pub fn effective_control(
    state: &EngagementState,
    derivs: &StateDerivative,
    p: &GuidanceParams,
) -> Result<EffectiveControl> {
    let (epsilon, branch) = range_error(state.r, p);
    let alpha = stabilizing_alpha(epsilon, branch, p)?;
    let alpha_dot = alpha_dot(epsilon, derivs.dr, branch, p)?;
    let z = derivs.dr - alpha;

    let ct = state.theta.cos();
    let centripetal =
        -state.r * derivs.dtheta * derivs.dtheta - state.r * ct * ct * derivs.dpsi * derivs.dpsi;

    let coupling = radial_accel(state.pursuer.speed, p) * state.pursuer.los_cosine();
    let radial = match p.radial_compensation {
        RadialCompensation::Cancel => coupling,
        RadialCompensation::Reinforce => -coupling,
    };

    let u = centripetal + radial + alpha_dot
        - p.k_2 * smoothed_sign(z, p.boundary_layer)
        - barrier_gain(epsilon, branch, p) * epsilon;

    Ok(EffectiveControl {
        u,
        z,
        epsilon,
        branch,
        alpha,
        alpha_dot,
        centripetal,
    })
}

/// One implicit step of `ż = −K_2 sgn_bl(z) + drift` over `dt`.
///
/// Inside the boundary layer the linear part is solved exactly for the end
/// value; outside it the sign is fixed and the step is explicit. With a pure
/// sign (`φ = 0`) the step lands on `z = 0` whenever the gain can reach it.
pub fn implicit_sliding_step(z: f64, drift: f64, dt: f64, p: &GuidanceParams) -> f64 {
    let w = z + dt * drift;
    let reach = p.k_2 * dt;
    let phi = p.boundary_layer;
    if phi > 0.0 {
        let inner = w / (1.0 + reach / phi);
        if inner.abs() <= phi {
            return inner;
        }
    } else if w.abs() <= reach {
        return 0.0;
    }
    w - reach * w.signum()
}

/// Effective control realised over a hold interval of `dt` seconds.
///
/// With [`Sampling::Implicit`] and `dt > 0`, `z` is advanced by
/// [`implicit_sliding_step`] and `ε̇` at the end of the interval is solved
/// from `z⁺ = ε̇⁺ − α(ε + dt ε̇⁺)` linearised in `ε`. The resulting `ε̈` then
/// replaces `α̇ − K_2 sgn_bl(z) − B(ε) ε` in `U`. Where `dα/dε > 0` the `α`
/// update is explicit. Otherwise, and for `dt = 0`, this is
/// [`effective_control`].
pub fn sampled_control(
    state: &EngagementState,
    derivs: &StateDerivative,
    p: &GuidanceParams,
    dt: f64,
) -> Result<EffectiveControl> {
    let ec = effective_control(state, derivs, p)?;
    if p.sampling == Sampling::Explicit || !(dt > 0.0) {
        return Ok(ec);
    }
    let drift = -barrier_gain(ec.epsilon, ec.branch, p) * ec.epsilon;
    let z_next = implicit_sliding_step(ec.z, drift, dt, p);
    let slope = alpha_dot(ec.epsilon, 1.0, ec.branch, p)?;
    let rate_next = if slope <= 0.0 {
        (z_next + ec.alpha) / (1.0 - slope * dt)
    } else {
        z_next + ec.alpha + slope * dt * derivs.dr
    };
    let radial_part = ec.u - ec.centripetal - ec.alpha_dot
        + p.k_2 * smoothed_sign(ec.z, p.boundary_layer)
        - drift;
    Ok(EffectiveControl {
        u: ec.centripetal + radial_part + (rate_next - derivs.dr) / dt,
        ..ec
    })
}

/// Effective lead angle `σ_P = arccos(cos γ_P cos χ_P) ∈ [0, π]`.
pub fn lead_angle(gamma: f64, chi: f64) -> f64 {
    (gamma.cos() * chi.cos()).clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub a_gamma: f64,
    pub a_chi: f64,
    /// At least one channel was clamped, or the singular escape was used.
    pub saturated: bool,
    /// The allocation denominator fell below [`D_GUARD`].
    pub singular: bool,
}

/// Splits `U` into pitch and yaw accelerations minimising
/// `sqrt((a_γ/w_1)² + (a_χ/w_2)²)` subject to
/// `sin γ cos χ · a_γ + sin χ · a_χ = U`, then clamps each channel.
///
/// Near zero lead angle the split is singular; both channels are then driven
/// to the saturation value with the sign of `U` to turn the pursuer off the
/// line of sight.
pub fn allocate_lateral(u: f64, gamma: f64, chi: f64, p: &GuidanceParams) -> Allocation {
    let pitch = gamma.sin() * chi.cos();
    let yaw = chi.sin();
    let (w1s, w2s) = (p.w_1 * p.w_1, p.w_2 * p.w_2);
    let d = pitch * pitch * w1s + yaw * yaw * w2s;

    if d < D_GUARD {
        let mag = if p.a_sat.is_finite() {
            p.a_sat
        } else {
            UNSATURATED_ESCAPE
        };
        let s = if u < 0.0 { -mag } else { mag };
        return Allocation {
            a_gamma: s,
            a_chi: s,
            saturated: true,
            singular: true,
        };
    }

    let a_gamma = pitch * w1s * u / d;
    let a_chi = yaw * w2s * u / d;
    let clamp = |a: f64| a.clamp(-p.a_sat, p.a_sat);
    let (cg, cc) = (clamp(a_gamma), clamp(a_chi));
    Allocation {
        a_gamma: cg,
        a_chi: cc,
        saturated: cg != a_gamma || cc != a_chi,
        singular: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub epsilon: f64,
    pub z: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub u: f64,
    /// Effective lead angle, rad.
    pub sigma: f64,
    pub q: u8,
    pub saturated: bool,
    pub singular: bool,
    pub v1: f64,
    /// `V_1 + z²/2`
    pub v2: f64,
}

/// Complete pursuer command with the quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PursuerCommand {
    pub a_r: f64,
    pub a_gamma: f64,
    pub a_chi: f64,
    pub diag: Diagnostics,
}

impl PursuerCommand {
    pub fn accel(&self) -> crate::kinematics::AccelCommand {
        crate::kinematics::AccelCommand::new(self.a_r, self.a_gamma, self.a_chi)
    }
}

/// Full guidance evaluation from ground-truth relative state, using the
/// continuous-time law.
pub fn guidance_step(state: &EngagementState, p: &GuidanceParams) -> Result<PursuerCommand> {
    guidance_step_sampled(state, p, 0.0)
}

/// [`guidance_step`] for a command that will be held for `dt` seconds; see
/// [`sampled_control`].
pub fn guidance_step_sampled(
    state: &EngagementState,
    p: &GuidanceParams,
    dt: f64,
) -> Result<PursuerCommand> {
    let (dr, dtheta, dpsi) = los_rates(state)?;
    let derivs = StateDerivative {
        dr,
        dtheta,
        dpsi,
        ..Default::default()
    };
    let ec = sampled_control(state, &derivs, p, dt)?;
    let (gamma, chi) = (state.pursuer.gamma, state.pursuer.chi);
    let alloc = allocate_lateral(ec.u, gamma, chi, p);
    let v1 = barrier_lyapunov(ec.epsilon, p);
    Ok(PursuerCommand {
        a_r: radial_accel(state.pursuer.speed, p),
        a_gamma: alloc.a_gamma,
        a_chi: alloc.a_chi,
        diag: Diagnostics {
            epsilon: ec.epsilon,
            z: ec.z,
            alpha: ec.alpha,
            alpha_dot: ec.alpha_dot,
            u: ec.u,
            sigma: lead_angle(gamma, chi),
            q: ec.branch.q(),
            saturated: alloc.saturated,
            singular: alloc.singular,
            v1,
            v2: v1 + 0.5 * ec.z * ec.z,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::VehicleState;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn params() -> GuidanceParams {
        GuidanceParams::with_targets(8.0, 5.0)
    }

    #[test]
    fn radial_law() {
        let p = params();
        assert_eq!(radial_accel(5.0, &p), 0.0);
        assert_eq!(radial_accel(6.0, &p), -1.0);
    }

    #[test]
    fn range_error_branches() {
        let p = params();
        assert_eq!(range_error(8.0, &p), (0.0, Branch::Inner));
        assert_eq!(range_error(18.0, &p), (10.0, Branch::Outer));
        assert_eq!(range_error(7.0, &p), (-1.0, Branch::Inner));
    }

    #[test]
    fn alpha_values() {
        let p = params();
        assert_eq!(stabilizing_alpha(0.0, Branch::Inner, &p).unwrap(), 0.0);
        let a = stabilizing_alpha(1.0, Branch::Outer, &p).unwrap();
        assert!((a - -1.792).abs() < 1e-12);
        let a = stabilizing_alpha(-1.0, Branch::Inner, &p).unwrap();
        assert!((a - 0.192).abs() < 1e-12);
        assert!(matches!(
            stabilizing_alpha(15.0, Branch::Outer, &p),
            Err(Error::OutOfBarrier { .. })
        ));
        assert!(stabilizing_alpha(-5.0, Branch::Inner, &p).is_err());
    }

    #[test]
    fn alpha_dot_values() {
        let p = params();
        assert_eq!(alpha_dot(0.0, 3.7, Branch::Inner, &p).unwrap(), 0.0);
        let ad = alpha_dot(1.0, -2.0, Branch::Outer, &p).unwrap();
        assert!((ad - 10.72).abs() < 1e-12);
    }

    #[test]
    fn switch_is_continuous_at_zero() {
        let p = params();
        for e in [1e-6, -1e-6] {
            let a_in = stabilizing_alpha(e, Branch::Inner, &p).unwrap();
            let a_out = stabilizing_alpha(e, Branch::Outer, &p).unwrap();
            assert!((a_in - a_out).abs() < 1e-15);
            let d_in = alpha_dot(e, 1.0, Branch::Inner, &p).unwrap();
            let d_out = alpha_dot(e, 1.0, Branch::Outer, &p).unwrap();
            assert!((d_in - d_out).abs() < 1e-9);
        }
    }

    #[test]
    fn lead_angles() {
        assert_eq!(lead_angle(0.0, 0.0), 0.0);
        assert!((lead_angle(0.0, FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        let d = 10f64.to_radians();
        let s = lead_angle(d, d).to_degrees();
        assert!((s - 14.1).abs() < 0.05, "{s}");
    }

    #[test]
    fn allocation_pitch_channel_vanishes() {
        let p = params();
        let a = allocate_lateral(2.0, 0.0, FRAC_PI_4, &p);
        assert_eq!(a.a_gamma, 0.0);
        assert!((a.a_chi - 2.0 / FRAC_PI_4.sin()).abs() < 1e-12);
        assert!(!a.saturated);
    }

    #[test]
    fn singular_allocation_escapes() {
        let p = params();
        let a = allocate_lateral(-3.0, 0.0, 0.0, &p);
        assert!(a.singular && a.saturated);
        assert_eq!((a.a_gamma, a.a_chi), (-40.0, -40.0));
        let a = allocate_lateral(0.0, 1e-6, 1e-6, &p);
        assert_eq!((a.a_gamma, a.a_chi), (40.0, 40.0));
    }

    #[test]
    fn saturation_clamps_each_channel() {
        let p = params();
        let a = allocate_lateral(500.0, 0.3, 0.3, &p);
        assert!(a.saturated && !a.singular);
        assert_eq!(a.a_gamma, 40.0);
        assert_eq!(a.a_chi, 40.0);
    }

    #[test]
    fn full_equilibrium() {
        let p = params();
        let s = EngagementState {
            t: 0.0,
            r: 8.0,
            theta: 0.0,
            psi: 0.3,
            pursuer: VehicleState::new(5.0, 0.2, 0.0),
            target: VehicleState::new(5.0, 0.2, 0.0),
        };
        let c = guidance_step(&s, &p).unwrap();
        assert_eq!(c.a_r, 0.0);
        assert_eq!(c.diag.u, 0.0);
        assert_eq!((c.a_gamma, c.a_chi), (0.0, 0.0));
        assert!(!c.diag.singular);
        assert_eq!(c.diag.v1, 0.0);
        assert_eq!(c.diag.v2, 0.0);
    }

    #[test]
    fn barrier_grows_to_the_bounds() {
        let p = params();
        assert_eq!(barrier_lyapunov(0.0, &p), 0.0);
        let mut last = 0.0;
        for k in 1..1000 {
            let e = 15.0 * k as f64 / 1000.0;
            let v = barrier_lyapunov(e, &p);
            assert!(v > last);
            last = v;
        }
        assert!(barrier_lyapunov(15.0 - 1e-12, &p) > 10.0);
        assert_eq!(barrier_lyapunov(15.0, &p), f64::INFINITY);
    }

    #[test]
    fn validation() {
        let mut p = params();
        assert!(p.validate().is_ok());
        p.desired_range = 4.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.k_1 = 0.0;
        assert!(p.validate().is_err());
    }
}
