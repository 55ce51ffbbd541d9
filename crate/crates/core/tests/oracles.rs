//! Guidance and kinematics values checked against independent world-frame
//! computations.

use nalgebra::Vector3;
use target_enclosing::guidance::{effective_control, guidance_step, GuidanceParams, Sampling};
use target_enclosing::kinematics::{
    los_rates, to_relative, InertialState, LosFrame, StateDerivative,
};
use target_enclosing::sim::{target_range_term, ScenarioConfig};
use target_enclosing::target::body_components;

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Unit vector with LOS-frame elevation `g` and azimuth `c`, from the LOS
/// angles, written out in world components.
fn heading(theta: f64, psi: f64, g: f64, c: f64) -> Vector3<f64> {
    let e_r = Vector3::new(
        theta.cos() * psi.cos(),
        theta.cos() * psi.sin(),
        theta.sin(),
    );
    let e_psi = Vector3::new(-psi.sin(), psi.cos(), 0.0);
    let e_theta = e_r.cross(&e_psi);
    e_r * (g.cos() * c.cos()) + e_psi * (g.cos() * c.sin()) + e_theta * g.sin()
}

/// `(r, θ, ψ)` of a relative position.
fn spherical(rel: &Vector3<f64>) -> (f64, f64, f64) {
    let r = rel.norm();
    (r, (rel.z / r).asin(), rel.y.atan2(rel.x))
}

#[test]
fn los_rates_match_finite_differences() {
    let (theta, psi) = (0.0, std::f64::consts::FRAC_PI_4);
    let pos_p = Vector3::zeros();
    let pos_t = Vector3::new(psi.cos(), psi.sin(), 0.0) * 18.0;
    let v_p = heading(theta, psi, deg(10.0), deg(10.0)) * 5.0;
    let v_t = heading(theta, psi, deg(10.0), deg(10.0)) * 2.0;
    let state = to_relative(&InertialState {
        t: 0.0,
        pos_p,
        vel_p: v_p,
        pos_t,
        vel_t: v_t,
    })
    .unwrap();
    let (dr, dtheta, dpsi) = los_rates(&state).unwrap();

    let h = 1e-5;
    let at = |t: f64| spherical(&(pos_t + v_t * t - pos_p - v_p * t));
    let (a, b) = (at(h), at(-h));
    assert!((dr - (a.0 - b.0) / (2.0 * h)).abs() < 1e-8);
    assert!((dtheta - (a.1 - b.1) / (2.0 * h)).abs() < 1e-8);
    assert!((dpsi - (a.2 - b.2) / (2.0 * h)).abs() < 1e-8);

    // Both vehicles share a heading, so only the speed difference closes.
    assert!((dr - -3.0 * deg(10.0).cos().powi(2)).abs() < 1e-12);
}

fn st_inertial() -> InertialState {
    let cfg = ScenarioConfig::st();
    let pos_p = cfg.pursuer_position();
    let pos_t = cfg.target_position();
    let (_, theta, psi) = spherical(&(pos_t - pos_p));
    InertialState {
        t: 0.0,
        pos_p,
        vel_p: heading(theta, psi, cfg.pursuer.gamma, cfg.pursuer.chi) * cfg.pursuer.speed,
        pos_t,
        vel_t: Vector3::zeros(),
    }
}

#[test]
fn st_initial_geometry() {
    let s = to_relative(&st_inertial()).unwrap();
    assert!((s.r - 288f64.sqrt()).abs() < 1e-12);
    assert_eq!(s.theta, 0.0);
    assert!((s.psi - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    assert!((s.pursuer.gamma - deg(10.0)).abs() < 1e-12);
    assert!((s.pursuer.chi - deg(10.0)).abs() < 1e-12);
}

/// The continuous-time law evaluated term by term from world-frame vectors.
fn u_oracle(w: &InertialState, p: &GuidanceParams) -> f64 {
    let rel = w.pos_t - w.pos_p;
    let v_rel = w.vel_t - w.vel_p;
    let r = rel.norm();
    let dr = rel.dot(&v_rel) / r;
    // r θ̇² + r cos²θ ψ̇² is the transverse part of |v_rel|² over r.
    let centripetal = -(v_rel.norm_squared() - dr * dr) / r;

    let speed = w.vel_p.norm();
    let lead_cos = w.vel_p.dot(&rel) / (speed * r);
    let radial = -p.k_v * (speed - p.desired_speed) * lead_cos;

    let eps = r - p.desired_range;
    let k2 = if eps > 0.0 {
        p.outer_bound.powi(2)
    } else {
        p.inner_bound.powi(2)
    };
    let alpha = -(k2 - eps * eps) * p.k_1 * eps.powi(3);
    let alpha_dot = -p.k_1 * (3.0 * k2 * eps * eps - 5.0 * eps.powi(4)) * dr;
    let z = dr - alpha;
    let sgn = (z / p.boundary_layer).clamp(-1.0, 1.0);
    let barrier = eps / (k2 - eps * eps);
    centripetal + radial + alpha_dot - p.k_2 * sgn - barrier
}

fn explicit_law(mut p: GuidanceParams) -> GuidanceParams {
    p.sampling = Sampling::Explicit;
    p
}

#[test]
fn st_initial_command_term_by_term() {
    let w = st_inertial();
    let state = to_relative(&w).unwrap();
    let p = explicit_law(ScenarioConfig::st().guidance);
    let (dr, dtheta, dpsi) = los_rates(&state).unwrap();
    let derivs = StateDerivative {
        dr,
        dtheta,
        dpsi,
        ..Default::default()
    };
    let ec = effective_control(&state, &derivs, &p).unwrap();
    let oracle = u_oracle(&w, &p);
    assert!(
        (ec.u - oracle).abs() < 1e-9 * oracle.abs(),
        "{} vs {oracle}",
        ec.u
    );
}

#[test]
fn composed_command_matches_oracles() {
    let w = st_inertial();
    let state = to_relative(&w).unwrap();
    let mut p = explicit_law(ScenarioConfig::st().guidance);
    let u = u_oracle(&w, &p);
    let (g, c) = (state.pursuer.gamma, state.pursuer.chi);
    let (pg, sc) = (g.sin() * c.cos(), c.sin());
    let d = pg * pg * p.w_1.powi(2) + sc * sc * p.w_2.powi(2);
    let free = (pg * p.w_1.powi(2) * u / d, sc * p.w_2.powi(2) * u / d);

    p.a_sat = f64::INFINITY;
    let cmd = guidance_step(&state, &p).unwrap();
    assert!(cmd.a_r.abs() < 1e-12);
    assert!((cmd.a_gamma - free.0).abs() < 1e-9 * free.0.abs());
    assert!((cmd.a_chi - free.1).abs() < 1e-9 * free.1.abs());
    assert!(!cmd.diag.saturated);
    assert!((cmd.diag.sigma.to_degrees() - 14.1).abs() < 0.05);

    // The bundled limit clips both channels at the first sample.
    p.a_sat = 40.0;
    let cmd = guidance_step(&state, &p).unwrap();
    assert_eq!(
        (cmd.a_gamma, cmd.a_chi),
        (free.0.clamp(-40.0, 40.0), free.1.clamp(-40.0, 40.0))
    );
    assert!(cmd.diag.saturated);
}

#[test]
fn equilibrium_command_is_centripetal() {
    // On the desired sphere, moving across the LOS at V_d.
    let p = explicit_law(GuidanceParams::with_targets(8.0, 5.0));
    let w = InertialState {
        t: 0.0,
        pos_p: Vector3::zeros(),
        vel_p: Vector3::new(0.0, 5.0, 0.0),
        pos_t: Vector3::new(8.0, 0.0, 0.0),
        vel_t: Vector3::zeros(),
    };
    let state = to_relative(&w).unwrap();
    let cmd = guidance_step(&state, &p).unwrap();
    assert!((cmd.diag.u - -25.0 / 8.0).abs() < 1e-12);
}

#[test]
fn target_term_is_the_los_projection() {
    let frame = LosFrame::from_angles(0.3, -1.1);
    let v_t = Vector3::new(1.0, -2.0, 0.5);
    let a_t = Vector3::new(0.3, 0.7, -1.2);
    let rel = frame.e_r * 9.0;
    let state = to_relative(&InertialState {
        t: 0.0,
        pos_p: Vector3::zeros(),
        vel_p: Vector3::new(4.0, 1.0, 0.0),
        pos_t: rel,
        vel_t: v_t,
    })
    .unwrap();
    let u_t = body_components(&a_t, &v_t, &frame);
    let delta = target_range_term(&u_t, &state);
    assert!((delta - a_t.dot(&frame.e_r)).abs() < 1e-12);
}

#[test]
fn range_acceleration_matches_finite_difference() {
    // Target with constant world acceleration, pursuer in straight flight:
    // r̈ = transverse term + Δ.
    let p0 = Vector3::new(1.0, 2.0, 3.0);
    let v_p = Vector3::new(3.0, 1.0, -0.5);
    let t0 = Vector3::new(9.0, 6.0, 5.0);
    let v_t0 = Vector3::new(-1.0, 2.0, 0.3);
    let a_t = Vector3::new(0.4, -0.9, 0.25);
    let rel = |t: f64| t0 + v_t0 * t + a_t * (0.5 * t * t) - p0 - v_p * t;
    let h = 1e-4;
    let r = |t: f64| rel(t).norm();
    let fd = (r(h) - 2.0 * r(0.0) + r(-h)) / (h * h);

    let state = to_relative(&InertialState {
        t: 0.0,
        pos_p: p0,
        vel_p: v_p,
        pos_t: t0,
        vel_t: v_t0,
    })
    .unwrap();
    let (frame, ..) = LosFrame::from_relative_position(&rel(0.0)).unwrap();
    let delta = target_range_term(&body_components(&a_t, &v_t0, &frame), &state);
    let v_rel = v_t0 - v_p;
    let dr = v_rel.dot(&frame.e_r);
    let transverse = (v_rel.norm_squared() - dr * dr) / state.r;
    assert!(
        (fd - (transverse + delta)).abs() < 1e-5,
        "{fd} vs {}",
        transverse + delta
    );
}
