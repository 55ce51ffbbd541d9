use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use proptest::prelude::*;
use target_enclosing::guidance::{
    allocate_lateral, alpha_dot, effective_control, implicit_sliding_step, sampled_control,
    smoothed_sign, stabilizing_alpha, Branch, GuidanceParams, Sampling,
};
use target_enclosing::kinematics::{
    los_rates, to_inertial, to_relative, wrap_angles, wrap_pi, EngagementState, LosFrame,
    StateDerivative, VehicleState,
};
use target_enclosing::target::{TargetModel, VelocityProfile};
use target_enclosing::verify::{allocation_cost, grid_min_cost};

fn params() -> GuidanceParams {
    GuidanceParams::with_targets(8.0, 5.0)
}

fn vehicle() -> impl Strategy<Value = VehicleState> {
    (0.5..10.0, -1.4..1.4, -PI..PI).prop_map(|(v, g, c)| VehicleState::new(v, g, c))
}

fn state() -> impl Strategy<Value = EngagementState> {
    (3.5..22.0, -1.2..1.2, -PI..PI, vehicle(), vehicle()).prop_map(|(r, theta, psi, p, t)| {
        EngagementState {
            t: 0.0,
            r,
            theta,
            psi,
            pursuer: p,
            target: t,
        }
    })
}

fn velocities_match(a: &EngagementState, b: &EngagementState) -> f64 {
    let x = to_inertial(a, Vector3::zeros());
    let y = to_inertial(b, Vector3::zeros());
    (x.vel_p - y.vel_p)
        .norm()
        .max((x.vel_t - y.vel_t).norm())
        .max((x.pos_t - y.pos_t).norm())
}

fn derivs(s: &EngagementState) -> StateDerivative {
    let (dr, dtheta, dpsi) = los_rates(s).unwrap();
    StateDerivative {
        dr,
        dtheta,
        dpsi,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn wrap_pi_is_idempotent(x in -100.0..100.0f64) {
        let w = wrap_pi(x);
        prop_assert!(w > -PI && w <= PI);
        prop_assert_eq!(wrap_pi(w), w);
        let turns = (x - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn wrap_angles_is_idempotent_and_physical(
        s in state(),
        dtheta in -6.0..6.0f64,
        dpsi in -20.0..20.0f64,
        dchi in -20.0..20.0f64,
    ) {
        let mut raw = s;
        raw.theta += dtheta;
        raw.psi += dpsi;
        raw.pursuer.chi += dchi;
        let once = wrap_angles(&raw);
        let twice = wrap_angles(&once);
        prop_assert!((once.theta - twice.theta).abs() < 1e-12);
        prop_assert!((once.psi - twice.psi).abs() < 1e-12);
        prop_assert!((once.pursuer.chi - twice.pursuer.chi).abs() < 1e-12);
        prop_assert!(once.theta.abs() <= FRAC_PI_2 && once.psi.abs() <= PI);
        prop_assert!(velocities_match(&raw, &once) < 1e-9);
    }

    #[test]
    fn relative_inertial_round_trip(s in state(), px in -50.0..50.0f64, py in -50.0..50.0f64) {
        let w = to_inertial(&s, Vector3::new(px, py, 10.0));
        let back = to_relative(&w).unwrap();
        prop_assert!((back.r - s.r).abs() < 1e-9);
        prop_assert!((back.theta - s.theta).abs() < 1e-9);
        prop_assert!(wrap_pi(back.psi - s.psi).abs() < 1e-9);
        for (a, b) in [(back.pursuer, s.pursuer), (back.target, s.target)] {
            prop_assert!((a.speed - b.speed).abs() < 1e-9);
            prop_assert!((a.gamma - b.gamma).abs() < 1e-9);
            prop_assert!(wrap_pi(a.chi - b.chi).abs() < 1e-9);
        }
    }

    #[test]
    fn direction_matches_spherical_basis(theta in -1.5..1.5f64, psi in -PI..PI, g in -1.5..1.5f64, c in -PI..PI) {
        // d/dθ and d/dψ of e_r give the elevation and azimuth axes.
        let f = LosFrame::from_angles(theta, psi);
        let h = 1e-6;
        let e_theta = (LosFrame::from_angles(theta + h, psi).e_r - LosFrame::from_angles(theta - h, psi).e_r) / (2.0 * h);
        let e_psi = (LosFrame::from_angles(theta, psi + h).e_r - LosFrame::from_angles(theta, psi - h).e_r) / (2.0 * h * theta.cos());
        prop_assert!((e_theta - f.e_theta).norm() < 1e-8);
        prop_assert!((e_psi - f.e_psi).norm() < 1e-8);
        let d = f.direction(g, c);
        prop_assert!((d.dot(&f.e_theta) - g.sin()).abs() < 1e-12);
        prop_assert!((d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_dot_matches_finite_difference(eps in -4.9..14.9f64, rate in -10.0..10.0f64) {
        let p = params();
        let branch = Branch::of(eps);
        let h = 1e-6;
        let a = |e: f64| stabilizing_alpha(e, branch, &p).unwrap();
        let fd = (a(eps + h * rate) - a(eps - h * rate)) / (2.0 * h);
        let exact = alpha_dot(eps, rate, branch, &p).unwrap();
        prop_assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn allocation_is_feasible_and_optimal(
        gamma in -1.5..1.5f64,
        chi in -PI..PI,
        u in -50.0..50.0f64,
        w_1 in 0.1..2.0f64,
        w_2 in 0.1..2.0f64,
    ) {
        let (pg, s) = (gamma.sin() * chi.cos(), chi.sin());
        let d = pg * pg * w_1 * w_1 + s * s * w_2 * w_2;
        prop_assume!(d >= 1e-4);
        let mut p = params();
        p.a_sat = f64::INFINITY;
        p.w_1 = w_1;
        p.w_2 = w_2;
        let a = allocate_lateral(u, gamma, chi, &p);
        prop_assert!(!a.saturated && !a.singular);
        prop_assert!((pg * a.a_gamma + s * a.a_chi - u).abs() <= 1e-9 * u.abs().max(1.0));
        let cost = allocation_cost(a.a_gamma, a.a_chi, w_1, w_2);
        prop_assert!(cost <= grid_min_cost(u, gamma, chi, w_1, w_2, 2001) + 1e-6);
        // Channel ratio of the weighted least-effort split.
        if s.abs() > 1e-3 && pg.abs() > 1e-3 {
            let ratio = (a.a_gamma / a.a_chi) / ((pg * w_1 * w_1) / (s * w_2 * w_2));
            prop_assert!((ratio - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn saturated_channels_stay_in_limits(gamma in -1.5..1.5f64, chi in -PI..PI, u in -500.0..500.0f64) {
        let p = params();
        let a = allocate_lateral(u, gamma, chi, &p);
        prop_assert!(a.a_gamma.abs() <= p.a_sat && a.a_chi.abs() <= p.a_sat);
    }

    #[test]
    fn implicit_sliding_step_is_consistent(z in -5.0..5.0f64, drift in -20.0..20.0f64) {
        let p = params();
        let explicit = drift - p.k_2 * smoothed_sign(z, p.boundary_layer);
        let rate = |dt: f64| (implicit_sliding_step(z, drift, dt, &p) - z) / dt;
        let (e1, e2) = ((rate(1e-5) - explicit).abs(), (rate(1e-6) - explicit).abs());
        // Near the layer edge the two sides of the kink can disagree at any
        // step; elsewhere the difference vanishes with dt.
        prop_assume!((z.abs() - p.boundary_layer).abs() > 1e-3);
        prop_assert!(e2 <= e1 + 1e-6, "{e1} {e2}");
        prop_assert!(e2 < 1e-2 * (1.0 + explicit.abs()), "{e2}");
    }

    #[test]
    fn sampled_control_tends_to_continuous_law(s in state()) {
        let mut p = params();
        let eps = s.r - p.desired_range;
        prop_assume!(p.contains(eps));
        let d = derivs(&s);
        let cont = effective_control(&s, &d, &p).unwrap().u;
        p.sampling = Sampling::Implicit;
        let gap = |dt: f64| (sampled_control(&s, &d, &p, dt).unwrap().u - cont).abs();
        let ec = effective_control(&s, &d, &p).unwrap();
        prop_assume!((ec.z.abs() - p.boundary_layer).abs() > 1e-2);
        let (g1, g2) = (gap(1e-4), gap(1e-6));
        prop_assert!(g2 <= g1 + 1e-6);
        prop_assert!(g2 < 1e-2 * (1.0 + cont.abs()), "{g2} vs |U| {}", cont.abs());
        prop_assert_eq!(sampled_control(&s, &d, &p, 0.0).unwrap().u, cont);
    }

    #[test]
    fn maneuvering_accel_is_velocity_derivative(t in 0.0..100.0f64) {
        let m = TargetModel::maneuvering();
        let h = 1e-5;
        let fd = (m.velocity(t + h) - m.velocity(t - h)) / (2.0 * h);
        prop_assert!((fd - m.accel(t)).norm() < 1e-8);
    }

    #[test]
    fn profile_accel_is_velocity_derivative(t in 0.5..9.5f64) {
        let rows: Vec<[f64; 4]> = (0..11)
            .map(|i| {
                let t = i as f64;
                [t, (0.3 * t).sin(), t * 0.1, (0.2 * t).cos()]
            })
            .collect();
        let prof = VelocityProfile::new(&rows).unwrap();
        let h = 1e-6;
        let fd = (prof.velocity(t + h) - prof.velocity(t - h)) / (2.0 * h);
        prop_assert!((fd - prof.accel(t)).norm() < 1e-5);
    }
}
