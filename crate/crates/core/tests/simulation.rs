use std::f64::consts::FRAC_PI_2;

use target_enclosing::kinematics::{step_relative, wrap_pi, AccelCommand, EngagementState};
use target_enclosing::sim::{
    inject_disturbance, monte_carlo, run_scenario, Disturbance, Perturbation, ScenarioConfig,
};
use target_enclosing::verify::{integrator_discrepancy, smooth_command, st_initial_state};

fn distance(a: &EngagementState, b: &EngagementState) -> f64 {
    [
        a.r - b.r,
        a.theta - b.theta,
        wrap_pi(a.psi - b.psi),
        a.pursuer.speed - b.pursuer.speed,
        a.pursuer.gamma - b.pursuer.gamma,
        wrap_pi(a.pursuer.chi - b.pursuer.chi),
    ]
    .iter()
    .fold(0.0, |m: f64, x| m.max(x.abs()))
}

#[test]
fn rk4_step_halving_ratio() {
    let s0 = st_initial_state().unwrap();
    let u = smooth_command(0.3);
    let run = |dt: f64| {
        let mut s = s0;
        for _ in 0..(0.4 / dt).round() as usize {
            s = step_relative(&s, &u, &AccelCommand::ZERO, dt).unwrap();
        }
        s
    };
    let reference = run(0.4 / 1024.0);
    let coarse = distance(&run(0.05), &reference);
    let fine = distance(&run(0.025), &reference);
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn integrators_agree_and_converge() {
    let s0 = st_initial_state().unwrap();
    let fine = integrator_discrepancy(&s0, 10.0, 0.005).unwrap();
    let coarse = integrator_discrepancy(&s0, 10.0, 0.01).unwrap();
    assert!(fine <= 1e-3);
    assert!(fine < coarse);
}

#[test]
fn bundled_run_is_deterministic_and_safe() {
    let cfg = ScenarioConfig::st();
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.trace.len(), 2001);
    assert!(a.termination.is_completed());
    assert!(a
        .trace
        .records
        .iter()
        .all(|r| r.flags.in_barrier && r.flags.in_safe_shell));
    assert!((a.trace.records[0].command.diag.epsilon - (288f64.sqrt() - 8.0)).abs() < 1e-12);
}

#[test]
fn zero_duration_run_has_one_record() {
    let mut cfg = ScenarioConfig::cvt();
    cfg.duration = 0.0;
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.trace.len(), 1);
    assert!(out.termination.is_completed());
    assert_eq!(out.trace.records[0].t, 0.0);
}

#[test]
fn speed_follows_closed_form() {
    let mut cfg = ScenarioConfig::st();
    cfg.pursuer.speed = 3.0;
    cfg.duration = 10.0;
    let out = run_scenario(&cfg).unwrap();
    for r in &out.trace.records {
        let v = 5.0 - 2.0 * (-r.t).exp();
        assert!((r.state.pursuer.speed - v).abs() < 1e-6, "t = {}", r.t);
    }
}

#[test]
fn disturbance_peak() {
    let d = Disturbance::default();
    let u = inject_disturbance(&AccelCommand::ZERO, FRAC_PI_2, &d);
    assert_eq!(u.as_array(), [1.0, 1.0, 1.0]);
    let yaw_only = Disturbance {
        channels: [false, false, true],
        ..d
    };
    let u = inject_disturbance(&AccelCommand::new(2.0, 0.0, 0.0), FRAC_PI_2, &yaw_only);
    assert_eq!(u.as_array(), [2.0, 0.0, 1.0]);
}

#[test]
fn single_unperturbed_sample_equals_direct_run() {
    let cfg = ScenarioConfig::mt();
    let runs = monte_carlo(&cfg, 1, &Perturbation::none()).unwrap();
    let direct = run_scenario(&cfg).unwrap();
    assert_eq!(runs[0].metrics, direct.metrics);
}

#[test]
fn bundled_values() {
    let deg10 = 10f64.to_radians();
    for (cfg, r_d, v_d) in [
        (ScenarioConfig::st(), 8.0, 5.0),
        (ScenarioConfig::cvt(), 8.0, 5.0),
        (ScenarioConfig::mt(), 12.0, 8.0),
    ] {
        let g = cfg.guidance;
        assert_eq!(cfg.pursuer.position, [0.0, 0.0, 15.0]);
        assert_eq!(cfg.target.position, [12.0, 12.0, 15.0]);
        assert_eq!(
            [
                cfg.pursuer.gamma,
                cfg.pursuer.chi,
                cfg.target.gamma,
                cfg.target.chi
            ],
            [deg10; 4]
        );
        assert_eq!(
            (g.inner_bound, g.outer_bound, g.k_1, g.k_2, g.w_1, g.w_2),
            (5.0, 15.0, 0.008, 30.0, 0.5, 0.5)
        );
        assert_eq!((g.desired_range, g.desired_speed), (r_d, v_d));
        assert_eq!(cfg.dt_guidance, 0.05);
        cfg.validate().unwrap();
    }
}

#[test]
fn barrier_hypothesis_is_checked() {
    let mut cfg = ScenarioConfig::st();
    cfg.pursuer.position = [12.0, 12.0, 40.0];
    let err = run_scenario(&cfg).unwrap_err().to_string();
    assert!(err.contains("barrier hypothesis"), "{err}");
}
