//! ST with a 1 m/s² sinusoidal disturbance on every acceleration channel,
//! compared with the steady-state bound `(Δ/(max(a², b²) K_1 K_2))^{1/3}`.

use target_enclosing::sim::{run_scenario, Plant, ScenarioConfig};
use target_enclosing::verify::steady_state_bound;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::st();
    cfg.plant = Plant::Uncertain;
    let run = run_scenario(&cfg)?;
    let m = &run.metrics;
    let bound = steady_state_bound(cfg.disturbance.bound(), &cfg.guidance);
    println!(
        "completed: {}, barrier violations: {}",
        m.completed, m.barrier_violations
    );
    println!(
        "final 20% mean |eps| {:.4} m, max {:.4} m",
        m.tail_mean_abs_epsilon, m.tail_max_abs_epsilon
    );
    println!(
        "bound for |Delta| <= {}: {:.4} m",
        cfg.disturbance.bound(),
        bound
    );
    Ok(())
}
