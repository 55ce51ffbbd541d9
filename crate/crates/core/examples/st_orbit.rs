//! Stationary target: run the bundled scenario and write its trace.
//!
//! `cargo run --example st_orbit -- [out.csv]`

use target_enclosing::io::write_trace;
use target_enclosing::sim::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "st.csv".into());
    let cfg = ScenarioConfig::st();
    let run = run_scenario(&cfg)?;

    for rec in run.trace.records.iter().step_by(200) {
        let d = &rec.command.diag;
        println!(
            "t {:5.1}  r {:7.3}  eps {:+8.4}  V {:5.3}  a_gamma {:+7.3}  a_chi {:+7.3}",
            rec.t,
            rec.state.r,
            d.epsilon,
            rec.state.pursuer.speed,
            rec.command.a_gamma,
            rec.command.a_chi
        );
    }
    let m = &run.metrics;
    println!(
        "settled {:?} s, final 20% max |eps| {:.4} m, range in [{:.3}, {:.3}] m",
        m.settling_time, m.tail_max_abs_epsilon, m.min_range, m.max_range
    );
    write_trace(&run.trace, &out)?;
    println!("trace -> {out}");
    Ok(())
}
