//! Target flying a tabulated velocity profile read from CSV.
//!
//! `cargo run --example custom_profile -- [config.toml]`

use target_enclosing::io::load_config;
use target_enclosing::sim::run_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/custom.toml").into()
    });
    let cfg = load_config(&path, &[])?;
    let run = run_scenario(&cfg)?;
    for rec in run.trace.records.iter().step_by(100) {
        let v = rec.inertial.vel_t;
        println!(
            "t {:5.1}  target v ({:+.2}, {:+.2}, {:+.2})  eps {:+.4}",
            rec.t, v.x, v.y, v.z, rec.command.diag.epsilon
        );
    }
    println!(
        "completed: {}, max |Delta| {:.3}",
        run.metrics.completed, run.metrics.max_abs_delta
    );
    Ok(())
}
