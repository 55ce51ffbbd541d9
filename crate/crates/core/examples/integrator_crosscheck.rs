//! Relative-coordinate and world-frame propagation under the same commands.

use target_enclosing::verify::{integrator_discrepancy, st_initial_state};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s0 = st_initial_state()?;
    let mut prev: Option<f64> = None;
    for dt in [0.04, 0.02, 0.01, 0.005] {
        let d = integrator_discrepancy(&s0, 10.0, dt)?;
        match prev {
            Some(p) => println!("dt {dt:<6} max diff {d:.3e}  ratio {:.1}", p / d),
            None => println!("dt {dt:<6} max diff {d:.3e}"),
        }
        prev = Some(d);
    }
    Ok(())
}
