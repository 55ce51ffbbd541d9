//! The three bundled targets side by side.

use target_enclosing::sim::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:<4} {:>9} {:>12} {:>12} {:>10} {:>10}",
        "", "r_d", "final eps", "tail max", "min r", "max |D|"
    );
    for cfg in [
        ScenarioConfig::st(),
        ScenarioConfig::cvt(),
        ScenarioConfig::mt(),
    ] {
        let m = run_scenario(&cfg)?.metrics;
        println!(
            "{:<4} {:>9.1} {:>12.4} {:>12.4} {:>10.3} {:>10.3}",
            cfg.name,
            cfg.guidance.desired_range,
            m.final_epsilon,
            m.tail_max_abs_epsilon,
            m.min_range,
            m.max_abs_delta
        );
    }
    Ok(())
}
