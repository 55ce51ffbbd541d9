//! Barrier Monte Carlo: initial range errors spread over the safe interval.
//!
//! `cargo run --release --example monte_carlo -- [st|cvt|mt] [runs]`

use target_enclosing::sim::{monte_carlo, BatchSummary, Perturbation, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "st".into());
    let runs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let template = ScenarioConfig::named(&name).ok_or("unknown scenario")?;
    let g = template.guidance;

    let results = monte_carlo(&template, runs, &Perturbation::barrier(&template))?;
    let summary = BatchSummary::from_runs(&results, g.desired_range);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    for r in results.iter().filter(|r| r.metrics.barrier_violations > 0) {
        println!(
            "run {:3}: eps(0) {:+.3} m, min r {:.3} m, {}",
            r.index,
            r.epsilon0,
            r.metrics.min_range,
            r.abort.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
