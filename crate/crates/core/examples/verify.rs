//! Runs the verification suites; pass suite names to select some.

use target_enclosing::verify::{run_suites, Suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let suites: Vec<Suite> = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| Suite::from_name(n).ok_or(format!("unknown suite {n}")))
            .collect::<Result<_, _>>()?
    };
    for r in run_suites(&suites)? {
        println!("{r}");
    }
    Ok(())
}
