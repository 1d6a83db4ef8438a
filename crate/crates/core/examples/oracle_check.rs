//! Run the built-in cross-checks against the dense-matrix oracles.
//!
//! cargo run --release --example oracle_check [seed]

use catent::experiment::{run_oracle_check, ExperimentConfig};

fn main() -> catent::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let report = run_oracle_check(&ExperimentConfig { seed, ..Default::default() })?;
    print!("{}", report.to_text());
    if !report.passed {
        std::process::exit(3);
    }
    Ok(())
}
