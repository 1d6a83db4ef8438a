//! E(θ) over 0..2π in steps of π/20 on a 5-qubit chain, sampled with
//! 1024 shots per axis, written as CSV.
//!
//! cargo run --release --example theta_sweep > sweep.csv

use catent::experiment::{run_sweep, ExperimentConfig, Topology};

fn main() -> catent::Result<()> {
    let cfg = ExperimentConfig {
        num_qubits: 5,
        topology: Topology::Chain,
        measure_qubit: Some(2),
        fidelity: true,
        seed: 42,
        ..Default::default()
    };
    let result = run_sweep(&cfg)?;
    let worst = result
        .rows
        .iter()
        .map(|r| (r.e_measured - r.e_theory.unwrap()).abs())
        .fold(0.0, f64::max);
    eprintln!("{} points, max |E - theory| = {worst:.4}", result.rows.len());
    print!("{}", result.to_csv()?);
    Ok(())
}
