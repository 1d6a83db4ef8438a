//! Entanglement of every melbourne qubit with the rest at θ = π/2, ideal and
//! with the calibrated noise model.
//!
//! cargo run --release --example per_qubit_scan [shots]

use catent::experiment::{run_per_qubit, ExperimentConfig, NoiseSource};
use catent::noise::MELBOURNE_CALIBRATION_NAME;

fn main() -> catent::Result<()> {
    let shots = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let ideal = run_per_qubit(&ExperimentConfig { exact: true, ..Default::default() })?;
    let noisy = run_per_qubit(&ExperimentConfig {
        shots,
        seed: 1,
        noise: NoiseSource::Calibration(MELBOURNE_CALIBRATION_NAME.into()),
        ..Default::default()
    })?;
    println!("qubit  ideal   noisy ({shots} shots/axis)");
    for (a, b) in ideal.rows.iter().zip(&noisy.rows) {
        let se = 0.5 * (b.stderr_x.powi(2) + b.stderr_y.powi(2) + b.stderr_z.powi(2)).sqrt();
        println!("q{:<5} {:.4}  {:.4} ± {:.4}", a.qubit.unwrap(), a.e_measured, b.e_measured, se);
    }
    Ok(())
}
