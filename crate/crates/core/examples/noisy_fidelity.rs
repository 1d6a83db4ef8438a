//! Fidelity of |1…1⟩ prepared on 5, 10 and 15 melbourne qubits under the
//! calibrated noise model, from Monte-Carlo trajectories.
//!
//! cargo run --release --example noisy_fidelity

use std::f64::consts::PI;

use catent::experiment::{prepare, ExperimentConfig, NoiseSource};
use catent::noise::MELBOURNE_CALIBRATION_NAME;
use catent::protocol::cat_fidelity;
use catent::{CatParams, SeedStream};

fn main() -> catent::Result<()> {
    for n in [5, 10, 15] {
        let cfg = ExperimentConfig {
            num_qubits: n,
            noise: NoiseSource::Calibration(MELBOURNE_CALIBRATION_NAME.into()),
            ..Default::default()
        };
        let p = prepare(&cfg)?;
        let circuit = p.layout.build.build(n, CatParams::new(PI))?;
        let f = cat_fidelity(&circuit, p.noise.as_ref(), 500, SeedStream::new(7))?;
        println!("N={n:<2} qubits {:?}\n      F = {:.4} ± {:.4}", p.layout.physical, f.mean, f.stderr);
    }
    Ok(())
}
