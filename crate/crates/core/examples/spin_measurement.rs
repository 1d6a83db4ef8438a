//! ⟨σx⟩, ⟨σy⟩, ⟨σz⟩ of one qubit from z-basis shots after a basis rotation,
//! and the entanglement E = (1 − |⟨σ⟩|)/2 they give.
//!
//! cargo run --example spin_measurement

use std::f64::consts::FRAC_PI_2;

use catent::protocol::{estimate_pauli_mean, measure_qubit_entanglement, measurement_circuit, pre_rotation};
use catent::{build_cat_chain, Axis, CatParams, Estimator, SeedStream};

fn main() -> catent::Result<()> {
    let circuit = build_cat_chain(5, CatParams::new(FRAC_PI_2 / 2.0))?;
    for axis in Axis::ALL {
        let rot = pre_rotation(axis).map(|(a, t)| format!("r{a}({t:+.4})")).unwrap_or("none".into());
        let exact = estimate_pauli_mean(&circuit, 2, axis, Estimator::Exact, None, SeedStream::new(0))?;
        let shots = estimate_pauli_mean(&circuit, 2, axis, Estimator::Shots(1024), None, SeedStream::new(1).child(axis.index() as u64))?;
        println!(
            "σ{axis}: rotation {rot:<12} exact {:+.5}  1024 shots {:+.5} ± {:.5}",
            exact.mean, shots.mean, shots.stderr
        );
    }
    print!("measurement circuit for σx:\n{}", measurement_circuit(&circuit, 2, Axis::X)?.to_text());

    let seed = SeedStream::new(2024);
    for estimator in [Estimator::Exact, Estimator::Shots(1024), Estimator::Shots(16_384)] {
        let r = measure_qubit_entanglement(&circuit, 2, estimator, None, seed)?;
        println!(
            "{estimator:?}: E = {:.5} ± {:.5} (theory {:.5}, clamped {})",
            r.e_measured,
            r.bloch.entanglement_stderr(),
            r.e_theory.unwrap(),
            r.clamped
        );
    }
    Ok(())
}
