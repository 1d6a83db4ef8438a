//! Prepare cos(θ/2)|0…0⟩ + e^{iφ} sin(θ/2)|1…1⟩ with a U3 and a CNOT chain,
//! then compare against the closed-form state.
//!
//! cargo run --example cat_state

use std::f64::consts::PI;

use catent::protocol::{cat_entanglement_theory, fidelity_exact, geometric_entanglement};
use catent::{build_cat_chain, cat_state, CatParams};

fn main() -> catent::Result<()> {
    let params = CatParams::with_phase(PI / 3.0, PI / 4.0, 0.0);
    let circuit = build_cat_chain(5, params)?;
    print!("{}", circuit.to_text());

    let state = circuit.run()?;
    for (i, a) in state.amplitudes().iter().enumerate().filter(|(_, a)| a.norm() > 1e-12) {
        println!("|{i:05b}⟩  {:+.6} {:+.6}i", a.re, a.im);
    }

    let reference = cat_state(5, params)?;
    println!("fidelity vs reference: {:.15}", fidelity_exact(&reference, &state)?);

    for q in 0..5 {
        let b = state.reduced_bloch_vector(q)?;
        println!(
            "q{q}: bloch=({:+.4}, {:+.4}, {:+.4})  E={:.6}  theory={:.6}",
            b.sx,
            b.sy,
            b.sz,
            geometric_entanglement(b)?,
            cat_entanglement_theory(params.theta)
        );
    }
    Ok(())
}
