//! Reading, restricting and writing device calibration tables, and the
//! per-gate error probabilities derived from them.
//!
//! cargo run --example calibration_file

use catent::noise::{damping_probability, dephasing_probability};
use catent::{CalibrationTable, NoiseConfig};

const SCALED: &str = "\
qubits 3
# error rates in units of 1e-3 (gates) and 1e-2 (readout, cx)
units scaled
q0 t1=69.0 t2=22.8 gate_err=0.61 readout_err=3.05
q1 t1=63.2 t2=73.6 gate_err=1.36 readout_err=2.65
q2 t1=48.6 t2=57.5 gate_err=2.94 readout_err=2.45
cx 0 1 err=1.87
cx 1 2 err=2.06
";

fn main() -> catent::Result<()> {
    let small = CalibrationTable::parse(SCALED)?;
    print!("{}", small.to_text());

    let cfg = NoiseConfig::default();
    for (q, c) in small.qubits.iter().enumerate() {
        println!(
            "q{q}: γ(1q)={:.5} λ(1q)={:.5} γ(cx)={:.5}",
            damping_probability(c.t1, cfg.single_gate_duration)?,
            dephasing_probability(c.t1, c.t2, cfg.single_gate_duration)?,
            damping_probability(c.t1, cfg.cx_gate_duration)?,
        );
    }

    let melbourne = CalibrationTable::melbourne();
    let sub = melbourne.restrict(&[5, 6, 8])?;
    println!("melbourne restricted to q5, q6, q8:");
    print!("{}", sub.to_text());
    assert_eq!(CalibrationTable::parse(&sub.to_text())?, sub);
    Ok(())
}
