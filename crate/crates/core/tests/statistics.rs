//! Sampling and noise-channel statistics against closed-form values.

use std::f64::consts::FRAC_PI_2;

use catent::noise::{
    apply_amplitude_damping, apply_depolarizing, damping_probability, run_trajectory, QubitCalibration,
};
use catent::protocol::{cat_fidelity, estimate_pauli_mean, fidelity_noisy, measure_qubit_entanglement};
use catent::{
    build_cat_chain, cat_state, u3_matrix, Axis, CalibrationTable, CatParams, Circuit, Estimator,
    GateOp, NoiseConfig, NoiseModel, SeedStream, StateVector,
};

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
}

#[test]
fn shot_noise_scales_as_inverse_root_shots() {
    let circuit = build_cat_chain(5, CatParams::new(FRAC_PI_2)).unwrap();
    for shots in [256u32, 1024] {
        for axis in Axis::ALL {
            let means: Vec<f64> = (0..100)
                .map(|s| {
                    estimate_pauli_mean(&circuit, 2, axis, Estimator::Shots(shots), None, SeedStream::new(s))
                        .unwrap()
                        .mean
                })
                .collect();
            let (_, std) = mean_std(&means);
            let ratio = std * (shots as f64).sqrt();
            assert!((1.0 / 1.3..=1.3).contains(&ratio), "shots={shots} {axis}: ratio {ratio}");
        }
    }
}

#[test]
fn reported_stderr_near_one_over_32() {
    let circuit = build_cat_chain(5, CatParams::new(FRAC_PI_2)).unwrap();
    let r = measure_qubit_entanglement(&circuit, 2, Estimator::Shots(1024), None, SeedStream::new(1)).unwrap();
    for s in [r.bloch.stderr_x, r.bloch.stderr_y, r.bloch.stderr_z] {
        assert!((s * 32.0 - 1.0).abs() < 0.2, "{s}");
    }
}

#[test]
fn theta_zero_gives_zero_even_with_shots() {
    let circuit = build_cat_chain(6, CatParams::new(0.0)).unwrap();
    for seed in 0..20 {
        let r = measure_qubit_entanglement(&circuit, 3, Estimator::Shots(64), None, SeedStream::new(seed)).unwrap();
        assert_eq!(r.e_measured, 0.0);
    }
}

#[test]
fn repeated_damping_decays_geometrically() {
    // P(|1⟩ survives k steps) = (1 − γ)^k
    let gamma = 0.1;
    let trials = 20_000;
    for k in [1usize, 3, 6] {
        let survived = (0..trials)
            .filter(|&t| {
                let mut rng = SeedStream::new(k as u64).child(t).rng();
                let mut s = StateVector::basis(1, 1).unwrap();
                for _ in 0..k {
                    apply_amplitude_damping(&mut s, 0, gamma, &mut rng).unwrap();
                }
                s.qubit_probabilities(0).unwrap().1 > 0.5
            })
            .count();
        let p = survived as f64 / trials as f64;
        let want = (1.0 - gamma).powi(k as i32);
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((p - want).abs() < 4.0 * sigma, "k={k}: {p} vs {want}");
    }
}

#[test]
fn depolarizing_shrinks_the_bloch_vector() {
    // X, Y or Z with total probability p: the averaged Bloch vector shrinks
    // by 1 − 4p/3.
    let p = 0.3;
    let trajectories = 40_000;
    let prepare = || {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single(0, &u3_matrix(1.1, 0.4, 0.0).unwrap()).unwrap();
        s
    };
    let before = prepare().reduced_bloch_vector(0).unwrap();
    let mut acc = [0.0; 3];
    for t in 0..trajectories {
        let mut s = prepare();
        apply_depolarizing(&mut s, 0, p, &mut SeedStream::new(7).child(t).rng()).unwrap();
        let b = s.reduced_bloch_vector(0).unwrap();
        acc[0] += b.sx;
        acc[1] += b.sy;
        acc[2] += b.sz;
    }
    let shrink = 1.0 - 4.0 * p / 3.0;
    for (got, orig) in acc.iter().zip([before.sx, before.sy, before.sz]) {
        let got = got / trajectories as f64;
        assert!((got - shrink * orig).abs() < 0.01, "{got} vs {}", shrink * orig);
    }
}

fn one_qubit_model(t1: f64, gate_error: f64, readout_error: f64, config: NoiseConfig) -> NoiseModel {
    let cal = QubitCalibration { t1, t2: 2.0 * t1, gate_error, readout_error };
    NoiseModel::new(CalibrationTable::uniform(1, cal, &[], 0.0), config)
}

#[test]
fn damped_excited_state_fidelity() {
    // |1⟩ through one damping step γ: F = 1 − γ
    let mut circuit = Circuit::new(1);
    circuit.push(GateOp::U3 { qubit: 0, theta: std::f64::consts::PI, phi: 0.0, lambda: 0.0 }).unwrap();
    let config = NoiseConfig { include_depolarizing: false, single_gate_duration: 20_000.0, ..Default::default() };
    let model = one_qubit_model(40.0, 0.0, 0.0, config);
    let gamma = damping_probability(40.0, 20_000.0).unwrap();
    let reference = StateVector::basis(1, 1).unwrap();
    let f = fidelity_noisy(&reference, &circuit, &model, 20_000, SeedStream::new(3)).unwrap();
    assert!((f.mean - (1.0 - gamma)).abs() < 4.0 * f.stderr.max(1e-3), "{} vs {}", f.mean, 1.0 - gamma);
}

#[test]
fn zero_error_rates_reproduce_noiseless_results() {
    let quiet = QubitCalibration { t1: f64::INFINITY, t2: f64::INFINITY, gate_error: 0.0, readout_error: 0.0 };
    let edges: Vec<(usize, usize)> = (0..4).map(|i| (i, i + 1)).collect();
    let model = NoiseModel::new(CalibrationTable::uniform(5, quiet, &edges, 0.0), NoiseConfig::default());
    let circuit = build_cat_chain(5, CatParams::new(1.0)).unwrap();
    let f = cat_fidelity(&circuit, Some(&model), 50, SeedStream::new(0)).unwrap();
    assert!((f.mean - 1.0).abs() < 1e-12);

    let exact = circuit.run().unwrap();
    let mut rng = SeedStream::new(1).rng();
    let traj = run_trajectory(&circuit, &model, &mut rng).unwrap();
    assert!((catent::protocol::fidelity_exact(&exact, &traj).unwrap() - 1.0).abs() < 1e-12);

    let noisy = measure_qubit_entanglement(&circuit, 4, Estimator::Shots(2000), Some(&model), SeedStream::new(5)).unwrap();
    let ideal = cat_state(5, CatParams::new(1.0)).unwrap().reduced_bloch_vector(4).unwrap();
    assert!((noisy.bloch.sz - ideal.sz).abs() < 4.0 * noisy.bloch.stderr_z.max(0.01));
}

#[test]
fn readout_flip_biases_z_mean() {
    // |0⟩ read with flip probability ε: ⟨σz⟩ = 1 − 2ε
    let eps = 0.1;
    let mut circuit = Circuit::new(1);
    circuit.push(GateOp::Rotation { axis: Axis::Z, qubit: 0, angle: 0.3 }).unwrap();
    let config = NoiseConfig { include_thermal: false, include_depolarizing: false, ..Default::default() };
    let model = one_qubit_model(50.0, 0.0, eps, config);
    let m = estimate_pauli_mean(&circuit, 0, Axis::Z, Estimator::Shots(20_000), Some(&model), SeedStream::new(2)).unwrap();
    assert!((m.mean - (1.0 - 2.0 * eps)).abs() < 4.0 * m.stderr, "{}", m.mean);
}

#[test]
fn sampled_sweep_within_four_sigma() {
    let circuit_e = |theta: f64, seed: u64| {
        let c = build_cat_chain(5, CatParams::new(theta)).unwrap();
        measure_qubit_entanglement(&c, 1, Estimator::Shots(1024), None, SeedStream::new(seed)).unwrap()
    };
    let mut outside = 0;
    for k in 0..=40 {
        let theta = k as f64 * std::f64::consts::PI / 20.0;
        let r = circuit_e(theta, k);
        if (r.e_measured - r.e_theory.unwrap()).abs() > 4.0 * r.bloch.entanglement_stderr() {
            outside += 1;
        }
    }
    assert!(outside <= 2, "{outside} points outside 4σ");
}
