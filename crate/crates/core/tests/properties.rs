use std::f64::consts::{PI, TAU};

use catent::circuit::{cat_state, validate_circuit, Axis};
use catent::oracle;
use catent::protocol::{
    cat_entanglement_theory, exact_pauli_mean, fidelity_exact, geometric_entanglement,
    measure_qubit_entanglement, rotated_z_mean, sweep_theta, theta_grid, BuildMode, SweepSpec,
};
use catent::{
    build_cat_chain, build_cat_on_topology, melbourne_coupling, u3_matrix, CatParams, Circuit,
    CouplingMap, Estimator, GateOp, SeedStream, StateVector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit_from_seed(seed: u64) -> Circuit {
    oracle::random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), 5, 20)
}

fn inverse(op: &GateOp) -> Vec<GateOp> {
    // U3(θ, φ, λ)† = U3(−θ, −λ, −φ)
    match *op {
        GateOp::U3 { qubit, theta, phi, lambda } => {
            vec![GateOp::U3 { qubit, theta: -theta, phi: -lambda, lambda: -phi }]
        }
        GateOp::Rotation { axis, qubit, angle } => vec![GateOp::Rotation { axis, qubit, angle: -angle }],
        cx @ GateOp::Cnot { .. } => vec![cx],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let s = c.run().unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_then_inverse_is_identity(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let mut back = c.clone();
        for op in c.ops().iter().rev() {
            for inv in inverse(op) {
                back.push(inv).unwrap();
            }
        }
        let s = back.run().unwrap();
        prop_assert!((s.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn kernels_match_dense_matrices(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let s = c.run().unwrap();
        for (a, b) in s.amplitudes().iter().zip(oracle::dense_execute(&c)) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn protocol_matches_partial_trace_and_dense_observable(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let s = c.run().unwrap();
        for q in 0..c.num_qubits() {
            let b = s.reduced_bloch_vector(q).unwrap();
            for (axis, v) in Axis::ALL.into_iter().zip([b.sx, b.sy, b.sz]) {
                prop_assert!((exact_pauli_mean(&s, q, axis).unwrap() - v).abs() < 1e-10);
                prop_assert!((oracle::dense_expectation(&s, q, axis) - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_direction_does_not_change_length(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let s = c.run().unwrap();
        for q in 0..c.num_qubits() {
            let sz = rotated_z_mean(&s, q, None).unwrap();
            let len = |sign: f64| {
                let sx = rotated_z_mean(&s, q, Some((Axis::Y, sign * PI / 2.0))).unwrap();
                let sy = rotated_z_mean(&s, q, Some((Axis::X, -sign * PI / 2.0))).unwrap();
                (sx * sx + sy * sy + sz * sz).sqrt()
            };
            prop_assert!((len(1.0) - len(-1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn u3_is_unitary(theta in -10.0..10.0f64, phi in -10.0..10.0f64, lambda in -10.0..10.0f64) {
        prop_assert!(u3_matrix(theta, phi, lambda).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn u3_on_zero_gives_cat_amplitudes(theta in -10.0..10.0f64, phi in -10.0..10.0f64, lambda in -10.0..10.0f64) {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single(0, &u3_matrix(theta, phi, lambda).unwrap()).unwrap();
        let want = [
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        prop_assert!((s.amplitude(0) - want[0]).norm() < 1e-12);
        prop_assert!((s.amplitude(1) - want[1]).norm() < 1e-12);
    }

    #[test]
    fn builders_agree_with_reference(theta in 0.0..TAU, phi in 0.0..TAU, n in 1usize..=10) {
        let p = CatParams::with_phase(theta, phi, 0.0);
        let reference = cat_state(n, p).unwrap();
        let chain = build_cat_chain(n, p).unwrap().run().unwrap();
        prop_assert!((fidelity_exact(&reference, &chain).unwrap() - 1.0).abs() < 1e-12);
        if n == 10 {
            let map = CouplingMap::from_edges(10, &[(0, 3), (3, 1), (1, 2), (3, 4), (4, 9), (9, 8), (8, 7), (7, 6), (6, 5)]).unwrap();
            let topo = build_cat_on_topology(&map, 4, p).unwrap().run().unwrap();
            prop_assert!((fidelity_exact(&reference, &topo).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn topology_builds_always_validate(root in 0usize..15, theta in 0.0..TAU) {
        let map = melbourne_coupling();
        let c = build_cat_on_topology(&map, root, CatParams::new(theta)).unwrap();
        prop_assert!(validate_circuit(&c, &map).unwrap().is_ok());
        prop_assert_eq!(c.cnot_count(), 14);
    }

    #[test]
    fn validation_flags_exactly_the_off_map_cnots(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let map = CouplingMap::line(c.num_qubits());
        let flagged = match validate_circuit(&c, &map).unwrap() {
            Ok(()) => vec![],
            Err(v) => v.into_iter().map(|v| v.op_index).collect(),
        };
        let expected: Vec<usize> = c.ops().iter().enumerate().filter_map(|(i, op)| match *op {
            GateOp::Cnot { control, target } if control.abs_diff(target) != 1 => Some(i),
            _ => None,
        }).collect();
        prop_assert_eq!(flagged, expected);
    }

    #[test]
    fn global_and_relative_phases_leave_e_unchanged(theta in 0.0..TAU, phi in 0.0..TAU, lambda in 0.0..TAU, alpha in 0.0..TAU) {
        let plain = build_cat_chain(4, CatParams::new(theta)).unwrap();
        let phased = build_cat_chain(4, CatParams::with_phase(theta, phi, lambda)).unwrap();
        let seed = SeedStream::new(11);
        let a = measure_qubit_entanglement(&plain, 2, Estimator::Exact, None, seed).unwrap();
        let b = measure_qubit_entanglement(&phased, 2, Estimator::Exact, None, seed).unwrap();
        prop_assert!((a.e_measured - b.e_measured).abs() < 1e-10);

        let s = plain.run().unwrap();
        let rotated = StateVector::from_amplitudes(
            s.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, alpha)).collect(),
        ).unwrap();
        for q in 0..4 {
            for axis in Axis::ALL {
                let d = exact_pauli_mean(&s, q, axis).unwrap() - exact_pauli_mean(&rotated, q, axis).unwrap();
                prop_assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entanglement_and_fidelity_ranges(seed in any::<u64>()) {
        let c = circuit_from_seed(seed);
        let s = c.run().unwrap();
        for q in 0..c.num_qubits() {
            let e = geometric_entanglement(s.reduced_bloch_vector(q).unwrap()).unwrap();
            prop_assert!((0.0..=0.5).contains(&e));
        }
        let other = circuit_from_seed(seed ^ 1);
        if other.num_qubits() == c.num_qubits() {
            let f = fidelity_exact(&s, &other.run().unwrap()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}

#[test]
fn exact_sweeps_match_closed_form() {
    let thetas = theta_grid(0.0, TAU, PI / 20.0).unwrap();
    assert_eq!(thetas.len(), 41);
    for n in [2usize, 5, 10, 15] {
        let spec = SweepSpec {
            num_qubits: n,
            build: if n == 15 {
                BuildMode::Topology { coupling: melbourne_coupling(), root: 6 }
            } else {
                BuildMode::Chain
            },
            measure_qubit: n - 1,
            thetas: thetas.clone(),
            estimator: Estimator::Exact,
            noise: None,
            fidelity: None,
        };
        for (t, r) in thetas.iter().zip(sweep_theta(&spec, SeedStream::new(0)).unwrap()) {
            assert!((r.e_measured - cat_entanglement_theory(*t)).abs() < 1e-12, "n={n} θ={t}");
            assert_eq!(r.e_theory, Some(cat_entanglement_theory(*t)));
        }
    }
}

#[test]
fn generic_circuits_have_no_theory_column() {
    let c = circuit_from_seed(5);
    let r = measure_qubit_entanglement(&c, 0, Estimator::Exact, None, SeedStream::new(0)).unwrap();
    assert_eq!(r.e_theory, None);
}
