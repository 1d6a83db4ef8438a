//! Brute-force reference implementations used by the self-check and the
//! test suites. Nothing here shares code with the statevector kernels:
//! gates become full 2^N × 2^N matrices built from Kronecker products and
//! observables are evaluated as dense quadratic forms.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{axis_rotation_matrix, u3_matrix, Axis, Circuit, GateOp};
use crate::qstate::{Matrix2, StateVector};

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        (0..dim).for_each(|i| data[i * dim + i] = Complex64::new(1.0, 0.0));
        DenseMatrix { dim, data }
    }

    fn from_2x2(m: &Matrix2) -> Self {
        DenseMatrix { dim: 2, data: m.0.to_vec() }
    }

    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * other.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.data[i * self.dim + j];
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        let row = i * other.dim + k;
                        let col = j * other.dim + l;
                        data[row * dim + col] = a * other.data[k * other.dim + l];
                    }
                }
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        DenseMatrix { dim: n, data }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.data[i * self.dim + j] * v[j]).sum())
            .collect()
    }
}

/// `m` acting on `qubit` of an `n`-qubit register. Qubit 0 is the least
/// significant index bit, so it is the rightmost Kronecker factor.
pub fn embed_single(n: usize, qubit: usize, m: &Matrix2) -> DenseMatrix {
    let mut out = DenseMatrix::identity(1);
    for q in (0..n).rev() {
        let factor = if q == qubit { DenseMatrix::from_2x2(m) } else { DenseMatrix::identity(2) };
        out = out.kron(&factor);
    }
    out
}

/// CNOT as |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t.
pub fn embed_cnot(n: usize, control: usize, target: usize) -> DenseMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let p0 = Matrix2::new(one, zero, zero, zero);
    let p1 = Matrix2::new(zero, zero, zero, one);
    let build = |ctl: &Matrix2, tgt: &Matrix2| {
        let mut out = DenseMatrix::identity(1);
        for q in (0..n).rev() {
            let f = if q == control {
                DenseMatrix::from_2x2(ctl)
            } else if q == target {
                DenseMatrix::from_2x2(tgt)
            } else {
                DenseMatrix::identity(2)
            };
            out = out.kron(&f);
        }
        out
    };
    let a = build(&p0, &Matrix2::IDENTITY);
    let b = build(&p1, &Matrix2::PAULI_X);
    DenseMatrix { dim: a.dim, data: a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect() }
}

pub fn op_matrix(n: usize, op: &GateOp) -> DenseMatrix {
    match *op {
        GateOp::U3 { qubit, theta, phi, lambda } => {
            embed_single(n, qubit, &u3_matrix(theta, phi, lambda).expect("finite angles"))
        }
        GateOp::Rotation { axis, qubit, angle } => {
            embed_single(n, qubit, &axis_rotation_matrix(axis, angle).expect("finite angle"))
        }
        GateOp::Cnot { control, target } => embed_cnot(n, control, target),
    }
}

/// Whole-circuit unitary, product of the op matrices in reverse order.
pub fn circuit_unitary(circuit: &Circuit) -> DenseMatrix {
    let n = circuit.num_qubits();
    circuit
        .ops()
        .iter()
        .fold(DenseMatrix::identity(1 << n), |acc, op| op_matrix(n, op).matmul(&acc))
}

/// Amplitudes of `U|0…0⟩`, the first column of the circuit unitary.
pub fn dense_execute(circuit: &Circuit) -> Vec<Complex64> {
    let u = circuit_unitary(circuit);
    (0..u.dim).map(|i| u.data[i * u.dim]).collect()
}

/// ⟨ψ| σ_axis on `qubit` |ψ⟩ as a dense quadratic form.
pub fn dense_expectation(state: &StateVector, qubit: usize, axis: Axis) -> f64 {
    let op = embed_single(state.num_qubits(), qubit, &axis.pauli());
    let amps = state.amplitudes();
    let applied = op.apply(amps);
    amps.iter().zip(applied).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

/// Random circuit on 1..=`max_qubits` qubits with 1..=`max_gates` ops.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, max_qubits: usize, max_gates: usize) -> Circuit {
    use std::f64::consts::TAU;
    let n = rng.gen_range(1..=max_qubits);
    let gates = rng.gen_range(1..=max_gates);
    let mut circuit = Circuit::new(n);
    for _ in 0..gates {
        let kind = if n >= 2 { rng.gen_range(0..3) } else { rng.gen_range(0..2) };
        let op = match kind {
            0 => GateOp::U3 {
                qubit: rng.gen_range(0..n),
                theta: rng.gen_range(0.0..TAU),
                phi: rng.gen_range(0.0..TAU),
                lambda: rng.gen_range(0.0..TAU),
            },
            1 => GateOp::Rotation {
                axis: Axis::ALL[rng.gen_range(0..3)],
                qubit: rng.gen_range(0..n),
                angle: rng.gen_range(-TAU..TAU),
            },
            _ => {
                let control = rng.gen_range(0..n);
                let target = (control + rng.gen_range(1..n)) % n;
                GateOp::Cnot { control, target }
            }
        };
        circuit.push(op).expect("generated op is valid");
    }
    circuit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_cnot_is_the_expected_permutation() {
        // |11⟩ → |10⟩ with control 0, target 1: index 3 → index 1
        let m = embed_cnot(2, 0, 1);
        let v = m.apply(&[0.0, 0.0, 0.0, 1.0].map(|x| Complex64::new(x, 0.0)));
        assert_eq!(v[1], Complex64::new(1.0, 0.0));
        assert_eq!(v.iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn u3_on_set_bit_via_dense_product() {
        // |10⟩ (qubit 1 set), U3(π) on qubit 1 → magnitude 1 on |00⟩
        let m = embed_single(2, 1, &u3_matrix(std::f64::consts::PI, 0.0, 0.0).unwrap());
        let v = m.apply(&[0.0, 0.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0)));
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply_single(1, &u3_matrix(std::f64::consts::PI, 0.0, 0.0).unwrap()).unwrap();
        assert!(s.amplitudes().iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
