//! Dense statevector kernel.
//!
//! Qubit `q` is bit `q` of the basis index, so qubit 0 is the least
//! significant bit. Operations mutate in place; clone a state to keep the
//! previous value.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 24;

/// Tolerance used to reject non-unitary gates.
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// Tolerance used by [`StateVector::sample_bitstring`] on the squared norm.
pub const SAMPLING_NORM_TOLERANCE: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [Complex64; 4]);

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2([ONE, ZERO, ZERO, ONE]);
    pub const PAULI_X: Matrix2 = Matrix2([ZERO, ONE, ONE, ZERO]);
    pub const PAULI_Y: Matrix2 = Matrix2([
        ZERO,
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        ZERO,
    ]);
    pub const PAULI_Z: Matrix2 = Matrix2([ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)]);

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Matrix2([m00, m01, m10, m11])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[2 * row + col]
    }

    pub fn adjoint(&self) -> Matrix2 {
        let [a, b, c, d] = self.0;
        Matrix2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    /// Largest entry-wise deviation of `M†M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        p.0.iter()
            .zip(Matrix2::IDENTITY.0.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Applies the matrix to a single-qubit column vector.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let [a, b, c, d] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;

    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Matrix2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// Single-qubit mean spin (⟨σx⟩, ⟨σy⟩, ⟨σz⟩).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Self {
        BlochVector { sx, sy, sz }
    }

    pub fn length(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }
}

/// Measurement outcome of a whole register. Bit `q` is qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bitstring {
    bits: u32,
    len: usize,
}

impl Bitstring {
    pub fn new(bits: u32, len: usize) -> Self {
        debug_assert!(len <= 32);
        let mask = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
        Bitstring { bits: bits & mask, len }
    }

    pub fn zeros(len: usize) -> Self {
        Bitstring::new(0, len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u32 {
        self.bits
    }

    pub fn bit(&self, qubit: usize) -> bool {
        (self.bits >> qubit) & 1 == 1
    }

    pub fn flip(&mut self, qubit: usize) {
        self.bits ^= 1 << qubit;
    }
}

impl fmt::Display for Bitstring {
    /// Highest qubit first, the usual ket ordering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.len).rev() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Pure state of `num_qubits` qubits as `2^num_qubits` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn insert_zero_bit(k: usize, bit: usize) -> usize {
    let low = k & ((1 << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}

fn check_size(num_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(Error::RegisterSize(num_qubits))
    }
}

impl StateVector {
    /// |00…0⟩.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_size(num_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector { num_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut s = StateVector::zero(num_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        s.amplitudes[0] = ZERO;
        s.amplitudes[index] = ONE;
        Ok(s)
    }

    /// Wraps explicit amplitudes. The length must be a power of two and
    /// the squared norm must be 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        let s = StateVector { num_qubits, amplitudes };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(n));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit < self.num_qubits {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange { qubit, num_qubits: self.num_qubits })
        }
    }

    /// Multiplies every amplitude pair that differs only in `qubit` by
    /// `gate`.
    pub fn apply_single(&mut self, qubit: usize, gate: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        if !gate.is_finite() {
            return Err(Error::NonFinite("gate entries"));
        }
        let dev = gate.unitarity_deviation();
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary(dev));
        }
        self.apply_matrix_unchecked(qubit, gate);
        Ok(())
    }

    /// Same pairing as [`apply_single`](Self::apply_single) without the
    /// unitarity check; Kraus operators go through here.
    pub(crate) fn apply_matrix_unchecked(&mut self, qubit: usize, m: &Matrix2) {
        let stride = 1usize << qubit;
        let [a, b, c, d] = m.0;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*x0, *x1);
                *x0 = a * v0 + b * v1;
                *x1 = c * v0 + d * v1;
            }
        }
    }

    /// Scales the bit-0 half of `qubit` by `c0` and the bit-1 half by `c1`.
    pub(crate) fn scale_halves(&mut self, qubit: usize, c0: f64, c1: f64) {
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.iter_mut().for_each(|x| *x *= c0);
            hi.iter_mut().for_each(|x| *x *= c1);
        }
    }

    /// Moves the bit-1 half of `qubit` into the bit-0 half scaled by
    /// `scale`, zeroing the bit-1 half (the amplitude-damping jump).
    pub(crate) fn lower_qubit(&mut self, qubit: usize, scale: f64) {
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                *x0 = *x1 * scale;
                *x1 = ZERO;
            }
        }
    }

    /// Zeros the bit-0 half of `qubit` and scales the bit-1 half.
    pub(crate) fn project_one(&mut self, qubit: usize, scale: f64) {
        self.scale_halves(qubit, 0.0, scale);
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        let (lo, hi) = (control.min(target), control.max(target));
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        // enumerate indices with both bits clear by inserting zeros at
        // `lo` and `hi`, then swap |c=1,t=0⟩ with |c=1,t=1⟩
        for k in 0..self.amplitudes.len() >> 2 {
            let mut i = insert_zero_bit(k, lo);
            i = insert_zero_bit(i, hi);
            let i = i | cmask;
            self.amplitudes.swap(i, i | tmask);
        }
        Ok(())
    }

    /// Marginal probabilities (p0, p1) of one qubit.
    pub fn qubit_probabilities(&self, qubit: usize) -> Result<(f64, f64)> {
        self.check_qubit(qubit)?;
        let p1 = self.probability_one_unchecked(qubit);
        let total = self.norm_sqr();
        Ok((total - p1, p1))
    }

    pub(crate) fn probability_one_unchecked(&self, qubit: usize) -> f64 {
        let stride = 1usize << qubit;
        self.amplitudes
            .chunks_exact(2 * stride)
            .map(|block| block[stride..].iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Probability of each basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws one register outcome from the Born distribution without
    /// collapsing the state.
    pub fn sample_bitstring<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Bitstring> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > SAMPLING_NORM_TOLERANCE {
            return Err(Error::Normalization(n));
        }
        let u: f64 = rng.gen::<f64>() * n;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc += p;
                last_nonzero = i;
                if u < acc {
                    return Ok(Bitstring::new(i as u32, self.num_qubits));
                }
            }
        }
        Ok(Bitstring::new(last_nonzero as u32, self.num_qubits))
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Reduced 2x2 density matrix of `qubit`, tracing out every other
    /// qubit. Entry (i, j) is Σ_k ψ(k, i) ψ*(k, j).
    pub fn reduced_density_matrix(&self, qubit: usize) -> Result<Matrix2> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        let mut rho = [ZERO; 4];
        for block in self.amplitudes.chunks_exact(2 * stride) {
            let (lo, hi) = block.split_at(stride);
            for (a0, a1) in lo.iter().zip(hi.iter()) {
                rho[0] += a0 * a0.conj();
                rho[1] += a0 * a1.conj();
                rho[2] += a1 * a0.conj();
                rho[3] += a1 * a1.conj();
            }
        }
        Ok(Matrix2(rho))
    }

    /// (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of `qubit` from its reduced density matrix.
    pub fn reduced_bloch_vector(&self, qubit: usize) -> Result<BlochVector> {
        let rho = self.reduced_density_matrix(qubit)?;
        let r01 = rho.entry(0, 1);
        Ok(BlochVector {
            sx: 2.0 * r01.re,
            sy: -2.0 * r01.im,
            sz: rho.entry(0, 0).re - rho.entry(1, 1).re,
        })
    }
}

/// Repeated sampling from a fixed state via a precomputed cumulative
/// distribution; each draw is a binary search.
#[derive(Debug, Clone)]
pub struct Sampler {
    num_qubits: usize,
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(state: &StateVector) -> Result<Self> {
        let n = state.norm_sqr();
        if (n - 1.0).abs() > SAMPLING_NORM_TOLERANCE {
            return Err(Error::Normalization(n));
        }
        let mut acc = 0.0;
        let cumulative = state
            .amplitudes
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Ok(Sampler { num_qubits: state.num_qubits, cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bitstring {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.gen::<f64>() * total;
        // first index whose cumulative weight exceeds u; zero-probability
        // indices share their predecessor's value and are never selected
        let idx = self.cumulative.partition_point(|&c| c <= u);
        let idx = idx.min(self.cumulative.len() - 1);
        Bitstring::new(idx as u32, self.num_qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cat(n: usize, theta: f64) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = c((theta / 2.0).cos(), 0.0);
        amps[(1 << n) - 1] = c((theta / 2.0).sin(), 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn zero_state_sizes() {
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(StateVector::zero(2).unwrap().amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s = StateVector::zero(15).unwrap();
        assert_eq!(s.amplitudes().len(), 32768);
        assert_eq!(s.amplitude(0), ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
        assert_eq!(StateVector::zero(0), Err(Error::RegisterSize(0)));
        assert_eq!(StateVector::zero(25), Err(Error::RegisterSize(25)));
    }

    #[test]
    fn single_qubit_gate_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_single(2, &Matrix2::PAULI_X),
            Err(Error::QubitOutOfRange { qubit: 2, num_qubits: 2 })
        ));
        let not_unitary = Matrix2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(s.apply_single(0, &not_unitary), Err(Error::NonUnitary(_))));
        s.apply_single(0, &Matrix2::IDENTITY).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn cnot_cases() {
        let h = FRAC_1_SQRT_2;
        let mut s = StateVector::from_amplitudes(vec![c(h, 0.0), c(h, 0.0), ZERO, ZERO]).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes(), &[c(h, 0.0), ZERO, ZERO, c(h, 0.0)]);

        let mut s = StateVector::zero(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());

        let mut s = StateVector::basis(2, 0b11).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b01).unwrap());

        assert_eq!(s.apply_cnot(1, 1), Err(Error::SameQubit(1)));
        assert!(s.apply_cnot(0, 5).is_err());
    }

    #[test]
    fn probabilities_of_cat_states() {
        for q in 0..4 {
            let (p0, p1) = cat(4, PI / 2.0).qubit_probabilities(q).unwrap();
            assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
            let (p0, p1) = cat(4, PI / 3.0).qubit_probabilities(q).unwrap();
            assert!((p0 - 0.75).abs() < 1e-12 && (p1 - 0.25).abs() < 1e-12);
        }
        assert_eq!(StateVector::zero(1).unwrap().qubit_probabilities(0).unwrap(), (1.0, 0.0));
        assert!(cat(3, 1.0).qubit_probabilities(3).is_err());
    }

    #[test]
    fn sampling_cat_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z = StateVector::zero(3).unwrap();
        for _ in 0..100 {
            assert_eq!(z.sample_bitstring(&mut rng).unwrap().value(), 0);
        }

        let s = cat(4, PI / 2.0);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            match s.sample_bitstring(&mut rng).unwrap().value() {
                0 => {}
                0b1111 => ones += 1,
                other => panic!("impossible outcome {other:b}"),
            }
        }
        // 3σ of a fair binomial at 1e5 draws is 0.0047
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.005);

        let s = cat(4, PI);
        for _ in 0..10_000 {
            assert_eq!(s.sample_bitstring(&mut rng).unwrap().value(), 0b1111);
        }
    }

    #[test]
    fn sampling_rejects_unnormalized() {
        let mut s = StateVector::zero(1).unwrap();
        s.amplitudes_mut()[0] = c(0.9, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(s.sample_bitstring(&mut rng), Err(Error::Normalization(_))));
        assert!(Sampler::new(&s).is_err());
    }

    #[test]
    fn sampler_skips_zero_probability_outcomes() {
        let s = cat(3, PI / 2.0);
        let sampler = Sampler::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let v = sampler.sample(&mut rng).value();
            assert!(v == 0 || v == 7);
        }
    }

    #[test]
    fn inner_products() {
        let a = cat(3, PI / 2.0);
        assert!((a.inner_product(&a).unwrap() - ONE).norm() < 1e-12);
        let z = StateVector::basis(1, 0).unwrap();
        let o = StateVector::basis(1, 1).unwrap();
        assert_eq!(z.inner_product(&o).unwrap(), ZERO);
        let expected = (PI / 4.0).cos() * (PI / 6.0).cos() + (PI / 4.0).sin() * (PI / 6.0).sin();
        let got = a.inner_product(&cat(3, PI / 3.0)).unwrap();
        assert!((got.re - expected).abs() < 1e-12 && got.im.abs() < 1e-12);
        assert!((got.re - (PI / 12.0).cos()).abs() < 1e-12);
        assert!(matches!(a.inner_product(&z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = StateVector::from_amplitudes(vec![ZERO, c(0.0, 1.0)]).unwrap();
        let b = StateVector::basis(1, 1).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn bloch_vectors() {
        for theta in [0.0, 0.4, PI / 2.0, 2.0, PI] {
            for q in 0..3 {
                let b = cat(3, theta).reduced_bloch_vector(q).unwrap();
                assert!(b.sx.abs() < 1e-12 && b.sy.abs() < 1e-12);
                assert!((b.sz - theta.cos()).abs() < 1e-12);
            }
        }
        let (theta, phi) = (1.1_f64, 0.7_f64);
        let q0 = [c((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
        let s = StateVector::from_amplitudes(vec![q0[0], q0[1], ZERO, ZERO]).unwrap();
        let b = s.reduced_bloch_vector(0).unwrap();
        assert!((b.sx - theta.sin() * phi.cos()).abs() < 1e-12);
        assert!((b.sy - theta.sin() * phi.sin()).abs() < 1e-12);
        assert!((b.sz - theta.cos()).abs() < 1e-12);
        assert!((b.length() - 1.0).abs() < 1e-12);

        let bell = cat(2, PI / 2.0);
        for q in 0..2 {
            assert!(bell.reduced_bloch_vector(q).unwrap().length() < 1e-12);
        }
    }

    #[test]
    fn bitstring_display_puts_highest_qubit_first() {
        let b = Bitstring::new(0b0011, 4);
        assert_eq!(b.to_string(), "0011");
        assert!(b.bit(0) && b.bit(1) && !b.bit(2));
    }
}
