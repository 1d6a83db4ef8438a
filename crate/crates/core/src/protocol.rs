//! One-qubit-versus-rest entanglement from measured spin components.
//!
//! A register can only be read in the z basis, so ⟨σx⟩ and ⟨σy⟩ of a
//! qubit are obtained by rotating it first: ⟨σx⟩ is the z-basis mean
//! p0 − p1 after exp(+iπ/4·σy), ⟨σy⟩ the mean after exp(−iπ/4·σx). The
//! geometric measure of entanglement between that qubit and the rest of a
//! pure state is then E = (1 − |⟨σ⟩|)/2.
//!
//! Every estimator has an exact mode (infinite shots, analytic
//! probabilities) that runs through the same rotation pipeline as the
//! sampled mode.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{build_cat_chain, build_cat_on_topology, cat_state, Axis, CatParams, Circuit, CouplingMap, GateOp};
use crate::error::{Error, Result};
use crate::noise::{apply_readout_error, run_trajectory, NoiseModel};
use crate::qstate::{BlochVector, Sampler, StateVector};
use crate::seed::SeedStream;

/// How Pauli means are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    /// Analytic z-basis probabilities after the pre-rotation.
    Exact,
    /// Finite number of shots per axis.
    Shots(u32),
}

impl Estimator {
    pub fn shots(self) -> Option<u32> {
        match self {
            Estimator::Exact => None,
            Estimator::Shots(n) => Some(n),
        }
    }
}

/// The basis change that maps the `axis` spin component onto σz, as
/// `(rotation axis, angle)`.
pub fn pre_rotation(axis: Axis) -> Option<(Axis, f64)> {
    use std::f64::consts::FRAC_PI_2;
    match axis {
        Axis::X => Some((Axis::Y, FRAC_PI_2)),
        Axis::Y => Some((Axis::X, -FRAC_PI_2)),
        Axis::Z => None,
    }
}

/// p0 − p1 of `qubit` after an optional rotation.
pub fn rotated_z_mean(
    state: &StateVector,
    qubit: usize,
    rotation: Option<(Axis, f64)>,
) -> Result<f64> {
    let (p0, p1) = match rotation {
        None => state.qubit_probabilities(qubit)?,
        Some((axis, angle)) => {
            let mut rotated = state.clone();
            GateOp::Rotation { axis, qubit, angle }.apply(&mut rotated)?;
            rotated.qubit_probabilities(qubit)?
        }
    };
    Ok(p0 - p1)
}

/// Exact ⟨σ_axis⟩ of `qubit` via the rotate-then-measure pipeline.
pub fn exact_pauli_mean(state: &StateVector, qubit: usize, axis: Axis) -> Result<f64> {
    rotated_z_mean(state, qubit, pre_rotation(axis))
}

/// `circuit` followed by the measurement pre-rotation for `axis`.
pub fn measurement_circuit(circuit: &Circuit, qubit: usize, axis: Axis) -> Result<Circuit> {
    let mut out = circuit.clone();
    if let Some((rot_axis, angle)) = pre_rotation(axis) {
        out.push_measurement_rotation(GateOp::Rotation { axis: rot_axis, qubit, angle })?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliMean {
    pub mean: f64,
    pub stderr: f64,
}

/// sqrt((1 − m²)/S), the standard error of a ±1-valued mean.
pub fn shot_stderr(mean: f64, shots: u32) -> f64 {
    ((1.0 - mean * mean).max(0.0) / shots as f64).sqrt()
}

/// Estimates ⟨σ_axis⟩ of `qubit` in the state `circuit` prepares.
///
/// Sampled mode: each shot `s` draws from `seed.child(s)`. Without active
/// noise the final state is computed once and sampled without collapse;
/// with noise every shot is a fresh trajectory followed by readout error.
pub fn estimate_pauli_mean(
    circuit: &Circuit,
    qubit: usize,
    axis: Axis,
    estimator: Estimator,
    noise: Option<&NoiseModel>,
    seed: SeedStream,
) -> Result<PauliMean> {
    if qubit >= circuit.num_qubits() {
        return Err(Error::QubitOutOfRange { qubit, num_qubits: circuit.num_qubits() });
    }
    let noise = noise.filter(|m| m.is_active());
    let shots = match estimator {
        Estimator::Shots(0) => return Err(Error::InvalidArgument("shots must be ≥ 1".into())),
        Estimator::Shots(n) => n,
        Estimator::Exact => {
            if noise.is_some() {
                return Err(Error::InvalidArgument(
                    "exact mode is noiseless; use shots with a noise model".into(),
                ));
            }
            let state = circuit.run()?;
            return Ok(PauliMean { mean: exact_pauli_mean(&state, qubit, axis)?, stderr: 0.0 });
        }
    };
    let measured = measurement_circuit(circuit, qubit, axis)?;

    let ones: usize = match noise {
        None => {
            let sampler = Sampler::new(&measured.run()?)?;
            (0..shots)
                .into_par_iter()
                .filter(|&s| sampler.sample(&mut seed.child(s as u64).rng()).bit(qubit))
                .count()
        }
        Some(model) => {
            let outcomes = (0..shots)
                .into_par_iter()
                .map(|s| {
                    let mut rng = seed.child(s as u64).rng();
                    let state = run_trajectory(&measured, model, &mut rng)?;
                    let mut bits = state.sample_bitstring(&mut rng)?;
                    if model.config.include_readout {
                        bits = apply_readout_error(bits, &model.calibration, &mut rng)?;
                    }
                    Ok(bits.bit(qubit))
                })
                .collect::<Result<Vec<bool>>>()?;
            outcomes.into_iter().filter(|&b| b).count()
        }
    };
    let zeros = shots as usize - ones;
    let mean = (zeros as f64 - ones as f64) / shots as f64;
    Ok(PauliMean { mean, stderr: shot_stderr(mean, shots) })
}

/// Estimated spin vector of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochEstimate {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub stderr_x: f64,
    pub stderr_y: f64,
    pub stderr_z: f64,
    /// `None` in exact mode.
    pub shots_per_axis: Option<u32>,
}

impl BlochEstimate {
    pub fn exact(v: BlochVector) -> Self {
        BlochEstimate {
            sx: v.sx,
            sy: v.sy,
            sz: v.sz,
            stderr_x: 0.0,
            stderr_y: 0.0,
            stderr_z: 0.0,
            shots_per_axis: None,
        }
    }

    pub fn vector(&self) -> BlochVector {
        BlochVector::new(self.sx, self.sy, self.sz)
    }

    pub fn length(&self) -> f64 {
        self.vector().length()
    }

    /// Standard error of E. The length is 1-Lipschitz in the components,
    /// so half the norm of the component errors bounds it.
    pub fn entanglement_stderr(&self) -> f64 {
        0.5 * (self.stderr_x.powi(2) + self.stderr_y.powi(2) + self.stderr_z.powi(2)).sqrt()
    }
}

/// E = (1 − min(1, |⟨σ⟩|))/2.
pub fn entanglement_from_bloch(bloch: &BlochEstimate) -> Result<f64> {
    geometric_entanglement(bloch.vector())
}

pub fn geometric_entanglement(v: BlochVector) -> Result<f64> {
    if !(v.sx.is_finite() && v.sy.is_finite() && v.sz.is_finite()) {
        return Err(Error::NonFinite("Bloch components"));
    }
    Ok((1.0 - v.length().min(1.0)) / 2.0)
}

/// (1 − |cos θ|)/2, the value for every qubit of a cat state.
pub fn cat_entanglement_theory(theta: f64) -> f64 {
    (1.0 - theta.cos().abs()) / 2.0
}

/// |⟨reference|actual⟩|².
pub fn fidelity_exact(reference: &StateVector, actual: &StateVector) -> Result<f64> {
    Ok(reference.inner_product(actual)?.norm_sqr().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Trajectory average of |⟨reference|ψ_traj⟩|², i.e. ⟨reference|ρ|reference⟩
/// for the unravelled mixed state. Trajectory `t` uses `seed.child(t)`.
pub fn fidelity_noisy(
    reference: &StateVector,
    circuit: &Circuit,
    noise: &NoiseModel,
    trajectories: u32,
    seed: SeedStream,
) -> Result<FidelityEstimate> {
    if trajectories == 0 {
        return Err(Error::InvalidArgument("trajectories must be ≥ 1".into()));
    }
    if !noise.is_active() {
        let f = fidelity_exact(reference, &circuit.run()?)?;
        return Ok(FidelityEstimate { mean: f, stderr: 0.0 });
    }
    let samples = (0..trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.child(t as u64).rng();
            fidelity_exact(reference, &run_trajectory(circuit, noise, &mut rng)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(FidelityEstimate { mean, stderr: (var / n).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementResult {
    /// θ of the prepared cat state, when known.
    pub theta: Option<f64>,
    pub e_measured: f64,
    pub e_theory: Option<f64>,
    pub bloch: BlochEstimate,
    /// The estimated spin length exceeded 1 and was clamped.
    pub clamped: bool,
    pub fidelity: Option<FidelityEstimate>,
}

/// Seed sub-stream index of the x/y/z estimates; fidelity trajectories use
/// index 3.
const FIDELITY_STREAM: u64 = 3;

/// Estimates all three spin components of `qubit` (a fresh shot budget per
/// axis) and combines them into E.
pub fn measure_qubit_entanglement(
    circuit: &Circuit,
    qubit: usize,
    estimator: Estimator,
    noise: Option<&NoiseModel>,
    seed: SeedStream,
) -> Result<EntanglementResult> {
    let mut means = [PauliMean { mean: 0.0, stderr: 0.0 }; 3];
    for axis in Axis::ALL {
        means[axis.index()] = estimate_pauli_mean(
            circuit,
            qubit,
            axis,
            estimator,
            noise,
            seed.child(axis.index() as u64),
        )?;
    }
    let bloch = BlochEstimate {
        sx: means[0].mean,
        sy: means[1].mean,
        sz: means[2].mean,
        stderr_x: means[0].stderr,
        stderr_y: means[1].stderr,
        stderr_z: means[2].stderr,
        shots_per_axis: estimator.shots(),
    };
    let cat = circuit.cat_params();
    Ok(EntanglementResult {
        theta: cat.map(|p| p.theta),
        e_measured: entanglement_from_bloch(&bloch)?,
        e_theory: cat.map(|p| cat_entanglement_theory(p.theta)),
        bloch,
        clamped: bloch.length() > 1.0,
        fidelity: None,
    })
}

/// Fidelity of the state `circuit` prepares against the cat state it is
/// tagged with.
pub fn cat_fidelity(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    trajectories: u32,
    seed: SeedStream,
) -> Result<FidelityEstimate> {
    let params = circuit
        .cat_params()
        .ok_or_else(|| Error::InvalidArgument("circuit is not a cat-state circuit".into()))?;
    let reference = cat_state(circuit.num_qubits(), params)?;
    match noise.filter(|m| m.is_active()) {
        Some(model) => fidelity_noisy(&reference, circuit, model, trajectories, seed),
        None => Ok(FidelityEstimate { mean: fidelity_exact(&reference, &circuit.run()?)?, stderr: 0.0 }),
    }
}

/// θ values `start, start + step, …` up to `end` inclusive. An endpoint
/// within 1e-9·step of the grid counts as on it.
pub fn theta_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(Error::NonFinite("theta grid"));
    }
    if step <= 0.0 {
        return Err(Error::InvalidArgument("theta step must be positive".into()));
    }
    if end < start {
        return Err(Error::InvalidArgument("theta end precedes start".into()));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// How a cat circuit is laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum BuildMode {
    Chain,
    Topology { coupling: CouplingMap, root: usize },
}

impl BuildMode {
    pub fn build(&self, num_qubits: usize, params: CatParams) -> Result<Circuit> {
        match self {
            BuildMode::Chain => build_cat_chain(num_qubits, params),
            BuildMode::Topology { coupling, root } => {
                if coupling.num_qubits() != num_qubits {
                    return Err(Error::DimensionMismatch {
                        left: num_qubits,
                        right: coupling.num_qubits(),
                    });
                }
                build_cat_on_topology(coupling, *root, params)
            }
        }
    }
}

/// Fidelity request for a sweep; `trajectories` is used only with noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FidelityRequest {
    pub trajectories: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub num_qubits: usize,
    pub build: BuildMode,
    pub measure_qubit: usize,
    pub thetas: Vec<f64>,
    pub estimator: Estimator,
    pub noise: Option<NoiseModel>,
    pub fidelity: Option<FidelityRequest>,
}

/// One result per θ, in grid order. Point `k` uses `seed.child(k)`.
pub fn sweep_theta(spec: &SweepSpec, seed: SeedStream) -> Result<Vec<EntanglementResult>> {
    if spec.measure_qubit >= spec.num_qubits {
        return Err(Error::QubitOutOfRange { qubit: spec.measure_qubit, num_qubits: spec.num_qubits });
    }
    spec.thetas
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            let point_seed = seed.child(k as u64);
            let circuit = spec.build.build(spec.num_qubits, CatParams::new(theta))?;
            let mut result = measure_qubit_entanglement(
                &circuit,
                spec.measure_qubit,
                spec.estimator,
                spec.noise.as_ref(),
                point_seed,
            )?;
            if let Some(req) = spec.fidelity {
                result.fidelity = Some(cat_fidelity(
                    &circuit,
                    spec.noise.as_ref(),
                    req.trajectories,
                    point_seed.child(FIDELITY_STREAM),
                )?);
            }
            Ok(result)
        })
        .collect()
}

/// E for each listed qubit of the cat state built on `coupling` from
/// `root`. Qubit `q` uses `seed.child(q)`.
pub fn per_qubit_entanglement_for(
    coupling: &CouplingMap,
    root: usize,
    theta: f64,
    qubits: &[usize],
    estimator: Estimator,
    noise: Option<&NoiseModel>,
    seed: SeedStream,
) -> Result<Vec<(usize, EntanglementResult)>> {
    let circuit = build_cat_on_topology(coupling, root, CatParams::new(theta))?;
    qubits
        .par_iter()
        .map(|&q| {
            measure_qubit_entanglement(&circuit, q, estimator, noise, seed.child(q as u64))
                .map(|r| (q, r))
        })
        .collect()
}

/// [`per_qubit_entanglement_for`] over every qubit of the map.
pub fn per_qubit_entanglement(
    coupling: &CouplingMap,
    root: usize,
    theta: f64,
    estimator: Estimator,
    noise: Option<&NoiseModel>,
    seed: SeedStream,
) -> Result<Vec<(usize, EntanglementResult)>> {
    let all: Vec<usize> = (0..coupling.num_qubits()).collect();
    per_qubit_entanglement_for(coupling, root, theta, &all, estimator, noise, seed)
}
