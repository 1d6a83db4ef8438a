//! Device calibration tables and a Monte-Carlo trajectory noise engine.
//!
//! Each gate is followed, on every qubit it touches, by three channels in
//! a fixed order: depolarizing (a uniformly chosen non-identity Pauli with
//! the gate's error probability), amplitude damping from T1, then pure
//! dephasing from the part of T2 not explained by T1. Kraus branches are
//! picked with their Born weight and the state is renormalized, so every
//! trajectory stays a unit vector and the ensemble average reproduces the
//! density-matrix evolution. Readout error is a symmetric classical flip.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::circuit::{Circuit, CouplingMap, GateOp};
use crate::error::{Error, Result};
use crate::qstate::{Bitstring, Matrix2, StateVector};

/// Name under which the bundled 2020-04-04 ibmq-melbourne table is known.
pub const MELBOURNE_CALIBRATION_NAME: &str = "melbourne-20200404";

const MELBOURNE_CALIBRATION: &str = include_str!("../data/melbourne-20200404.cal");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitCalibration {
    /// Energy relaxation time, µs.
    pub t1: f64,
    /// Total dephasing time, µs.
    pub t2: f64,
    pub gate_error: f64,
    pub readout_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCalibration {
    /// Stored as (low, high).
    pub pair: (usize, usize),
    pub cx_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationTable {
    pub qubits: Vec<QubitCalibration>,
    pub edges: Vec<EdgeCalibration>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn check_probability(name: &str, p: f64) -> std::result::Result<f64, String> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{name}={p} is not a probability"))
    }
}

fn check_time(name: &str, t: f64) -> std::result::Result<f64, String> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(format!("{name}={t} must be positive"))
    }
}

impl CalibrationTable {
    /// The bundled ibmq-melbourne snapshot.
    pub fn melbourne() -> Self {
        CalibrationTable::parse(MELBOURNE_CALIBRATION).expect("bundled calibration parses")
    }

    /// Every qubit identical and every listed edge sharing one CX error.
    pub fn uniform(
        num_qubits: usize,
        qubit: QubitCalibration,
        edges: &[(usize, usize)],
        cx_error: f64,
    ) -> Self {
        CalibrationTable {
            qubits: vec![qubit; num_qubits],
            edges: edges
                .iter()
                .map(|&(a, b)| EdgeCalibration { pair: ordered(a, b), cx_error })
                .collect(),
        }
    }

    /// Parses the line-oriented calibration format:
    ///
    /// ```text
    /// qubits 2
    /// q0 t1=69.0 t2=22.8 gate_err=0.00061 readout_err=0.0305
    /// q1 t1=63.2 t2=73.6 gate_err=0.00136 readout_err=0.0265
    /// cx 0 1 err=0.0187
    /// ```
    ///
    /// Error rates are absolute unless a `units scaled` line precedes them,
    /// in which case gate errors are read in units of 1e-3 and readout and
    /// CX errors in units of 1e-2.
    pub fn parse(text: &str) -> Result<Self> {
        let mut num_qubits: Option<usize> = None;
        let mut qubits: Vec<Option<QubitCalibration>> = Vec::new();
        let mut edges: Vec<EdgeCalibration> = Vec::new();
        let (mut gate_scale, mut readout_scale, mut cx_scale) = (1.0, 1.0, 1.0);

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();

            let Some(n) = num_qubits else {
                match fields.as_slice() {
                    ["qubits", n] => {
                        let n: usize =
                            n.parse().map_err(|_| err(format!("malformed number `{n}`")))?;
                        num_qubits = Some(n);
                        qubits = vec![None; n];
                        continue;
                    }
                    _ => return Err(err("expected `qubits N` header".into())),
                }
            };

            match fields[0] {
                "units" => match fields.get(1..) {
                    Some(["scaled"]) => (gate_scale, readout_scale, cx_scale) = (1e-3, 1e-2, 1e-2),
                    Some(["absolute"]) => (gate_scale, readout_scale, cx_scale) = (1.0, 1.0, 1.0),
                    _ => return Err(err(format!("unknown units directive `{line}`"))),
                },
                "cx" => {
                    let [_, a, b, rest @ ..] = fields.as_slice() else {
                        return Err(err("expected `cx i j err=<p>`".into()));
                    };
                    let a = parse_index(a, n).map_err(err)?;
                    let b = parse_index(b, n).map_err(err)?;
                    if a == b {
                        return Err(err(format!("edge {a}-{a} is a self-loop")));
                    }
                    let kv = KeyValues::parse(rest).map_err(err)?;
                    let cx_error =
                        check_probability("err", kv.get("err").map_err(err)? * cx_scale)
                            .map_err(err)?;
                    let pair = ordered(a, b);
                    if edges.iter().any(|e| e.pair == pair) {
                        return Err(err(format!("duplicate edge {}-{}", pair.0, pair.1)));
                    }
                    edges.push(EdgeCalibration { pair, cx_error });
                }
                tag if tag.starts_with('q') => {
                    let q = parse_index(&tag[1..], n).map_err(err)?;
                    let kv = KeyValues::parse(&fields[1..]).map_err(err)?;
                    let cal = QubitCalibration {
                        t1: check_time("t1", kv.get("t1").map_err(err)?).map_err(err)?,
                        t2: check_time("t2", kv.get("t2").map_err(err)?).map_err(err)?,
                        gate_error: check_probability(
                            "gate_err",
                            kv.get("gate_err").map_err(err)? * gate_scale,
                        )
                        .map_err(err)?,
                        readout_error: check_probability(
                            "readout_err",
                            kv.get("readout_err").map_err(err)? * readout_scale,
                        )
                        .map_err(err)?,
                    };
                    if qubits[q].replace(cal).is_some() {
                        return Err(err(format!("duplicate row for qubit {q}")));
                    }
                }
                other => return Err(err(format!("unrecognized line starting `{other}`"))),
            }
        }

        if num_qubits.is_none() {
            return Err(Error::Parse { line: 0, msg: "missing `qubits N` header".into() });
        }
        let qubits = qubits
            .into_iter()
            .enumerate()
            .map(|(q, c)| {
                c.ok_or_else(|| Error::Parse { line: 0, msg: format!("missing row for qubit q{q}") })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CalibrationTable { qubits, edges })
    }

    pub fn load(path: &Path) -> Result<Self> {
        CalibrationTable::parse(&std::fs::read_to_string(path)?)
    }

    /// Writes the table in absolute units.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubits.len());
        for (i, q) in self.qubits.iter().enumerate() {
            let _ = writeln!(
                out,
                "q{i} t1={:?} t2={:?} gate_err={:?} readout_err={:?}",
                q.t1, q.t2, q.gate_error, q.readout_error
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "cx {} {} err={:?}", e.pair.0, e.pair.1, e.cx_error);
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration> {
        self.qubits.get(q).ok_or_else(|| Error::MissingCalibration(format!("qubit {q}")))
    }

    pub fn cx_error(&self, a: usize, b: usize) -> Result<f64> {
        let pair = ordered(a, b);
        self.edges
            .iter()
            .find(|e| e.pair == pair)
            .map(|e| e.cx_error)
            .ok_or_else(|| Error::MissingCalibration(format!("cx {}-{}", pair.0, pair.1)))
    }

    /// Checks every calibrated edge is part of `coupling`.
    pub fn check_coupling(&self, coupling: &CouplingMap) -> Result<()> {
        if self.num_qubits() != coupling.num_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits(),
                right: coupling.num_qubits(),
            });
        }
        match self.edges.iter().find(|e| !coupling.contains(e.pair.0, e.pair.1)) {
            Some(e) => Err(Error::InvalidEdge(e.pair.0, e.pair.1)),
            None => Ok(()),
        }
    }

    /// Table for the sub-register whose logical qubit `i` is physical qubit
    /// `physical[i]`. Edges with an endpoint outside the sub-register drop.
    pub fn restrict(&self, physical: &[usize]) -> Result<Self> {
        let qubits = physical.iter().map(|&p| self.qubit(p).copied()).collect::<Result<_>>()?;
        let logical = |p: usize| physical.iter().position(|&x| x == p);
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (logical(e.pair.0)?, logical(e.pair.1)?);
                Some(EdgeCalibration { pair: ordered(a, b), cx_error: e.cx_error })
            })
            .collect();
        Ok(CalibrationTable { qubits, edges })
    }
}

fn parse_index(s: &str, n: usize) -> std::result::Result<usize, String> {
    let q: usize = s.parse().map_err(|_| format!("malformed qubit index `{s}`"))?;
    if q < n {
        Ok(q)
    } else {
        Err(format!("qubit {q} outside the {n}-qubit register"))
    }
}

struct KeyValues<'a>(Vec<(&'a str, f64)>);

impl<'a> KeyValues<'a> {
    fn parse(fields: &[&'a str]) -> std::result::Result<Self, String> {
        fields
            .iter()
            .map(|f| {
                let (k, v) = f.split_once('=').ok_or_else(|| format!("expected key=value, got `{f}`"))?;
                let v: f64 = v.parse().map_err(|_| format!("malformed number `{v}` for {k}"))?;
                Ok((k, v))
            })
            .collect::<std::result::Result<_, String>>()
            .map(KeyValues)
    }

    fn get(&self, key: &str) -> std::result::Result<f64, String> {
        self.0
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
            .ok_or_else(|| format!("missing field `{key}`"))
    }
}

/// Switches and gate durations for the noise engine.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// ns
    pub single_gate_duration: f64,
    /// ns
    pub cx_gate_duration: f64,
    pub include_thermal: bool,
    pub include_depolarizing: bool,
    pub include_readout: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            enabled: true,
            single_gate_duration: 100.0,
            cx_gate_duration: 300.0,
            include_thermal: true,
            include_depolarizing: true,
            include_readout: true,
        }
    }
}

impl NoiseConfig {
    pub fn disabled() -> Self {
        NoiseConfig { enabled: false, ..NoiseConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.single_gate_duration > 0.0 && self.cx_gate_duration > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument("gate durations must be positive".into()))
        }
    }
}

/// Calibration plus configuration: everything a noisy run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub calibration: CalibrationTable,
    pub config: NoiseConfig,
}

impl NoiseModel {
    pub fn new(calibration: CalibrationTable, config: NoiseConfig) -> Self {
        NoiseModel { calibration, config }
    }

    pub fn is_active(&self) -> bool {
        self.config.enabled
    }
}

/// γ = 1 − exp(−duration/T1), T1 in µs and duration in ns.
pub fn damping_probability(t1: f64, duration: f64) -> Result<f64> {
    if t1.is_nan() || t1 <= 0.0 {
        return Err(Error::InvalidArgument(format!("t1 must be positive, got {t1}")));
    }
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidArgument(format!("duration must be ≥ 0, got {duration}")));
    }
    Ok(-(-duration / 1000.0 / t1).exp_m1())
}

/// λ = 1 − exp(−duration/Tφ) with 1/Tφ = max(0, 1/T2 − 1/(2·T1)).
pub fn dephasing_probability(t1: f64, t2: f64, duration: f64) -> Result<f64> {
    if t1.is_nan() || t2.is_nan() || t1 <= 0.0 || t2 <= 0.0 {
        return Err(Error::InvalidArgument(format!("t1, t2 must be positive, got {t1}, {t2}")));
    }
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidArgument(format!("duration must be ≥ 0, got {duration}")));
    }
    let rate = (1.0 / t2 - 1.0 / (2.0 * t1)).max(0.0);
    if rate == 0.0 {
        return Ok(0.0);
    }
    Ok(-(-duration / 1000.0 * rate).exp_m1())
}

const NON_IDENTITY_PAULIS: [Matrix2; 3] = [Matrix2::PAULI_X, Matrix2::PAULI_Y, Matrix2::PAULI_Z];

/// With probability `p` applies X, Y or Z (uniformly) to `qubit`.
pub fn apply_depolarizing<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    state.check_qubit(qubit)?;
    if p > 0.0 && rng.gen::<f64>() < p {
        let pauli = &NON_IDENTITY_PAULIS[rng.gen_range(0..3)];
        state.apply_matrix_unchecked(qubit, pauli);
    }
    Ok(())
}

/// Marginal p1 of `qubit`; states are kept normalized.
fn excited_population(state: &StateVector, qubit: usize) -> f64 {
    state.probability_one_unchecked(qubit).clamp(0.0, 1.0)
}

/// Which Kraus branch a decay step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Jump,
    NoJump,
}

/// Samples a decay-type channel with K_jump ∝ √p on the |1⟩ part. Both
/// damping and pure dephasing have jump weight `p·p1`.
fn sample_branch<R: Rng + ?Sized>(p: f64, p1: f64, rng: &mut R) -> Branch {
    let w = p * p1;
    if w > 0.0 && rng.gen::<f64>() < w {
        Branch::Jump
    } else {
        Branch::NoJump
    }
}

/// Kraus pair K0 = diag(1, √(1−γ)), K1 = √γ |0⟩⟨1|.
pub fn apply_amplitude_damping<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<()> {
    state.check_qubit(qubit)?;
    if gamma <= 0.0 {
        return Ok(());
    }
    let p1 = excited_population(state, qubit);
    damping_step(state, qubit, gamma, p1, rng);
    Ok(())
}

/// Returns the excited population after the step.
fn damping_step<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    gamma: f64,
    p1: f64,
    rng: &mut R,
) -> f64 {
    match sample_branch(gamma, p1, rng) {
        Branch::Jump => {
            state.lower_qubit(qubit, 1.0 / p1.sqrt());
            0.0
        }
        Branch::NoJump => {
            let keep = 1.0 - gamma * p1;
            let inv = 1.0 / keep.sqrt();
            state.scale_halves(qubit, inv, (1.0 - gamma).sqrt() * inv);
            (1.0 - gamma) * p1 / keep
        }
    }
}

/// Kraus pair K0 = diag(1, √(1−λ)), K1 = diag(0, √λ).
pub fn apply_dephasing<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<()> {
    state.check_qubit(qubit)?;
    if lambda <= 0.0 {
        return Ok(());
    }
    let p1 = excited_population(state, qubit);
    dephasing_step(state, qubit, lambda, p1, rng);
    Ok(())
}

fn dephasing_step<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    lambda: f64,
    p1: f64,
    rng: &mut R,
) {
    match sample_branch(lambda, p1, rng) {
        Branch::Jump => state.project_one(qubit, 1.0 / p1.sqrt()),
        Branch::NoJump => {
            let inv = 1.0 / (1.0 - lambda * p1).sqrt();
            state.scale_halves(qubit, inv, (1.0 - lambda).sqrt() * inv);
        }
    }
}

/// Damping followed by dephasing, sharing one population pass and, when
/// neither channel jumps, one scaling pass. Draws the same random numbers
/// in the same order as the two separate calls.
fn apply_thermal<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    gamma: f64,
    lambda: f64,
    rng: &mut R,
) {
    if gamma <= 0.0 && lambda <= 0.0 {
        return;
    }
    let mut p1 = excited_population(state, qubit);
    // pending diagonal Kraus factors for the |0⟩ and |1⟩ halves
    let (mut c0, mut c1) = (1.0, 1.0);
    if gamma > 0.0 {
        match sample_branch(gamma, p1, rng) {
            Branch::Jump => {
                state.lower_qubit(qubit, 1.0 / p1.sqrt());
                p1 = 0.0;
            }
            Branch::NoJump => {
                let keep = 1.0 - gamma * p1;
                let inv = 1.0 / keep.sqrt();
                (c0, c1) = (inv, (1.0 - gamma).sqrt() * inv);
                p1 = (1.0 - gamma) * p1 / keep;
            }
        }
    }
    if lambda > 0.0 {
        match sample_branch(lambda, p1, rng) {
            Branch::Jump => {
                (c0, c1) = (0.0, c1 / p1.sqrt());
            }
            Branch::NoJump => {
                let inv = 1.0 / (1.0 - lambda * p1).sqrt();
                (c0, c1) = (c0 * inv, c1 * (1.0 - lambda).sqrt() * inv);
            }
        }
    }
    if c0 != 1.0 || c1 != 1.0 {
        state.scale_halves(qubit, c0, c1);
    }
}

/// Applies `op` ideally and then the per-qubit noise channels.
pub fn apply_noisy_gate<R: Rng + ?Sized>(
    state: &mut StateVector,
    op: &GateOp,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    op.apply(state)?;
    let cfg = &model.config;
    if !cfg.enabled {
        return Ok(());
    }
    let (depolarizing, duration) = match *op {
        GateOp::Cnot { control, target } => {
            (Some(model.calibration.cx_error(control, target)?), cfg.cx_gate_duration)
        }
        _ => (None, cfg.single_gate_duration),
    };
    for q in op.qubits() {
        let cal = model.calibration.qubit(q)?;
        if cfg.include_depolarizing {
            apply_depolarizing(state, q, depolarizing.unwrap_or(cal.gate_error), rng)?;
        }
        if cfg.include_thermal {
            let gamma = damping_probability(cal.t1, duration)?;
            let lambda = dephasing_probability(cal.t1, cal.t2, duration)?;
            apply_thermal(state, q, gamma, lambda, rng);
        }
    }
    Ok(())
}

/// One noisy run of `circuit` from |0…0⟩.
pub fn run_trajectory<R: Rng + ?Sized>(
    circuit: &Circuit,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.num_qubits())?;
    for op in circuit.ops() {
        apply_noisy_gate(&mut state, op, model, rng)?;
    }
    Ok(state)
}

/// Flips each bit independently with its qubit's readout error.
pub fn apply_readout_error<R: Rng + ?Sized>(
    bits: Bitstring,
    calibration: &CalibrationTable,
    rng: &mut R,
) -> Result<Bitstring> {
    if bits.len() != calibration.num_qubits() {
        return Err(Error::DimensionMismatch { left: bits.len(), right: calibration.num_qubits() });
    }
    let mut out = bits;
    for (q, cal) in calibration.qubits.iter().enumerate() {
        let eps = cal.readout_error;
        if eps > 0.0 && rng.gen::<f64>() < eps {
            out.flip(q);
        }
    }
    Ok(out)
}
