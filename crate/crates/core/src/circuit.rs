//! Gate list, device coupling maps and the cat-state builders.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{Matrix2, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn pauli(self) -> Matrix2 {
        match self {
            Axis::X => Matrix2::PAULI_X,
            Axis::Y => Matrix2::PAULI_Y,
            Axis::Z => Matrix2::PAULI_Z,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Axis> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis `{other}`"))),
        }
    }
}

/// U3(θ, φ, λ) = [[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(λ+φ)} cos θ/2]].
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Result<Matrix2> {
    if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) {
        return Err(Error::NonFinite("U3 angles"));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    Ok(Matrix2::new(
        Complex64::new(c, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(c, lambda + phi),
    ))
}

/// exp(+i·angle/2·σ_axis) = cos(angle/2)·I + i·sin(angle/2)·σ_axis.
pub fn axis_rotation_matrix(axis: Axis, angle: f64) -> Result<Matrix2> {
    if !angle.is_finite() {
        return Err(Error::NonFinite("rotation angle"));
    }
    let (s, c) = (angle / 2.0).sin_cos();
    let p = axis.pauli().0;
    let i_s = Complex64::new(0.0, s);
    let id = Matrix2::IDENTITY.0;
    Ok(Matrix2([
        id[0] * c + p[0] * i_s,
        id[1] * c + p[1] * i_s,
        id[2] * c + p[2] * i_s,
        id[3] * c + p[3] * i_s,
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    U3 { qubit: usize, theta: f64, phi: f64, lambda: f64 },
    Cnot { control: usize, target: usize },
    Rotation { axis: Axis, qubit: usize, angle: f64 },
}

impl GateOp {
    /// Qubits the op touches, control first for CNOT.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::U3 { qubit, .. } | GateOp::Rotation { qubit, .. } => vec![qubit],
            GateOp::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Cnot { .. })
    }

    /// 2x2 matrix of a single-qubit op, `None` for CNOT.
    pub fn matrix(&self) -> Result<Option<Matrix2>> {
        match *self {
            GateOp::U3 { theta, phi, lambda, .. } => u3_matrix(theta, phi, lambda).map(Some),
            GateOp::Rotation { axis, angle, .. } => axis_rotation_matrix(axis, angle).map(Some),
            GateOp::Cnot { .. } => Ok(None),
        }
    }

    /// Applies the ideal gate.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            GateOp::Cnot { control, target } => state.apply_cnot(control, target),
            GateOp::U3 { qubit, .. } | GateOp::Rotation { qubit, .. } => {
                let m = self.matrix()?.expect("single-qubit op");
                state.apply_single(qubit, &m)
            }
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        match *self {
            GateOp::Cnot { control, target } if control == target => Err(Error::SameQubit(control)),
            GateOp::U3 { theta, phi, lambda, .. }
                if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) =>
            {
                Err(Error::NonFinite("U3 angles"))
            }
            GateOp::Rotation { angle, .. } if !angle.is_finite() => {
                Err(Error::NonFinite("rotation angle"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateOp::U3 { qubit, theta, phi, lambda } => {
                write!(f, "u3 {qubit} {theta:?} {phi:?} {lambda:?}")
            }
            GateOp::Cnot { control, target } => write!(f, "cx {control} {target}"),
            GateOp::Rotation { axis, qubit, angle } => write!(f, "r {axis} {qubit} {angle:?}"),
        }
    }
}

/// Cat-state parameters. φ and λ default to zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CatParams {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl CatParams {
    pub fn new(theta: f64) -> Self {
        CatParams { theta, phi: 0.0, lambda: 0.0 }
    }

    pub fn with_phase(theta: f64, phi: f64, lambda: f64) -> Self {
        CatParams { theta, phi, lambda }
    }

    fn check(&self) -> Result<()> {
        if self.theta.is_finite() && self.phi.is_finite() && self.lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("cat parameters"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
    cat: Option<CatParams>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, ops: Vec::new(), cat: None }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    /// Parameters of the cat state this circuit prepares, when it came from
    /// one of the cat builders and has not been modified since.
    pub fn cat_params(&self) -> Option<CatParams> {
        self.cat
    }

    /// Appends an op. Clears the cat tag.
    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        self.cat = None;
        Ok(())
    }

    /// Appends an op and keeps the cat tag, for measurement-basis changes
    /// that follow state preparation.
    pub(crate) fn push_measurement_rotation(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_two_qubit()).count()
    }

    /// Runs every op in order on `initial`.
    pub fn execute(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits,
                right: initial.num_qubits(),
            });
        }
        let mut state = initial.clone();
        for op in &self.ops {
            op.apply(&mut state)?;
        }
        Ok(state)
    }

    /// Runs the circuit on |0…0⟩.
    pub fn run(&self) -> Result<StateVector> {
        self.execute(&StateVector::zero(self.num_qubits)?)
    }

    /// Line-oriented text form: `qubits N` then one op per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for op in &self.ops {
            out.push_str(&op.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some(c) = circuit.as_mut() else {
                circuit = Some(Circuit::new(parse_qubits_header(&fields).map_err(err)?));
                continue;
            };
            let op = match fields.as_slice() {
                ["u3", q, t, p, l] => GateOp::U3 {
                    qubit: parse_field(q).map_err(err)?,
                    theta: parse_field(t).map_err(err)?,
                    phi: parse_field(p).map_err(err)?,
                    lambda: parse_field(l).map_err(err)?,
                },
                ["cx", ctl, tgt] => GateOp::Cnot {
                    control: parse_field(ctl).map_err(err)?,
                    target: parse_field(tgt).map_err(err)?,
                },
                ["r", a, q, angle] => GateOp::Rotation {
                    axis: a.parse().map_err(|e: Error| err(e.to_string()))?,
                    qubit: parse_field(q).map_err(err)?,
                    angle: parse_field(angle).map_err(err)?,
                },
                _ => return Err(err(format!("unrecognized op `{line}`"))),
            };
            c.push(op).map_err(|e| err(e.to_string()))?;
        }
        circuit.ok_or(Error::Parse { line: 0, msg: "missing `qubits N` header".into() })
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_field<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("malformed number `{s}`"))
}

fn parse_qubits_header(fields: &[&str]) -> std::result::Result<usize, String> {
    match fields {
        ["qubits", n] => parse_field(n),
        _ => Err(format!("expected `qubits N` header, found `{}`", fields.join(" "))),
    }
}

/// Undirected graph of qubit pairs that support a native CNOT in either
/// direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CouplingMap {
    pub fn new(num_qubits: usize) -> Self {
        CouplingMap { num_qubits, edges: BTreeSet::new() }
    }

    pub fn from_edges(num_qubits: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut map = CouplingMap::new(num_qubits);
        for &(a, b) in edges {
            map.add_edge(a, b)?;
        }
        Ok(map)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b || a >= self.num_qubits || b >= self.num_qubits {
            return Err(Error::InvalidEdge(a, b));
        }
        self.edges.insert(ordered(a, b));
        Ok(())
    }

    /// Path 0–1–…–(n−1).
    pub fn line(num_qubits: usize) -> Self {
        let mut map = CouplingMap::new(num_qubits);
        for q in 1..num_qubits {
            map.edges.insert((q - 1, q));
        }
        map
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&ordered(a, b))
    }

    /// Neighbors of `q` in ascending order.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors(q).len()
    }

    /// Breadth-first visiting order from `root`, neighbors in ascending
    /// index order, each entry paired with its parent.
    pub fn bfs_tree(&self, root: usize) -> Result<Vec<(usize, Option<usize>)>> {
        if root >= self.num_qubits {
            return Err(Error::QubitOutOfRange { qubit: root, num_qubits: self.num_qubits });
        }
        let mut seen = vec![false; self.num_qubits];
        let mut order = Vec::with_capacity(self.num_qubits);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        order.push((root, None));
        while let Some(q) = queue.pop_front() {
            for n in self.neighbors(q) {
                if !seen[n] {
                    seen[n] = true;
                    order.push((n, Some(q)));
                    queue.push_back(n);
                }
            }
        }
        Ok(order)
    }

    /// Qubits not reachable from `root`.
    pub fn unreachable_from(&self, root: usize) -> Result<Vec<usize>> {
        let order = self.bfs_tree(root)?;
        let mut seen = vec![false; self.num_qubits];
        order.iter().for_each(|&(q, _)| seen[q] = true);
        Ok((0..self.num_qubits).filter(|&q| !seen[q]).collect())
    }

    /// Restricts the map to the first `size` qubits reached breadth-first
    /// from `root` and relabels them `0..size` in ascending physical order.
    /// Returns the induced map and the logical-to-physical index table.
    pub fn bfs_subgraph(&self, root: usize, size: usize) -> Result<(CouplingMap, Vec<usize>)> {
        let order = self.bfs_tree(root)?;
        if size == 0 || size > order.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {size} connected qubits from root {root} ({} reachable)",
                order.len()
            )));
        }
        let mut physical: Vec<usize> = order.iter().take(size).map(|&(q, _)| q).collect();
        physical.sort_unstable();
        let logical = |p: usize| physical.binary_search(&p).ok();
        let mut sub = CouplingMap::new(size);
        for (a, b) in self.edges() {
            if let (Some(la), Some(lb)) = (logical(a), logical(b)) {
                sub.edges.insert(ordered(la, lb));
            }
        }
        Ok((sub, physical))
    }

    /// Text form: `qubits N` header then one `i j` edge per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for (a, b) in self.edges() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CouplingMap> {
        let mut map: Option<CouplingMap> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let Some(m) = map.as_mut() else {
                map = Some(CouplingMap::new(parse_qubits_header(&fields).map_err(err)?));
                continue;
            };
            match fields.as_slice() {
                [a, b] => {
                    let (a, b) = (parse_field(a).map_err(err)?, parse_field(b).map_err(err)?);
                    m.add_edge(a, b).map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("expected `i j`, found `{line}`"))),
            }
        }
        map.ok_or(Error::Parse { line: 0, msg: "missing `qubits N` header".into() })
    }
}

/// The 15-qubit ibmq-melbourne CX graph (20 edges).
pub fn melbourne_coupling() -> CouplingMap {
    const EDGES: [(usize, usize); 20] = [
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 5),
        (5, 6),
        (6, 8),
        (7, 8),
        (8, 9),
        (9, 10),
        (10, 11),
        (11, 12),
        (12, 13),
        (13, 14),
        (0, 14),
        (1, 13),
        (2, 12),
        (3, 11),
        (4, 10),
        (5, 9),
    ];
    CouplingMap::from_edges(15, &EDGES).expect("static edge list is valid")
}

/// U3 on qubit 0 followed by the CNOT ladder 0→1→…→N−1.
pub fn build_cat_chain(num_qubits: usize, params: CatParams) -> Result<Circuit> {
    if num_qubits < 1 {
        return Err(Error::RegisterSize(num_qubits));
    }
    build_cat_on_topology(&CouplingMap::line(num_qubits), 0, params)
}

/// U3 on `root`, then one CNOT per breadth-first tree edge with the parent
/// as control.
pub fn build_cat_on_topology(
    coupling: &CouplingMap,
    root: usize,
    params: CatParams,
) -> Result<Circuit> {
    params.check()?;
    let unreachable = coupling.unreachable_from(root)?;
    if !unreachable.is_empty() {
        return Err(Error::Disconnected(unreachable));
    }
    let mut circuit = Circuit::new(coupling.num_qubits());
    circuit.push(GateOp::U3 {
        qubit: root,
        theta: params.theta,
        phi: params.phi,
        lambda: params.lambda,
    })?;
    for (child, parent) in coupling.bfs_tree(root)? {
        if let Some(parent) = parent {
            circuit.push(GateOp::Cnot { control: parent, target: child })?;
        }
    }
    circuit.cat = Some(params);
    Ok(circuit)
}

/// cos(θ/2)|0…0⟩ + e^{iφ} sin(θ/2)|1…1⟩, built directly from amplitudes.
pub fn cat_state(num_qubits: usize, params: CatParams) -> Result<StateVector> {
    params.check()?;
    let mut s = StateVector::zero(num_qubits)?;
    let (sin, cos) = (params.theta / 2.0).sin_cos();
    let last = (1usize << num_qubits) - 1;
    let amps = s.amplitudes_mut();
    amps[0] = Complex64::new(cos, 0.0);
    amps[last] = Complex64::from_polar(sin, params.phi);
    Ok(s)
}

/// One offending CNOT found by [`validate_circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub op_index: usize,
    pub control: usize,
    pub target: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op {}: cx {} {} is not a coupling edge", self.op_index, self.control, self.target)
    }
}

/// Lists every CNOT whose qubit pair is not an edge of `coupling`. The
/// outer error is reserved for a register-size mismatch.
pub fn validate_circuit(
    circuit: &Circuit,
    coupling: &CouplingMap,
) -> Result<std::result::Result<(), Vec<Violation>>> {
    if circuit.num_qubits() != coupling.num_qubits() {
        return Err(Error::DimensionMismatch {
            left: circuit.num_qubits(),
            right: coupling.num_qubits(),
        });
    }
    let violations: Vec<Violation> = circuit
        .ops()
        .iter()
        .enumerate()
        .filter_map(|(i, op)| match *op {
            GateOp::Cnot { control, target } if !coupling.contains(control, target) => {
                Some(Violation { op_index: i, control, target })
            }
            _ => None,
        })
        .collect();
    Ok(if violations.is_empty() { Ok(()) } else { Err(violations) })
}
