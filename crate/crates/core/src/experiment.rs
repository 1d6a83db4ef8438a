//! Configured experiment runs: θ sweeps, per-qubit scans and the oracle
//! self-check, with CSV or JSON output carrying a provenance header.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    build_cat_chain, build_cat_on_topology, cat_state, melbourne_coupling, CatParams, CouplingMap,
};
use crate::error::{Error, Result};
use crate::noise::{CalibrationTable, NoiseConfig, NoiseModel, MELBOURNE_CALIBRATION_NAME};
use crate::oracle;
use crate::protocol::{
    cat_entanglement_theory, exact_pauli_mean, fidelity_exact, per_qubit_entanglement_for,
    sweep_theta, theta_grid, BuildMode, EntanglementResult, Estimator, FidelityRequest, SweepSpec,
};
use crate::seed::SeedStream;

/// Directory searched for calibration files named on the command line.
pub const CALIBRATION_DIR_ENV: &str = "CATENT_CALIBRATION_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sweep,
    PerQubit,
    OracleCheck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Chain,
    Melbourne,
    File(PathBuf),
}

impl Topology {
    pub fn parse(s: &str) -> Topology {
        match s {
            "chain" => Topology::Chain,
            "melbourne" => Topology::Melbourne,
            path => Topology::File(PathBuf::from(path)),
        }
    }

    fn label(&self) -> String {
        match self {
            Topology::Chain => "chain".into(),
            Topology::Melbourne => "melbourne".into(),
            Topology::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoiseSource {
    Off,
    /// A file path, a file name inside the calibration directory, or the
    /// bundled table's name.
    Calibration(String),
}

impl NoiseSource {
    pub fn parse(s: &str) -> NoiseSource {
        if s == "off" {
            NoiseSource::Off
        } else {
            NoiseSource::Calibration(s.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub num_qubits: usize,
    pub topology: Topology,
    pub root_qubit: usize,
    /// Physical index; `None` picks qubit 6 when it is in the register and
    /// the cat root otherwise.
    pub measure_qubit: Option<usize>,
    pub theta_start: f64,
    pub theta_end: f64,
    pub theta_step: f64,
    /// θ of the per-qubit scan.
    pub theta: f64,
    pub shots: u32,
    pub exact: bool,
    pub seed: u64,
    pub noise: NoiseSource,
    pub noise_config: NoiseConfig,
    pub fidelity: bool,
    /// Fidelity trajectories under noise; defaults to `shots`.
    pub trajectories: Option<u32>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::Sweep,
            num_qubits: 15,
            topology: Topology::Melbourne,
            root_qubit: 6,
            measure_qubit: None,
            theta_start: 0.0,
            theta_end: TAU,
            theta_step: PI / 20.0,
            theta: FRAC_PI_2,
            shots: 1024,
            exact: false,
            seed: 0,
            noise: NoiseSource::Off,
            noise_config: NoiseConfig::default(),
            fidelity: false,
            trajectories: None,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Parses an angle in radians: a plain number or an expression in `pi`
/// such as `pi/20`, `2pi`, `2*pi`, `-3*pi/4`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::InvalidArgument(format!("cannot parse angle `{s}`"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t.as_str(), None),
    };
    let numerator = match num.find("pi") {
        Some(pos) if pos + 2 == num.len() => {
            let coef = num[..pos].trim_end_matches('*');
            let coef = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            coef * PI
        }
        _ => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            numerator / d
        }
        None => numerator,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Resolves a calibration argument to a table and the label recorded in
/// output headers.
pub fn load_calibration(name: &str, search_dir: Option<&Path>) -> Result<(CalibrationTable, String)> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Ok((CalibrationTable::load(direct)?, direct.display().to_string()));
    }
    if let Some(dir) = search_dir {
        for candidate in [dir.join(name), dir.join(format!("{name}.cal"))] {
            if candidate.is_file() {
                return Ok((CalibrationTable::load(&candidate)?, candidate.display().to_string()));
            }
        }
    }
    if name == MELBOURNE_CALIBRATION_NAME {
        return Ok((CalibrationTable::melbourne(), format!("bundled:{name}")));
    }
    Err(Error::Io(format!("calibration `{name}` not found")))
}

/// The qubits an experiment runs on, relabelled `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub build: BuildMode,
    pub coupling: CouplingMap,
    /// Logical root of the cat circuit.
    pub root: usize,
    /// `physical[i]` is the device qubit behind logical qubit `i`.
    pub physical: Vec<usize>,
}

impl Layout {
    pub fn chain(num_qubits: usize) -> Self {
        Layout {
            build: BuildMode::Chain,
            coupling: CouplingMap::line(num_qubits),
            root: 0,
            physical: (0..num_qubits).collect(),
        }
    }

    /// The first `num_qubits` device qubits reached breadth-first from
    /// `root`, or the whole device when sizes match.
    pub fn on_device(device: &CouplingMap, root: usize, num_qubits: usize) -> Result<Self> {
        let (coupling, physical) = device.bfs_subgraph(root, num_qubits)?;
        let root = physical.iter().position(|&p| p == root).expect("root is in its own subgraph");
        Ok(Layout {
            build: BuildMode::Topology { coupling: coupling.clone(), root },
            coupling,
            root,
            physical,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.physical.len()
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.physical.iter().position(|&p| p == physical)
    }
}

/// Everything resolved from a config before any simulation runs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub layout: Layout,
    pub measure_logical: usize,
    pub noise: Option<NoiseModel>,
    pub noise_label: String,
    pub estimator: Estimator,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let layout = match &config.topology {
        Topology::Chain => Layout::chain(config.num_qubits),
        Topology::Melbourne => Layout::on_device(&melbourne_coupling(), config.root_qubit, config.num_qubits)?,
        Topology::File(path) => {
            let device = CouplingMap::from_text(&std::fs::read_to_string(path)?)?;
            Layout::on_device(&device, config.root_qubit, config.num_qubits)?
        }
    };
    let measure_physical = config
        .measure_qubit
        .unwrap_or(if layout.logical(6).is_some() { 6 } else { layout.physical[layout.root] });
    let measure_logical = layout.logical(measure_physical).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "measure qubit {measure_physical} is not in the register {:?}",
            layout.physical
        ))
    })?;

    let (noise, noise_label) = match &config.noise {
        NoiseSource::Off => (None, "off".to_string()),
        NoiseSource::Calibration(name) => {
            config.noise_config.validate()?;
            let dir = std::env::var_os(CALIBRATION_DIR_ENV).map(PathBuf::from);
            let (table, label) = load_calibration(name, dir.as_deref())?;
            let table = table.restrict(&layout.physical)?;
            (Some(NoiseModel::new(table, config.noise_config)), label)
        }
    };
    let estimator = if config.exact {
        if noise.as_ref().is_some_and(|m| m.is_active()) {
            return Err(Error::InvalidArgument("--exact cannot be combined with noise".into()));
        }
        Estimator::Exact
    } else {
        if config.shots == 0 {
            return Err(Error::InvalidArgument("shots must be ≥ 1".into()));
        }
        Estimator::Shots(config.shots)
    };
    Ok(Prepared { layout, measure_logical, noise, noise_label, estimator })
}

/// Provenance recorded at the top of every result file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub artifact: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub mode: String,
    pub shots_per_axis: Option<u32>,
    pub num_qubits: usize,
    pub topology: String,
    pub physical_qubits: Vec<usize>,
    pub root_qubit: usize,
    pub measure_qubit: Option<usize>,
    pub theta_start: f64,
    pub theta_end: f64,
    pub theta_step: f64,
    pub theta: Option<f64>,
    pub noise: String,
    pub single_gate_duration_ns: f64,
    pub cx_gate_duration_ns: f64,
    pub include_thermal: bool,
    pub include_depolarizing: bool,
    pub include_readout: bool,
    pub fidelity_trajectories: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit: Option<usize>,
    pub theta_rad: f64,
    pub e_measured: f64,
    pub e_theory: Option<f64>,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub stderr_x: f64,
    pub stderr_y: f64,
    pub stderr_z: f64,
    pub fidelity: Option<f64>,
    pub fidelity_stderr: Option<f64>,
}

impl Row {
    fn from_result(qubit: Option<usize>, theta: f64, r: &EntanglementResult) -> Row {
        Row {
            qubit,
            theta_rad: theta,
            e_measured: r.e_measured,
            e_theory: r.e_theory,
            sx: r.bloch.sx,
            sy: r.bloch.sy,
            sz: r.bloch.sz,
            stderr_x: r.bloch.stderr_x,
            stderr_y: r.bloch.stderr_y,
            stderr_z: r.bloch.stderr_z,
            fidelity: r.fidelity.map(|f| f.mean),
            fidelity_stderr: r.fidelity.map(|f| f.stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultFile {
    pub header: Header,
    pub rows: Vec<Row>,
}

impl ResultFile {
    /// CSV with the header as leading `# key: value` comment lines.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let header = serde_json::to_value(&self.header).map_err(|e| Error::Io(e.to_string()))?;
        if let serde_json::Value::Object(map) = header {
            for (k, v) in map {
                out.push_str(&format!("# {k}: {v}\n"));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let with_qubit = self.header.command == Command::PerQubit;
        let mut columns = vec![
            "theta_rad", "e_measured", "e_theory", "sx", "sy", "sz", "stderr_x", "stderr_y",
            "stderr_z", "fidelity", "fidelity_stderr",
        ];
        if with_qubit {
            columns.insert(0, "qubit");
        }
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&columns).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.theta_rad.to_string(),
                r.e_measured.to_string(),
                opt(r.e_theory),
                r.sx.to_string(),
                r.sy.to_string(),
                r.sz.to_string(),
                r.stderr_x.to_string(),
                r.stderr_y.to_string(),
                r.stderr_z.to_string(),
                opt(r.fidelity),
                opt(r.fidelity_stderr),
            ];
            if with_qubit {
                rec.insert(0, r.qubit.map(|q| q.to_string()).unwrap_or_default());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn header(config: &ExperimentConfig, prepared: &Prepared, theta: Option<f64>) -> Header {
    let noisy = prepared.noise.as_ref().is_some_and(|m| m.is_active());
    let trajectories = (config.fidelity && noisy).then(|| config.trajectories.unwrap_or(config.shots));
    let cfg = prepared.noise.as_ref().map(|m| m.config).unwrap_or(config.noise_config);
    Header {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: config.command,
        seed: config.seed,
        mode: match prepared.estimator {
            Estimator::Exact => "exact".into(),
            Estimator::Shots(_) => "shots".into(),
        },
        shots_per_axis: prepared.estimator.shots(),
        num_qubits: prepared.layout.num_qubits(),
        topology: config.topology.label(),
        physical_qubits: prepared.layout.physical.clone(),
        root_qubit: prepared.layout.physical[prepared.layout.root],
        measure_qubit: (config.command == Command::Sweep)
            .then(|| prepared.layout.physical[prepared.measure_logical]),
        theta_start: config.theta_start,
        theta_end: config.theta_end,
        theta_step: config.theta_step,
        theta,
        noise: prepared.noise_label.clone(),
        single_gate_duration_ns: cfg.single_gate_duration,
        cx_gate_duration_ns: cfg.cx_gate_duration,
        include_thermal: cfg.include_thermal,
        include_depolarizing: cfg.include_depolarizing,
        include_readout: cfg.include_readout,
        fidelity_trajectories: trajectories,
    }
}

/// θ sweep of the measured qubit's entanglement (and optionally fidelity).
pub fn run_sweep(config: &ExperimentConfig) -> Result<ResultFile> {
    let prepared = prepare(config)?;
    let thetas = theta_grid(config.theta_start, config.theta_end, config.theta_step)?;
    let spec = SweepSpec {
        num_qubits: prepared.layout.num_qubits(),
        build: prepared.layout.build.clone(),
        measure_qubit: prepared.measure_logical,
        thetas: thetas.clone(),
        estimator: prepared.estimator,
        noise: prepared.noise.clone(),
        fidelity: config.fidelity.then(|| FidelityRequest {
            trajectories: config.trajectories.unwrap_or(config.shots),
        }),
    };
    let results = sweep_theta(&spec, SeedStream::new(config.seed))?;
    let rows = thetas.iter().zip(&results).map(|(&t, r)| Row::from_result(None, t, r)).collect();
    Ok(ResultFile { header: header(config, &prepared, None), rows })
}

/// Entanglement of every register qubit at a fixed θ. Rows are keyed by
/// physical qubit index.
pub fn run_per_qubit(config: &ExperimentConfig) -> Result<ResultFile> {
    let prepared = prepare(config)?;
    let layout = &prepared.layout;
    let qubits: Vec<usize> = (0..layout.num_qubits()).collect();
    let results = per_qubit_entanglement_for(
        &layout.coupling,
        layout.root,
        config.theta,
        &qubits,
        prepared.estimator,
        prepared.noise.as_ref(),
        SeedStream::new(config.seed),
    )?;
    let rows = results
        .iter()
        .map(|(q, r)| Row::from_result(Some(layout.physical[*q]), config.theta, r))
        .collect();
    Ok(ResultFile { header: header(config, &prepared, Some(config.theta)), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub checks: Vec<OracleCheck>,
    pub passed: bool,
}

impl OracleReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("# oracle-check seed={}\n", self.seed);
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} cases={} max_deviation={:e} tolerance={:e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_deviation,
                c.tolerance
            ));
        }
        out.push_str(if self.passed { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_text()),
            OutputFormat::Json => serde_json::to_string_pretty(self)
                .map(|s| s + "\n")
                .map_err(|e| Error::Io(e.to_string())),
        }
    }
}

fn check(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> OracleCheck {
    OracleCheck {
        name: name.into(),
        cases,
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    }
}

/// Compares the protocol and kernels against brute-force oracles on
/// seeded random circuits, and the exact sweep against the closed form.
pub fn run_oracle_check(config: &ExperimentConfig) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let circuits: Vec<_> = (0..200).map(|_| oracle::random_circuit(&mut rng, 5, 20)).collect();

    let mut kernel_dev: f64 = 0.0;
    let mut trace_dev: f64 = 0.0;
    let mut dense_obs_dev: f64 = 0.0;
    for c in &circuits {
        let state = c.run()?;
        let dense = oracle::dense_execute(c);
        for (a, b) in state.amplitudes().iter().zip(&dense) {
            kernel_dev = kernel_dev.max((a - b).norm());
        }
        for q in 0..c.num_qubits() {
            let bloch = state.reduced_bloch_vector(q)?;
            for (axis, oracle_value) in
                crate::circuit::Axis::ALL.into_iter().zip([bloch.sx, bloch.sy, bloch.sz])
            {
                let m = exact_pauli_mean(&state, q, axis)?;
                trace_dev = trace_dev.max((m - oracle_value).abs());
                dense_obs_dev =
                    dense_obs_dev.max((oracle_value - oracle::dense_expectation(&state, q, axis)).abs());
            }
        }
    }

    let thetas = theta_grid(0.0, TAU, PI / 20.0)?;
    let mut grid_checks = Vec::new();
    for n in [2usize, 5, 10, 15] {
        let build = if n == 15 {
            BuildMode::Topology { coupling: melbourne_coupling(), root: 6 }
        } else {
            BuildMode::Chain
        };
        let spec = SweepSpec {
            num_qubits: n,
            build,
            measure_qubit: n / 2,
            thetas: thetas.clone(),
            estimator: Estimator::Exact,
            noise: None,
            fidelity: None,
        };
        let results = sweep_theta(&spec, SeedStream::new(config.seed))?;
        let dev = thetas
            .iter()
            .zip(&results)
            .map(|(&t, r)| (r.e_measured - cat_entanglement_theory(t)).abs())
            .fold(0.0, f64::max);
        grid_checks.push(check(&format!("closed-form-sweep-n{n}"), thetas.len(), dev, 1e-12));
    }

    let mut fid_dev: f64 = 0.0;
    for &t in &thetas {
        let p = CatParams::new(t);
        for circuit in [
            build_cat_chain(15, p)?,
            build_cat_on_topology(&melbourne_coupling(), 6, p)?,
        ] {
            let f = fidelity_exact(&cat_state(15, p)?, &circuit.run()?)?;
            fid_dev = fid_dev.max((f - 1.0).abs());
        }
    }

    let mut checks = vec![
        check("kernel-vs-dense-matrix", circuits.len(), kernel_dev, 1e-9),
        check("protocol-vs-partial-trace", circuits.len(), trace_dev, 1e-10),
        check("partial-trace-vs-dense-observable", circuits.len(), dense_obs_dev, 1e-10),
    ];
    checks.extend(grid_checks);
    checks.push(check("cat-fidelity-identity-n15", 2 * thetas.len(), fid_dev, 1e-12));
    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleReport { seed: config.seed, checks, passed })
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        let close = |s: &str, v: f64| assert!((parse_angle(s).unwrap() - v).abs() < 1e-15, "{s}");
        close("pi/20", PI / 20.0);
        close("2pi", TAU);
        close("2*pi", TAU);
        close("-pi/2", -FRAC_PI_2);
        close("-3*pi/4", -0.75 * PI);
        close("PI", PI);
        close("0.25", 0.25);
        close("1/4", 0.25);
        for bad in ["", "pie", "pi/0", "two pi", "pi*2", "nan"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn default_measure_qubit() {
        let cfg = ExperimentConfig { num_qubits: 5, ..Default::default() };
        let p = prepare(&cfg).unwrap();
        assert_eq!(p.layout.physical, vec![4, 5, 6, 8, 9]);
        assert_eq!(p.layout.physical[p.measure_logical], 6);

        let cfg = ExperimentConfig { num_qubits: 5, topology: Topology::Chain, ..Default::default() };
        let p = prepare(&cfg).unwrap();
        assert_eq!(p.measure_logical, 0);

        let cfg = ExperimentConfig {
            num_qubits: 5,
            topology: Topology::Chain,
            measure_qubit: Some(6),
            ..Default::default()
        };
        assert!(prepare(&cfg).is_err());
    }

    #[test]
    fn calibration_resolution() {
        let (t, label) = load_calibration(MELBOURNE_CALIBRATION_NAME, None).unwrap();
        assert_eq!(t.num_qubits(), 15);
        assert_eq!(label, "bundled:melbourne-20200404");
        assert!(load_calibration("no-such-table", None).is_err());

        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("tiny.cal"),
            "qubits 1\nq0 t1=10 t2=10 gate_err=0 readout_err=0\n",
        )
        .unwrap();
        let (t, _) = load_calibration("tiny", Some(dir.path())).unwrap();
        assert_eq!(t.num_qubits(), 1);
    }

    #[test]
    fn exact_with_noise_is_rejected() {
        let cfg = ExperimentConfig {
            exact: true,
            noise: NoiseSource::Calibration(MELBOURNE_CALIBRATION_NAME.into()),
            ..Default::default()
        };
        assert!(prepare(&cfg).is_err());
    }
}
