use std::path::PathBuf;
use std::process::ExitCode;

use catent::experiment::{
    self, parse_angle, Command, ExperimentConfig, NoiseSource, OutputFormat, Topology,
};
use catent::noise::NoiseConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "catent", version, about = "Cat-state entanglement experiments on simulated qubit registers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// E(θ) of one qubit over a θ grid
    Sweep(Opts),
    /// E of every register qubit at a fixed θ
    PerQubit(Opts),
    /// Cross-check the simulator against brute-force oracles
    OracleCheck(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Opts {
    /// Register size
    #[arg(long, default_value_t = 15)]
    qubits: usize,
    /// `chain`, `melbourne` or a coupling-map file
    #[arg(long, default_value = "melbourne")]
    topology: String,
    #[arg(long, default_value_t = 6)]
    root: usize,
    /// Physical qubit whose entanglement is swept
    #[arg(long)]
    measure_qubit: Option<usize>,
    #[arg(long, default_value = "0", value_parser = angle)]
    theta_start: f64,
    #[arg(long, default_value = "2pi", value_parser = angle)]
    theta_end: f64,
    #[arg(long, default_value = "pi/20", value_parser = angle)]
    theta_step: f64,
    /// θ of the per-qubit scan
    #[arg(long, default_value = "pi/2", value_parser = angle)]
    theta: f64,
    /// Shots per measurement axis
    #[arg(long, default_value_t = 1024)]
    shots: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `off`, a calibration file, or a calibration name
    #[arg(long, default_value = "off")]
    noise: String,
    /// Exact expectation values instead of shots (noiseless only)
    #[arg(long)]
    exact: bool,
    /// Also report the cat-state fidelity
    #[arg(long)]
    fidelity: bool,
    /// Noisy fidelity trajectories [default: --shots]
    #[arg(long)]
    trajectories: Option<u32>,
    /// Single-qubit gate duration, ns
    #[arg(long, default_value_t = 100.0)]
    gate_time: f64,
    /// CX gate duration, ns
    #[arg(long, default_value_t = 300.0)]
    cx_time: f64,
    #[arg(long)]
    no_thermal: bool,
    #[arg(long)]
    no_depolarizing: bool,
    #[arg(long)]
    no_readout: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn config(command: Command, o: Opts) -> ExperimentConfig {
    ExperimentConfig {
        command,
        num_qubits: o.qubits,
        topology: Topology::parse(&o.topology),
        root_qubit: o.root,
        measure_qubit: o.measure_qubit,
        theta_start: o.theta_start,
        theta_end: o.theta_end,
        theta_step: o.theta_step,
        theta: o.theta,
        shots: o.shots,
        exact: o.exact,
        seed: o.seed,
        noise: NoiseSource::parse(&o.noise),
        noise_config: NoiseConfig {
            single_gate_duration: o.gate_time,
            cx_gate_duration: o.cx_time,
            include_thermal: !o.no_thermal,
            include_depolarizing: !o.no_depolarizing,
            include_readout: !o.no_readout,
            ..NoiseConfig::default()
        },
        fidelity: o.fidelity,
        trajectories: o.trajectories,
        output: o.out,
        format: match o.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
    }
}

fn run(cfg: &ExperimentConfig) -> catent::Result<ExitCode> {
    let out = cfg.output.as_deref();
    match cfg.command {
        Command::Sweep => experiment::emit(&experiment::run_sweep(cfg)?.render(cfg.format)?, out)?,
        Command::PerQubit => {
            experiment::emit(&experiment::run_per_qubit(cfg)?.render(cfg.format)?, out)?
        }
        Command::OracleCheck => {
            let report = experiment::run_oracle_check(cfg)?;
            experiment::emit(&report.render(cfg.format)?, out)?;
            if !report.passed {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match cli.command {
        Cmd::Sweep(o) => config(Command::Sweep, o),
        Cmd::PerQubit(o) => config(Command::PerQubit, o),
        Cmd::OracleCheck(o) => config(Command::OracleCheck, o),
    };
    run(&cfg).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
