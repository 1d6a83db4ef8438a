//! Statevector simulation of Schrödinger-cat-state preparation on
//! constrained qubit topologies, with shot-based estimation of the
//! geometric entanglement between one qubit and the rest of the register.
//!
//! The crate is organized bottom-up:
//!
//! - [`qstate`]: dense statevector, gate kernels, sampling, partial trace.
//! - [`circuit`]: gate list, U3 and axis rotations, coupling maps, cat builders.
//! - [`noise`]: calibration tables and Monte-Carlo trajectory noise.
//! - [`protocol`]: rotate-then-measure Pauli means, entanglement, fidelity, sweeps.
//! - [`oracle`]: dense-matrix reference implementations for cross-checks.
//! - [`experiment`]: configured experiment runs and their CSV/JSON output.
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example <name>`.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod oracle;
pub mod protocol;
pub mod qstate;
pub mod seed;

pub use circuit::{
    axis_rotation_matrix, build_cat_chain, build_cat_on_topology, cat_state, melbourne_coupling,
    u3_matrix, validate_circuit, Axis, CatParams, Circuit, CouplingMap, GateOp,
};
pub use error::{Error, Result};
pub use noise::{CalibrationTable, NoiseConfig, NoiseModel};
pub use protocol::{BlochEstimate, EntanglementResult, Estimator};
pub use qstate::{BlochVector, Bitstring, Matrix2, StateVector};
pub use seed::SeedStream;
