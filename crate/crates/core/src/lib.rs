//! Statevector simulation of multi-receiver quantum energy teleportation
//! over W-state entanglement.
//!
//! The crate is layered bottom-up:
//!
//! - [`state`], [`gate`], [`circuit`]: dense statevector, instruction set with
//!   mid-circuit measurement and classically conditioned gates.
//! - [`builder`]: W-state distribution (linear and log-depth), the weighted
//!   vacuum/W initial state, and GHZ.
//! - [`observables`]: local number-operator Hamiltonians, injected energy,
//!   exact and shot-count estimators.
//! - [`protocol`]: inject, feed forward, harvest; sampled and exact ledgers.
//! - [`oracle`]: exhaustive branch enumeration, reduced states, two-qubit
//!   entanglement witness.
//! - [`symmetry`], [`reference`], [`report`]: receiver-symmetry checks,
//!   comparison with the bundled tables, CSV/JSON output.
//!
//! ```
//! use qet_core::{run_protocol_exact, ModelParams, ProtocolConfig};
//!
//! let cfg = ProtocolConfig::new(ModelParams::new(3, 1.0, 1.0).unwrap());
//! let ledger = run_protocol_exact(&cfg).unwrap();
//! assert!((ledger.h_sub[0].mean - 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod builder;
pub mod circuit;
pub mod error;
pub mod gate;
pub mod observables;
pub mod oracle;
pub mod pauli;
pub mod protocol;
pub mod reference;
pub mod report;
pub mod rng;
pub mod state;
pub mod symmetry;

/// Largest supported register.
pub const MAX_QUBITS: usize = 24;
/// Unitarity and norm tolerance.
pub const UNITARY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
/// Probability sums and exact-mode equalities.
pub const PROB_SUM_TOL: f64 = 1e-12;
pub const EXACT_TOL: f64 = 1e-12;
/// Branches below this probability are treated as impossible.
pub const PRUNE_PROB: f64 = 1e-14;

pub use builder::{build_ghz, build_initial_state, build_w_distribution, PrepStrategy};
pub use circuit::{run_circuit, Circuit};
pub use error::{QetError, Result};
pub use gate::{Basis, GateOp, Matrix2};
pub use observables::{
    e0, estimate_from_counts, exact_expectation, Counts, E0Convention, Estimate, ModelParams, ObservableKind,
    ObservableSpec,
};
pub use oracle::{
    entanglement_witness, enumerate_branches, exact_averaged_expectation, reduced_state, BranchDistribution,
    ReducedState, Witness,
};
pub use pauli::{Pauli, PauliString};
pub use protocol::{
    feedforward, harvest, inject, run_protocol, run_protocol_exact, EnergyLedger, ProtocolConfig, ShotRecord,
};
pub use reference::{compare_reference, DeviationTable, ReferenceDataset, Source};
pub use report::{emit_tables, reproduce_all, run_experiment, ExperimentReport, ReportSet, RunMode};
pub use rng::RngStream;
pub use state::{ClassicalRecord, QuantumState, Sign};
pub use symmetry::{exchange_test, translational_test, EvalMode, SymmetryReport};
