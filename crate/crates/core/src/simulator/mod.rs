//! State-vector execution, Grover traces and search strategies.

pub mod search;
pub mod state;
pub mod trace;

pub use search::{bbht_search, calibrated_search, enumerate_all, Enumeration, SearchConfig, SearchReport};
pub use state::{run_circuit, Real, StateVector, DEFAULT_MAX_QUBITS};
pub use trace::{
    calibrated_depth, grover_trace, grover_trace_with, optimal_iterations, rotation_law, AmplificationTrace, Backend,
    GroverEngine,
};
