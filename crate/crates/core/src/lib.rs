//! Compiler and simulator for bounded Diophantine systems.
//!
//! Systems are parsed into exact polynomials ([`poly`]), laid out on qubit
//! registers ([`encoding`]), compiled to reversible gate lists ([`arith`],
//! [`oracle`]) and executed either classically or on a state vector
//! ([`simulator`]). [`resources`] prices circuits in Toffoli equivalents.

pub mod arith;
pub mod circuit;
pub mod encoding;
pub mod error;
pub mod oracle;
pub mod poly;

pub use circuit::{BitString, Circuit, Control, Gate, GateKind};
pub use encoding::{plan_registers, RegisterPlan, Span};
pub use error::{Error, ParseErrorKind, Result};
pub use oracle::{augment_exclude, synth_grover_iteration, OracleBundle};
pub use poly::{brute_force_solve, parse_system, Assignment, DiophantineSystem, Monomial, Polynomial};
pub mod resources;
pub mod simulator;

/// Double-precision state vector.
pub type StateVector = simulator::StateVector<f64>;
/// Double-precision amplification trace.
pub type AmplificationTrace = simulator::AmplificationTrace<f64>;
