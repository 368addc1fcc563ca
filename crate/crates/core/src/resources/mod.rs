//! Toffoli-equivalent pricing, the closed-form qubit model, random instances
//! and scaling sweeps.

pub mod cost;
pub mod fit;
pub mod instance;
pub mod model;
pub mod sweep;

pub use cost::{mcx_cost, t_cost, toffoli_equiv_cost, CostReport, InstanceDescriptor, Rational};
pub use fit::{fit_linear, fit_loglog, LinearFit};
pub use instance::{random_instance, InstanceParams};
pub use model::{model_discrepancy, qubit_count_model, qubit_regressor, QubitModel, ANCILLA_CONSTANT};
pub use sweep::{evaluate_instance, sweep_and_fit, SweepConfig, SweepOutcome, SweepRow};
