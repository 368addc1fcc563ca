use crate::encoding::{accumulator_term, counter_width, RegisterPlan, FIXED_ANCILLAS, SIGN_HEADROOM};
use crate::poly::DiophantineSystem;

/// Qubits the layout holds beyond the closed form and the extension scratch:
/// the accumulator sign bit, the carry and the squaring ancilla.
pub const ANCILLA_CONSTANT: usize = SIGN_HEADROOM + FIXED_ANCILLAS;

/// Term-by-term closed-form qubit count
/// `n log2 N + max_j ceil(log2 sum |c| N^|a|) + sum_{l=2}^{d-1} l log2 N + ceil(log2(2m+1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitModel {
    pub system: usize,
    pub accumulator: usize,
    pub workspace: usize,
    pub counter: usize,
}

impl QubitModel {
    pub fn total(&self) -> usize {
        self.system + self.accumulator + self.workspace + self.counter
    }
}

pub fn qubit_count_model(sys: &DiophantineSystem) -> QubitModel {
    let w = sys.bits() as usize;
    let d = sys.degree() as usize;
    QubitModel {
        system: sys.n() * w,
        accumulator: accumulator_term(sys),
        workspace: (2..d).map(|l| l * w).sum(),
        counter: counter_width(sys.m()),
    }
}

/// `plan - scratch - model`; equals [`ANCILLA_CONSTANT`] for every system whose
/// accumulator needs no degenerate widening.
pub fn model_discrepancy(plan: &RegisterPlan, model: &QubitModel) -> isize {
    plan.total_qubits() as isize - plan.e.width as isize - model.total() as isize
}

/// Regressor `(n + d(d+1)/2) log2 N` for linear qubit scaling.
pub fn qubit_regressor(sys: &DiophantineSystem) -> f64 {
    let d = sys.degree() as f64;
    (sys.n() as f64 + d * (d + 1.0) / 2.0) * sys.bits() as f64
}
