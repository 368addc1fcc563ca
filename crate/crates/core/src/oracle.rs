//! Oracle assembly: inequality checks, counter tally, phase flip, diffusion
//! and the Grover iteration.
//!
//! Each equation `f = 0` is checked as `f >= 0` and `-f >= 0`, each test being
//! one look at the accumulator's sign bit. The counter `R` ends at
//! `m + #{j : f_j(x) = 0}`, which equals `2m` exactly on solutions.

use rayon::prelude::*;

use crate::arith::synth_poly_eval;
use crate::circuit::{Circuit, CompiledCircuit, Control, Gate};
use crate::encoding::{encode_twos_complement, plan_registers, RegisterPlan};
use crate::error::{Error, Result};
use crate::poly::{Assignment, DiophantineSystem, Polynomial};

/// Increment `R` iff the accumulator's sign bit is 0. Ripple from the top
/// bit down so each flip sees the pre-increment low bits.
pub fn synth_ineq_check(plan: &RegisterPlan) -> Result<Circuit> {
    let r = plan.r;
    let sign = Control::neg(plan.f.msb());
    let mut gates = Vec::with_capacity(r.width);
    for k in (0..r.width).rev() {
        let controls = std::iter::once(sign).chain(r.qubits().take(k).map(Control::pos));
        gates.push(Gate::mcx(controls, r.qubit(k)));
    }
    Circuit::from_gates(plan.total_qubits(), "A_ineq", gates)
}

/// `F_j = (U_{-f}^-1 A U_{-f}) (U_f^-1 A U_f)`: adds 2 to `R` when `f(x) = 0`
/// and 1 otherwise.
pub fn synth_constraint_pair(f: &Polynomial, plan: &RegisterPlan) -> Result<Circuit> {
    let up = synth_poly_eval(f, plan)?;
    let down = synth_poly_eval(&f.negated(), plan)?;
    let check = synth_ineq_check(plan)?;
    let mut c = Circuit::new(plan.total_qubits());
    c.append_as("U_f", &up);
    c.append_as("A_ineq", &check);
    c.append_as("U_f^-1", &up.inverse());
    c.append_as("U_-f", &down);
    c.append_as("A_ineq", &check);
    c.append_as("U_-f^-1", &down.inverse());
    Ok(c)
}

/// Flips R's low bit when S holds `x`; a solution then tallies `2m + 1`.
fn exclusion_hook(plan: &RegisterPlan, x: &Assignment) -> Result<Gate> {
    let mut controls = Vec::with_capacity(plan.n * plan.bits);
    for (span, &v) in plan.s.iter().zip(&x.values) {
        let bits = encode_twos_complement(v as i128, span.width as u32)?;
        for (k, q) in span.qubits().enumerate() {
            controls.push(Control { qubit: q, positive: bits >> k & 1 == 1 });
        }
    }
    Ok(Gate::mcx(controls, plan.r.qubit(0)))
}

/// Phase flip on `R = 2m` with mixed-polarity controls.
fn phase_gate(plan: &RegisterPlan) -> Gate {
    let pattern = 2 * plan.m;
    let top = usize::BITS as usize - 1 - pattern.leading_zeros() as usize;
    let controls = plan
        .r
        .qubits()
        .enumerate()
        .filter(|&(k, _)| k != top)
        .map(|(k, q)| Control { qubit: q, positive: pattern >> k & 1 == 1 });
    Gate::mcz(controls, plan.r.qubit(top))
}

fn check_exclusions(sys: &DiophantineSystem, excluded: &[Assignment]) -> Result<()> {
    for (i, x) in excluded.iter().enumerate() {
        sys.check_assignment(x)?;
        if excluded[..i].contains(x) {
            return Err(Error::DuplicateExclusion(x.values.clone()));
        }
    }
    Ok(())
}

pub fn synth_oracle(sys: &DiophantineSystem, plan: &RegisterPlan, excluded: &[Assignment]) -> Result<Circuit> {
    if plan.n != sys.n() || plan.m != sys.m() || plan.bits != sys.bits() as usize {
        return Err(Error::InvalidArgument("register plan does not match the system".into()));
    }
    check_exclusions(sys, excluded)?;
    let q = plan.total_qubits();
    let mut count = Circuit::new(q);
    for (j, f) in sys.equations().iter().enumerate() {
        count.append_as(format!("F eq {}", j + 1), &synth_constraint_pair(f, plan)?);
    }
    let hooks = excluded.iter().map(|x| exclusion_hook(plan, x)).collect::<Result<Vec<_>>>()?;
    let hooks = Circuit::from_gates(q, "exclude", hooks)?;
    let phase = Circuit::from_gates(q, "phase R=2m", vec![phase_gate(plan)])?;

    let mut oracle = Circuit::new(q);
    oracle.append(&count);
    if !hooks.is_empty() {
        oracle.append(&hooks);
    }
    oracle.append(&phase);
    if !hooks.is_empty() {
        oracle.append(&hooks.inverse());
    }
    oracle.append(&count.inverse());
    Ok(oracle)
}

/// Inversion about the mean over S (up to global phase).
pub fn synth_diffusion(plan: &RegisterPlan) -> Result<Circuit> {
    let s: Vec<usize> = plan.s_span().qubits().collect();
    let mut gates: Vec<Gate> = Vec::new();
    if let [only] = s.as_slice() {
        // 2|+><+| - I = X
        gates.push(Gate::x(*only));
    } else {
        gates.extend(s.iter().map(|&q| Gate::h(q)));
        gates.extend(s.iter().map(|&q| Gate::x(q)));
        let (&target, rest) = s.split_last().expect("S is non-empty");
        gates.push(Gate::mcz(rest.iter().map(|&q| Control::pos(q)), target));
        gates.extend(s.iter().map(|&q| Gate::x(q)));
        gates.extend(s.iter().map(|&q| Gate::h(q)));
    }
    Circuit::from_gates(plan.total_qubits(), "diffusion", gates)
}

/// Everything needed to run Grover on one system.
#[derive(Clone, Debug)]
pub struct OracleBundle {
    pub system: DiophantineSystem,
    pub plan: RegisterPlan,
    pub oracle: Circuit,
    pub diffusion: Circuit,
    pub iteration: Circuit,
    pub excluded: Vec<Assignment>,
}

pub fn synth_grover_iteration(sys: &DiophantineSystem, plan: &RegisterPlan, excluded: &[Assignment]) -> Result<OracleBundle> {
    let oracle = synth_oracle(sys, plan, excluded)?;
    let diffusion = synth_diffusion(plan)?;
    let iteration = Circuit::concat(&[&oracle, &diffusion]);
    Ok(OracleBundle {
        system: sys.clone(),
        plan: plan.clone(),
        oracle,
        diffusion,
        iteration,
        excluded: excluded.to_vec(),
    })
}

impl OracleBundle {
    pub fn new(sys: &DiophantineSystem) -> Result<Self> {
        synth_grover_iteration(sys, &plan_registers(sys), &[])
    }

    /// Basis index of `x` within the S register.
    pub fn s_index(&self, x: &Assignment) -> Result<u128> {
        s_index(&self.plan, x)
    }

    pub fn s_assignment(&self, index: u128) -> Assignment {
        s_assignment(&self.plan, index)
    }

    /// Permutation-plus-phase form of the oracle for fast emulation.
    pub fn compiled_oracle(&self) -> Result<CompiledCircuit> {
        self.oracle.compile(true)
    }
}

pub fn augment_exclude(bundle: &OracleBundle, x: &Assignment) -> Result<OracleBundle> {
    bundle.system.check_assignment(x)?;
    if bundle.excluded.contains(x) {
        return Err(Error::DuplicateExclusion(x.values.clone()));
    }
    let mut excluded = bundle.excluded.clone();
    excluded.push(x.clone());
    synth_grover_iteration(&bundle.system, &bundle.plan, &excluded)
}

pub fn s_index(plan: &RegisterPlan, x: &Assignment) -> Result<u128> {
    if x.values.len() != plan.n {
        return Err(Error::DimensionMismatch { expected: plan.n, found: x.values.len() });
    }
    let mut index = 0u128;
    for (span, &v) in plan.s.iter().zip(&x.values) {
        index |= encode_twos_complement(v as i128, span.width as u32)? << span.offset;
    }
    Ok(index)
}

pub fn s_assignment(plan: &RegisterPlan, index: u128) -> Assignment {
    Assignment::new(
        plan.s
            .iter()
            .map(|span| {
                let bits = index >> span.offset & ((1u128 << span.width) - 1);
                crate::encoding::decode_twos_complement(bits, span.width as u32) as i64
            })
            .collect(),
    )
}

/// Result of emulating the oracle on every S basis state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEmulation {
    /// Phase bit per S index (`true` = marked).
    pub marked: Vec<bool>,
}

impl OracleEmulation {
    pub fn marked_assignments(&self, plan: &RegisterPlan) -> Vec<Assignment> {
        let mut out: Vec<Assignment> = self
            .marked
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| s_assignment(plan, i as u128))
            .collect();
        out.sort();
        out
    }
}

/// Runs the synthesized oracle on every basis state of S with all other
/// qubits zero; fails with the first input whose workspace is not restored.
pub fn emulate_oracle(bundle: &OracleBundle, cap_bits: usize) -> Result<OracleEmulation> {
    let s_bits = bundle.plan.s_span().width;
    if s_bits > cap_bits {
        return Err(Error::CapExceeded { what: "oracle emulation", needed: s_bits, cap: cap_bits });
    }
    let compiled = bundle.compiled_oracle()?;
    let marked = (0..1u128 << s_bits)
        .into_par_iter()
        .map(|s| {
            let (out, negative) = compiled.run(s);
            if out != s {
                return Err(Error::GarbageDetected(format!(
                    "input {} left state {out:#x}",
                    s_assignment(&bundle.plan, s)
                )));
            }
            Ok(negative)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(OracleEmulation { marked })
}

/// Counter value after the counting block, for every S basis state.
pub fn emulate_counter(sys: &DiophantineSystem, plan: &RegisterPlan) -> Result<Vec<u128>> {
    let mut count = Circuit::new(plan.total_qubits());
    for f in sys.equations() {
        count.append(&synth_constraint_pair(f, plan)?);
    }
    let compiled = count.compile(false)?;
    let s_bits = plan.s_span().width;
    Ok((0..1u128 << s_bits)
        .into_par_iter()
        .map(|s| compiled.run(s).0 >> plan.r.offset & ((1u128 << plan.r.width) - 1))
        .collect())
}
