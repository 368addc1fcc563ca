//! Reversible arithmetic: CDKM ripple-carry adders, signed shifted
//! accumulation, and polynomial evaluation built from them.
//!
//! Multiplication never allocates partial products. A term `c * x * y` is a
//! list of shifted, controlled additions of `y` into the target, one per set bit
//! `p` of `|c|` and bit `v` of `x`, at shift `p + v`. Because `x` is two's
//! complement its top bit weighs `-2^(w-1)`, so that stage subtracts; a
//! negative coefficient flips every stage. Hence `subtract = msb_stage ^ (c < 0)`.

use crate::circuit::{Circuit, Gate};
use crate::encoding::{wrap_to_width, RegisterPlan, Span};
use crate::error::{Error, Result};
use crate::poly::{Coeff, Monomial, Polynomial};

/// One shifted accumulation `target += / -= (sign-extended source) << shift`,
/// optionally gated by `control`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccumulateSpec {
    pub source: Span,
    pub shift: usize,
    pub subtract: bool,
    pub control: Option<usize>,
    pub target: Span,
}

/// In-place CDKM ladder: `b <- a + b + carry (mod 2^L)`. `a` and `carry` are
/// restored. With `control` set, only the CNOTs writing into `b` are
/// controlled; with the control off the remaining gates cancel pairwise.
pub fn cdkm_gates(a: &[usize], b: &[usize], carry: usize, control: Option<usize>, out: &mut Vec<Gate>) {
    debug_assert_eq!(a.len(), b.len());
    let len = a.len();
    if len == 0 {
        return;
    }
    let write_b = |src: usize, dst: usize, out: &mut Vec<Gate>| match control {
        Some(ctl) => out.push(Gate::toffoli(ctl, src, dst)),
        None => out.push(Gate::cnot(src, dst)),
    };
    let carry_into = |i: usize| if i == 0 { carry } else { a[i - 1] };
    // MAJ(c, b, a)
    for i in 0..len {
        let c = carry_into(i);
        write_b(a[i], b[i], out);
        out.push(Gate::cnot(a[i], c));
        out.push(Gate::toffoli(c, b[i], a[i]));
    }
    // UMA(c, b, a), two-CNOT form
    for i in (0..len).rev() {
        let c = carry_into(i);
        out.push(Gate::toffoli(c, b[i], a[i]));
        out.push(Gate::cnot(a[i], c));
        write_b(c, b[i], out);
    }
}

fn max_qubit(spans: &[Span], extra: &[usize]) -> usize {
    spans
        .iter()
        .filter(|s| s.width > 0)
        .map(|s| s.end())
        .chain(extra.iter().map(|q| q + 1))
        .max()
        .unwrap_or(0)
}

/// Standalone adder circuit `b <- a + b + carry_in`, sized to the highest
/// qubit it touches.
pub fn synth_cdkm_add(a: Span, b: Span, carry_in: usize, controlled_by: Option<usize>) -> Result<Circuit> {
    if a.width != b.width {
        return Err(Error::WidthViolation(format!("adder operands {a} and {b} differ in width")));
    }
    if a.overlaps(&b) {
        return Err(Error::OverlappingSpans(format!("adder operands {a} and {b}")));
    }
    for q in std::iter::once(carry_in).chain(controlled_by) {
        if a.contains(q) || b.contains(q) {
            return Err(Error::OverlappingSpans(format!("qubit {q} lies inside an adder operand")));
        }
    }
    if controlled_by == Some(carry_in) {
        return Err(Error::OverlappingSpans("control equals carry qubit".into()));
    }
    let mut gates = Vec::new();
    let av: Vec<usize> = a.qubits().collect();
    let bv: Vec<usize> = b.qubits().collect();
    cdkm_gates(&av, &bv, carry_in, controlled_by, &mut gates);
    let extra: Vec<usize> = std::iter::once(carry_in).chain(controlled_by).collect();
    Circuit::from_gates(max_qubit(&[a, b], &extra), "cdkm", gates)
}

/// Emits one shifted accumulation. The adder runs on the target slice
/// `[shift, width)`; the addend is the source followed by sign-extension
/// copies of its MSB held in the plan's scratch register `E`.
pub fn shifted_accumulate_gates(spec: &AccumulateSpec, plan: &RegisterPlan, out: &mut Vec<Gate>) -> Result<()> {
    let AccumulateSpec { source, shift, subtract, control, target } = *spec;
    if source.width == 0 || target.width == 0 {
        return Err(Error::WidthViolation("empty accumulation operand".into()));
    }
    if shift + source.width > target.width {
        return Err(Error::WidthViolation(format!(
            "source {source} shifted by {shift} does not fit target of width {}",
            target.width
        )));
    }
    if source.overlaps(&target) {
        return Err(Error::OverlappingSpans(format!("source {source} and target {target}")));
    }
    let ancilla = plan.square_ancilla;
    let scratch = plan.e;
    for s in [source, target] {
        if s.contains(ancilla) || s.contains(plan.carry) || s.overlaps(&scratch) {
            return Err(Error::OverlappingSpans(format!("{s} collides with scratch qubits")));
        }
    }
    let mediated = match control {
        Some(c) if target.contains(c) => {
            return Err(Error::OverlappingSpans(format!("control {c} lies in target {target}")))
        }
        Some(c) if c == ancilla || c == plan.carry || scratch.contains(c) => {
            return Err(Error::OverlappingSpans(format!("control {c} is a scratch qubit")))
        }
        Some(c) => source.contains(c),
        None => false,
    };
    let len = target.width - shift;
    let ext = len - source.width;
    if ext > scratch.width {
        return Err(Error::WidthViolation(format!(
            "sign extension needs {ext} scratch qubits, plan has {}",
            scratch.width
        )));
    }

    let mut addend: Vec<usize> = source
        .qubits()
        .map(|q| if mediated && Some(q) == control { ancilla } else { q })
        .collect();
    addend.extend(scratch.qubits().take(ext));
    let slice: Vec<usize> = target.qubits().skip(shift).collect();

    let mut prepare = Vec::new();
    if mediated {
        prepare.push(Gate::cnot(control.expect("mediated implies control"), ancilla));
    }
    for q in scratch.qubits().take(ext) {
        prepare.push(Gate::cnot(source.msb(), q));
    }
    if subtract {
        prepare.extend(addend.iter().map(|&q| Gate::x(q)));
        prepare.push(Gate::x(plan.carry));
    }
    out.extend(prepare.iter().cloned());
    cdkm_gates(&addend, &slice, plan.carry, control, out);
    out.extend(prepare.into_iter().rev());
    Ok(())
}

pub fn synth_shifted_accumulate(spec: &AccumulateSpec, plan: &RegisterPlan) -> Result<Circuit> {
    let mut gates = Vec::new();
    shifted_accumulate_gates(spec, plan, &mut gates)?;
    Circuit::from_gates(plan.total_qubits(), "accumulate", gates)
}

fn set_bits(c: Coeff) -> impl Iterator<Item = usize> {
    let mag = c.unsigned_abs();
    (0..128).filter(move |p| mag >> p & 1 == 1)
}

/// `target += c * x`: one accumulation per set bit of `|c|`.
pub fn scalar_schedule(x: Span, c: Coeff, target: Span) -> Vec<AccumulateSpec> {
    set_bits(c)
        .map(|p| AccumulateSpec { source: x, shift: p, subtract: c < 0, control: None, target })
        .collect()
}

/// `target += c * x * y` with the bits of `x` as controls and `y` as the
/// shifted operand. `x == y` gives the squaring schedule.
pub fn product_schedule(x: Span, y: Span, c: Coeff, target: Span) -> Vec<AccumulateSpec> {
    let mut out = Vec::new();
    for p in set_bits(c) {
        for v in 0..x.width {
            out.push(AccumulateSpec {
                source: y,
                shift: p + v,
                subtract: (v == x.width - 1) ^ (c < 0),
                control: Some(x.qubit(v)),
                target,
            });
        }
    }
    out
}

fn emit(schedule: &[AccumulateSpec], plan: &RegisterPlan, out: &mut Vec<Gate>) -> Result<()> {
    schedule.iter().try_for_each(|s| shifted_accumulate_gates(s, plan, out))
}

pub fn synth_scalar_accumulate(x: Span, c: Coeff, f: Span, plan: &RegisterPlan) -> Result<Circuit> {
    let mut gates = Vec::new();
    emit(&scalar_schedule(x, c, f), plan, &mut gates)?;
    Circuit::from_gates(plan.total_qubits(), "scalar", gates)
}

/// `f += a * x^2`, routing each control bit through the squaring ancilla.
pub fn synth_square_accumulate(x: Span, a: Coeff, f: Span, plan: &RegisterPlan) -> Result<Circuit> {
    if x.contains(plan.square_ancilla) || f.contains(plan.square_ancilla) {
        return Err(Error::OverlappingSpans("squaring ancilla is in use".into()));
    }
    let mut gates = Vec::new();
    emit(&product_schedule(x, x, a, f), plan, &mut gates)?;
    Circuit::from_gates(plan.total_qubits(), "square", gates)
}

pub fn synth_cross_accumulate(xi: Span, xj: Span, b: Coeff, f: Span, plan: &RegisterPlan) -> Result<Circuit> {
    if xi.overlaps(&xj) {
        return Err(Error::OverlappingSpans(format!("cross operands {xi} and {xj}")));
    }
    let mut gates = Vec::new();
    emit(&product_schedule(xi, xj, b, f), plan, &mut gates)?;
    Circuit::from_gates(plan.total_qubits(), "cross", gates)
}

/// Compute / utilize / uncompute for a monomial of degree >= 3. `occ` lists
/// variable indices with multiplicity.
fn monomial_cuu_gates(occ: &[usize], c: Coeff, plan: &RegisterPlan, target: Span, out: &mut Vec<Gate>) -> Result<()> {
    let deg = occ.len();
    if deg < 3 {
        return Err(Error::InvalidArgument(format!("CUU needs degree >= 3, got {deg}")));
    }
    let var = |i: usize| plan.s[occ[i]];
    let mut compute = Vec::new();
    let d2 = plan.workspace(2)?;
    emit(&product_schedule(var(0), var(1), 1, d2), plan, &mut compute)?;
    for l in 3..deg {
        let prev = plan.workspace(l - 1)?;
        let next = plan.workspace(l)?;
        emit(&product_schedule(var(l - 1), prev, 1, next), plan, &mut compute)?;
    }
    let last = plan.workspace(deg - 1)?;
    out.extend(compute.iter().cloned());
    emit(&product_schedule(var(deg - 1), last, c, target), plan, out)?;
    out.extend(compute.into_iter().rev());
    Ok(())
}

pub fn synth_monomial_cuu(occ: &[usize], c: Coeff, plan: &RegisterPlan) -> Result<Circuit> {
    let mut gates = Vec::new();
    monomial_cuu_gates(occ, c, plan, plan.f, &mut gates)?;
    Circuit::from_gates(plan.total_qubits(), "monomial", gates)
}

fn monomial_gates(m: &Monomial, plan: &RegisterPlan, out: &mut Vec<Gate>) -> Result<()> {
    let occ = m.occurrences();
    let f = plan.f;
    match occ.as_slice() {
        [] => Ok(()),
        [i] => emit(&scalar_schedule(plan.s[*i], m.coefficient, f), plan, out),
        [i, j] => emit(&product_schedule(plan.s[*i], plan.s[*j], m.coefficient, f), plan, out),
        _ => monomial_cuu_gates(&occ, m.coefficient, plan, f, out),
    }
}

/// `|x>|0>_F|0>_D -> |x>|f(x)>_F|0>_D`.
pub fn synth_poly_eval(f: &Polynomial, plan: &RegisterPlan) -> Result<Circuit> {
    if f.n() != plan.n {
        return Err(Error::DimensionMismatch { expected: plan.n, found: f.n() });
    }
    let mut gates = Vec::new();
    let constant = wrap_to_width(f.constant_term(), plan.f.width as u32);
    for (k, q) in plan.f.qubits().enumerate() {
        if constant >> k & 1 == 1 {
            gates.push(Gate::x(q));
        }
    }
    for m in f.monomials().iter().filter(|m| !m.is_constant()) {
        monomial_gates(m, plan, &mut gates)?;
    }
    Circuit::from_gates(plan.total_qubits(), "U_f", gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{emulate_classical, BitString};
    use crate::encoding::{decode_twos_complement, encode_twos_complement, plan_registers};
    use crate::poly::{parse_system, Assignment, DiophantineSystem};

    fn run(c: &Circuit, input: u128) -> u128 {
        c.compile(false).unwrap().run(input).0
    }

    #[test]
    fn cdkm_adds_three_and_five() {
        let a = Span::new(0, 4);
        let b = Span::new(4, 4);
        let c = synth_cdkm_add(a, b, 8, None).unwrap();
        let out = emulate_classical(&c, &BitString::from_u128(9, 3 | 5 << 4)).unwrap();
        assert_eq!(out.read(b), 8);
        assert_eq!(out.read(a), 3);
        assert!(!out.get(8));
    }

    #[test]
    fn cdkm_exhaustive_with_carry_and_control() {
        for w in 1..=4usize {
            let a = Span::new(0, w);
            let b = Span::new(w, w);
            let carry = 2 * w;
            let ctl = 2 * w + 1;
            let c = synth_cdkm_add(a, b, carry, Some(ctl)).unwrap().compile(false).unwrap();
            let mask = (1u128 << w) - 1;
            for x in 0..=mask {
                for y in 0..=mask {
                    for cin in 0..2u128 {
                        for on in 0..2u128 {
                            let input = x | y << w | cin << carry | on << ctl;
                            let (out, _) = c.run(input);
                            let want_b = if on == 1 { (x + y + cin) & mask } else { y };
                            assert_eq!(out, x | want_b << w | cin << carry | on << ctl);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cdkm_subtraction_via_complement() {
        // pre-invert a and set carry: b <- b - x
        let w = 4;
        let a = Span::new(0, w);
        let b = Span::new(w, w);
        let add = synth_cdkm_add(a, b, 8, None).unwrap();
        for x in 0..16u128 {
            for y in 0..16u128 {
                let input = (!x & 15) | y << 4 | 1 << 8;
                let out = run(&add, input);
                assert_eq!(out >> 4 & 15, y.wrapping_sub(x) & 15);
            }
        }
    }

    #[test]
    fn cdkm_rejects_overlap() {
        assert!(synth_cdkm_add(Span::new(0, 3), Span::new(2, 3), 6, None).is_err());
        assert!(synth_cdkm_add(Span::new(0, 3), Span::new(3, 3), 4, None).is_err());
        assert!(synth_cdkm_add(Span::new(0, 3), Span::new(3, 2), 6, None).is_err());
    }

    fn plan_for(text: &str) -> (DiophantineSystem, RegisterPlan) {
        let sys = parse_system(text).unwrap();
        let plan = plan_registers(&sys);
        (sys, plan)
    }

    /// Runs `c` with S loaded from `values` and reads F signed.
    fn eval_circuit(c: &Circuit, plan: &RegisterPlan, values: &[i64]) -> (i128, u128) {
        let mut input = 0u128;
        for (span, &v) in plan.s.iter().zip(values) {
            input |= encode_twos_complement(v as i128, span.width as u32).unwrap() << span.offset;
        }
        let out = run(c, input);
        let f = out >> plan.f.offset & ((1u128 << plan.f.width) - 1);
        let rest = out & !(((1u128 << plan.f.width) - 1) << plan.f.offset);
        assert_eq!(rest, input, "non-F qubits disturbed for {values:?}");
        (decode_twos_complement(f, plan.f.width as u32), out)
    }

    fn all_points(sys: &DiophantineSystem) -> Vec<Assignment> {
        (0..sys.domain_size().unwrap()).map(|i| sys.assignment_at(i)).collect()
    }

    #[test]
    fn shifted_accumulate_signed_shift() {
        let (sys, plan) = plan_for("vars x\nbits 3\neq 64x = 0");
        // reuse the plan's F (width >= 8) as an 8-bit target
        let target = Span::new(plan.f.offset, 8);
        let spec = AccumulateSpec { source: plan.s[0], shift: 1, subtract: false, control: None, target };
        let c = synth_shifted_accumulate(&spec, &plan).unwrap();
        for a in all_points(&sys) {
            let x = a.values[0] as i128;
            let input = encode_twos_complement(x, 3).unwrap();
            let out = run(&c, input);
            let t = out >> target.offset & 0xff;
            assert_eq!(decode_twos_complement(t, 8), 2 * x);
        }
        let spec = AccumulateSpec { shift: 0, subtract: true, ..spec };
        let c = synth_shifted_accumulate(&spec, &plan).unwrap();
        let out = run(&c, 3);
        assert_eq!(decode_twos_complement(out >> target.offset & 0xff, 8), -3);
    }

    #[test]
    fn controlled_accumulate_with_control_off_is_identity() {
        let (_, plan) = plan_for("vars x y\nbits 2\neq 5xy = 0");
        let spec = AccumulateSpec {
            source: plan.s[1],
            shift: 1,
            subtract: true,
            control: Some(plan.s[0].qubit(0)),
            target: plan.f,
        };
        let c = synth_shifted_accumulate(&spec, &plan).unwrap();
        let fmask = (1u128 << plan.f.width) - 1;
        for s in 0..16u128 {
            for f in [0u128, 1, 7, fmask] {
                let input = (s & !1) | f << plan.f.offset;
                assert_eq!(run(&c, input), input);
            }
        }
    }

    #[test]
    fn width_violation_detected() {
        let (_, plan) = plan_for("vars x\nbits 3\neq 2x = 0");
        let spec = AccumulateSpec { source: plan.s[0], shift: plan.f.width - 2, subtract: false, control: None, target: plan.f };
        assert!(matches!(synth_shifted_accumulate(&spec, &plan), Err(Error::WidthViolation(_))));
    }

    #[test]
    fn scalar_schedules_follow_hamming_weight() {
        let x = Span::new(0, 3);
        let f = Span::new(3, 8);
        let sched = scalar_schedule(x, 3, f);
        assert_eq!(sched.iter().map(|s| (s.shift, s.subtract)).collect::<Vec<_>>(), vec![(0, false), (1, false)]);
        let sched = scalar_schedule(x, -2, f);
        assert_eq!(sched.iter().map(|s| (s.shift, s.subtract)).collect::<Vec<_>>(), vec![(1, true)]);
        assert_eq!(scalar_schedule(x, 1, f).len(), 1);
        assert!(scalar_schedule(x, 0, f).is_empty());
    }

    #[test]
    fn linear_example_matches_structure_and_values() {
        let (sys, plan) = plan_for("vars x y\nbits 3\neq 3x - 2y = -7");
        let f = &sys.equations()[0];
        let c = synth_poly_eval(f, &plan).unwrap();
        // three shifted additions, each one CDKM ladder of 2 Toffolis per bit
        let slices: usize = [0usize, 1, 1].iter().map(|s| plan.f.width - s).sum();
        assert_eq!(c.census().total.ccx as usize, 2 * slices);
        for a in all_points(&sys) {
            let (x, y) = (a.values[0] as i128, a.values[1] as i128);
            assert_eq!(eval_circuit(&c, &plan, &a.values).0, 3 * x - 2 * y + 7);
        }
    }

    #[test]
    fn zero_polynomial_leaves_f_zero() {
        let (sys, plan) = plan_for("vars x\nbits 3\neq 0 = 0");
        let c = synth_poly_eval(&sys.equations()[0], &plan).unwrap();
        assert!(c.is_empty());
        for a in all_points(&sys) {
            assert_eq!(eval_circuit(&c, &plan, &a.values).0, 0);
        }
    }

    #[test]
    fn squares_exhaustive() {
        for (a, w) in [(1i128, 1u32), (1, 2), (1, 3), (-1, 1), (-1, 2), (-1, 3), (3, 3), (-6, 2)] {
            let text = format!("vars x\nbits {w}\neq {a} x^2 = 0");
            let (sys, plan) = plan_for(&text);
            let c = synth_square_accumulate(plan.s[0], a, plan.f, &plan).unwrap();
            for pt in all_points(&sys) {
                let x = pt.values[0] as i128;
                assert_eq!(eval_circuit(&c, &plan, &pt.values).0, a * x * x, "a={a} w={w} x={x}");
            }
        }
    }

    #[test]
    fn cross_terms_exhaustive() {
        for b in [1i128, -4, 5] {
            let (sys, plan) = plan_for(&format!("vars x y\nbits 2\neq {b} x y = 0"));
            let c = synth_cross_accumulate(plan.s[0], plan.s[1], b, plan.f, &plan).unwrap();
            for pt in all_points(&sys) {
                let (x, y) = (pt.values[0] as i128, pt.values[1] as i128);
                assert_eq!(eval_circuit(&c, &plan, &pt.values).0, b * x * y);
            }
        }
    }

    #[test]
    fn cubes_and_triple_products() {
        let (sys, plan) = plan_for("vars x\nbits 2\neq x^3 = 0");
        let c = synth_monomial_cuu(&[0, 0, 0], 1, &plan).unwrap();
        for pt in all_points(&sys) {
            let x = pt.values[0] as i128;
            assert_eq!(eval_circuit(&c, &plan, &pt.values).0, x * x * x);
        }
        let (sys, plan) = plan_for("vars x y z\nbits 2\neq 2xyz = 0");
        let c = synth_monomial_cuu(&[0, 1, 2], 2, &plan).unwrap();
        for pt in all_points(&sys) {
            let p: i128 = pt.values.iter().map(|&v| v as i128).product();
            assert_eq!(eval_circuit(&c, &plan, &pt.values).0, 2 * p);
        }
    }

    #[test]
    fn cuu_needs_workspace() {
        let (_, plan) = plan_for("vars x\nbits 2\neq x^2 = 0");
        assert!(matches!(synth_monomial_cuu(&[0, 0, 0], 1, &plan), Err(Error::MissingWorkspace(2))));
    }

    #[test]
    fn three_quadratics_second_equation_exhaustive() {
        let (sys, plan) = plan_for("vars x y z\nbits 3\neq 2xy - 4yz + 3xz = 13");
        let f = &sys.equations()[0];
        let c = synth_poly_eval(f, &plan).unwrap();
        let inv = c.inverse().compile(false).unwrap();
        for pt in all_points(&sys) {
            let (value, out) = eval_circuit(&c, &plan, &pt.values);
            assert_eq!(value, f.evaluate(&pt).unwrap());
            let (back, _) = inv.run(out);
            assert_eq!(back & !(((1u128 << plan.f.width) - 1) << plan.f.offset), back);
        }
    }

    #[test]
    fn higher_degree_mixed_polynomial() {
        let (sys, plan) = plan_for("vars x y\nbits 2\neq 3x^2y^2 - x^3 y + 2y^4 - 5xy + x - 7 = 1");
        let f = &sys.equations()[0];
        let c = synth_poly_eval(f, &plan).unwrap();
        for pt in all_points(&sys) {
            assert_eq!(eval_circuit(&c, &plan, &pt.values).0, f.evaluate(&pt).unwrap());
        }
    }
}
