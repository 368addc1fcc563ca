//! Gate-level circuit IR.
//!
//! Qubit 0 is the least significant bit of every register. All supported gates
//! are self-inverse, so inversion only reverses gate order.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::encoding::Span;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    H,
    Cnot,
    Toffoli,
    Mcx,
    Mcz,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "CCX",
            GateKind::Mcx => "MCX",
            GateKind::Mcz => "MCZ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    /// `false` for an anti-control, which fires on `|0>`.
    pub positive: bool,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Control { qubit, positive: true }
    }

    pub fn neg(qubit: usize) -> Self {
        Control { qubit, positive: false }
    }
}

pub type Controls = SmallVec<[Control; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Controls,
}

impl Gate {
    pub fn x(target: usize) -> Self {
        Gate { kind: GateKind::X, target, controls: SmallVec::new() }
    }

    pub fn h(target: usize) -> Self {
        Gate { kind: GateKind::H, target, controls: SmallVec::new() }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            target,
            controls: smallvec::smallvec![Control::pos(control)],
        }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Toffoli,
            target,
            controls: smallvec::smallvec![Control::pos(c1), Control::pos(c2)],
        }
    }

    pub fn mcx(controls: impl IntoIterator<Item = Control>, target: usize) -> Self {
        Gate { kind: GateKind::Mcx, target, controls: controls.into_iter().collect() }
    }

    pub fn mcz(controls: impl IntoIterator<Item = Control>, target: usize) -> Self {
        Gate { kind: GateKind::Mcz, target, controls: controls.into_iter().collect() }
    }

    pub fn arity(&self) -> usize {
        self.controls.len()
    }

    pub fn is_permutation(&self) -> bool {
        !matches!(self.kind, GateKind::H | GateKind::Mcz)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().map(|c| c.qubit).chain(std::iter::once(self.target))
    }

    pub fn validate(&self, qubit_count: usize) -> Result<()> {
        let expected = match self.kind {
            GateKind::X | GateKind::H => Some(0),
            GateKind::Cnot => Some(1),
            GateKind::Toffoli => Some(2),
            GateKind::Mcx | GateKind::Mcz => None,
        };
        match expected {
            Some(k) if self.controls.len() != k => {
                return Err(Error::InvalidGate(format!(
                    "{} takes {k} controls, got {}",
                    self.kind.name(),
                    self.controls.len()
                )))
            }
            None if self.controls.is_empty() => {
                return Err(Error::InvalidGate(format!("{} needs a control", self.kind.name())))
            }
            _ => {}
        }
        if matches!(self.kind, GateKind::Cnot | GateKind::Toffoli)
            && self.controls.iter().any(|c| !c.positive)
        {
            return Err(Error::InvalidGate(format!(
                "{} controls are positive only",
                self.kind.name()
            )));
        }
        for q in self.qubits() {
            if q >= qubit_count {
                return Err(Error::QubitOutOfRange { qubit: q, limit: qubit_count });
            }
        }
        for (i, c) in self.controls.iter().enumerate() {
            if c.qubit == self.target {
                return Err(Error::InvalidGate(format!("control {} equals the target", c.qubit)));
            }
            if self.controls[..i].iter().any(|o| o.qubit == c.qubit) {
                return Err(Error::InvalidGate(format!("control {} repeated", c.qubit)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        match self.kind {
            GateKind::Mcx | GateKind::Mcz => {
                for c in &self.controls {
                    write!(f, " {}{}", if c.positive { '+' } else { '-' }, c.qubit)?;
                }
            }
            _ => {
                for c in &self.controls {
                    write!(f, " {}", c.qubit)?;
                }
            }
        }
        write!(f, " {}", self.target)
    }
}

/// Labelled half-open gate range.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Section {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

const INVERSE_SUFFIX: &str = "^-1";

fn toggle_inverse(label: &str) -> String {
    match label.strip_suffix(INVERSE_SUFFIX) {
        Some(base) => base.to_string(),
        None => format!("{label}{INVERSE_SUFFIX}"),
    }
}

/// Ordered gate list whose sections partition the gates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
    sections: Vec<Section>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Circuit { qubit_count, gates: Vec::new(), sections: Vec::new() }
    }

    /// Single-section circuit.
    pub fn from_gates(qubit_count: usize, label: impl Into<String>, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(qubit_count)?;
        }
        let end = gates.len();
        Ok(Circuit {
            qubit_count,
            gates,
            sections: vec![Section { label: label.into(), start: 0, end }],
        })
    }

    pub fn from_parts(qubit_count: usize, gates: Vec<Gate>, sections: Vec<Section>) -> Result<Self> {
        let c = Circuit { qubit_count, gates, sections };
        c.validate()?;
        Ok(c)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            g.validate(self.qubit_count)?;
        }
        let mut cursor = 0;
        for s in &self.sections {
            if s.start != cursor || s.end < s.start {
                return Err(Error::InvalidGate(format!(
                    "section `{}` [{}, {}) does not continue at gate {cursor}",
                    s.label, s.start, s.end
                )));
            }
            cursor = s.end;
        }
        if cursor != self.gates.len() {
            return Err(Error::InvalidGate(format!(
                "sections cover {cursor} of {} gates",
                self.gates.len()
            )));
        }
        Ok(())
    }

    /// Appends `other`, keeping its sections; the qubit count grows to the max.
    pub fn append(&mut self, other: &Circuit) {
        let base = self.gates.len();
        self.qubit_count = self.qubit_count.max(other.qubit_count);
        self.gates.extend_from_slice(&other.gates);
        self.sections.extend(other.sections.iter().map(|s| Section {
            label: s.label.clone(),
            start: s.start + base,
            end: s.end + base,
        }));
    }

    /// Appends `other` as one section under `label`.
    pub fn append_as(&mut self, label: impl Into<String>, other: &Circuit) {
        let start = self.gates.len();
        self.qubit_count = self.qubit_count.max(other.qubit_count);
        self.gates.extend_from_slice(&other.gates);
        self.sections.push(Section { label: label.into(), start, end: self.gates.len() });
    }

    pub fn concat(parts: &[&Circuit]) -> Circuit {
        let mut out = Circuit::new(parts.iter().map(|c| c.qubit_count).max().unwrap_or(0));
        for p in parts {
            out.append(p);
        }
        out
    }

    /// Collapses all sections into one labelled section.
    pub fn relabel(mut self, label: impl Into<String>) -> Circuit {
        self.sections = vec![Section { label: label.into(), start: 0, end: self.gates.len() }];
        self
    }

    pub fn inverse(&self) -> Circuit {
        let len = self.gates.len();
        Circuit {
            qubit_count: self.qubit_count,
            gates: self.gates.iter().rev().cloned().collect(),
            sections: self
                .sections
                .iter()
                .rev()
                .map(|s| Section { label: toggle_inverse(&s.label), start: len - s.end, end: len - s.start })
                .collect(),
        }
    }

    pub fn census(&self) -> GateCensus {
        GateCensus {
            total: GateCounts::of(&self.gates),
            sections: self
                .sections
                .iter()
                .map(|s| (s.label.clone(), GateCounts::of(&self.gates[s.start..s.end])))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "qubits {}", self.qubit_count).unwrap();
        for s in &self.sections {
            writeln!(out, "section {} {} {}", s.label, s.start, s.end).unwrap();
        }
        for g in &self.gates {
            writeln!(out, "{g}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut qubits: Option<usize> = None;
        let mut gates = Vec::new();
        let mut sections = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let bad = |message: String| Error::MalformedLine { line, message };
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = toks.first() else { continue };
            let index = |t: &str| -> Result<usize> {
                t.parse::<usize>().map_err(|_| bad(format!("`{t}` is not a qubit index")))
            };
            let gate = match head {
                "qubits" => {
                    if toks.len() != 2 || qubits.is_some() {
                        return Err(bad("expected a single `qubits N` header".into()));
                    }
                    qubits = Some(index(toks[1])?);
                    continue;
                }
                "section" => {
                    if toks.len() < 4 {
                        return Err(bad("expected `section <label> <start> <end>`".into()));
                    }
                    let end = index(toks[toks.len() - 1])?;
                    let start = index(toks[toks.len() - 2])?;
                    sections.push(Section { label: toks[1..toks.len() - 2].join(" "), start, end });
                    continue;
                }
                "X" | "H" if toks.len() == 2 => {
                    let t = index(toks[1])?;
                    if head == "X" { Gate::x(t) } else { Gate::h(t) }
                }
                "CNOT" if toks.len() == 3 => Gate::cnot(index(toks[1])?, index(toks[2])?),
                "CCX" if toks.len() == 4 => Gate::toffoli(index(toks[1])?, index(toks[2])?, index(toks[3])?),
                "MCX" | "MCZ" if toks.len() >= 3 => {
                    let mut controls = Controls::new();
                    for t in &toks[1..toks.len() - 1] {
                        let (positive, rest) = match t.as_bytes()[0] {
                            b'+' => (true, &t[1..]),
                            b'-' => (false, &t[1..]),
                            _ => return Err(bad(format!("control `{t}` lacks a +/- polarity"))),
                        };
                        controls.push(Control { qubit: index(rest)?, positive });
                    }
                    let target = index(toks[toks.len() - 1])?;
                    if head == "MCX" { Gate::mcx(controls, target) } else { Gate::mcz(controls, target) }
                }
                _ => return Err(bad(format!("unrecognized gate line `{}`", raw.trim()))),
            };
            let limit = qubits.ok_or_else(|| bad("gate before the `qubits` header".into()))?;
            gate.validate(limit).map_err(|e| bad(e.to_string()))?;
            gates.push(gate);
        }
        let qubit_count = qubits.ok_or(Error::MalformedLine { line: 1, message: "missing `qubits` header".into() })?;
        Circuit::from_parts(qubit_count, gates, sections)
    }

    /// Compiles to mask form for fast classical execution on up to 128 qubits.
    pub fn compile(&self, allow_phase: bool) -> Result<CompiledCircuit> {
        if self.qubit_count > 128 {
            return Err(Error::CapExceeded { what: "mask emulation", needed: self.qubit_count, cap: 128 });
        }
        let mut ops = Vec::with_capacity(self.gates.len());
        for (index, g) in self.gates.iter().enumerate() {
            let (mut mask, mut value) = (0u128, 0u128);
            for c in &g.controls {
                mask |= 1 << c.qubit;
                if c.positive {
                    value |= 1 << c.qubit;
                }
            }
            let target = 1u128 << g.target;
            let op = match g.kind {
                GateKind::H => return Err(Error::NonPermutationGate { index, kind: "H" }),
                GateKind::Mcz if !allow_phase => return Err(Error::NonPermutationGate { index, kind: "MCZ" }),
                GateKind::Mcz => MaskOp { mask: mask | target, value: value | target, target, phase: true },
                _ => MaskOp { mask, value, target, phase: false },
            };
            ops.push(op);
        }
        Ok(CompiledCircuit { qubit_count: self.qubit_count, ops })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::from_text(s)
    }
}

#[derive(Clone, Copy, Debug)]
struct MaskOp {
    mask: u128,
    value: u128,
    target: u128,
    phase: bool,
}

/// Mask-compiled permutation (plus optional phase) circuit.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    qubit_count: usize,
    ops: Vec<MaskOp>,
}

impl CompiledCircuit {
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// Output basis state and whether the accumulated phase is `-1`.
    #[inline]
    pub fn run(&self, mut state: u128) -> (u128, bool) {
        let mut negative = false;
        for op in &self.ops {
            if state & op.mask == op.value {
                if op.phase {
                    negative = !negative;
                } else {
                    state ^= op.target;
                }
            }
        }
        (state, negative)
    }
}

/// Basis-state bit string; bit `i` is qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_u128(len: usize, value: u128) -> Self {
        let mut b = BitString::zeros(len);
        for i in 0..len.min(128) {
            b.set(i, value >> i & 1 == 1);
        }
        b
    }

    pub fn to_u128(&self) -> Option<u128> {
        if (128..self.len).any(|i| self.get(i)) {
            return None;
        }
        Some((0..self.len.min(128)).fold(0u128, |acc, i| acc | (self.get(i) as u128) << i))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let bit = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn read(&self, span: Span) -> u128 {
        span.qubits().enumerate().fold(0, |acc, (k, q)| acc | (self.get(q) as u128) << k)
    }

    pub fn write(&mut self, span: Span, value: u128) {
        for (k, q) in span.qubits().enumerate() {
            self.set(q, value >> k & 1 == 1);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn controls_fire(g: &Gate, s: &BitString) -> bool {
    g.controls.iter().all(|c| s.get(c.qubit) == c.positive)
}

fn check_input(c: &Circuit, input: &BitString) -> Result<()> {
    if input.len() != c.qubit_count {
        return Err(Error::DimensionMismatch { expected: c.qubit_count, found: input.len() });
    }
    Ok(())
}

/// Applies a permutation-only circuit (X/CNOT/CCX/MCX) to a basis state.
pub fn emulate_classical(c: &Circuit, input: &BitString) -> Result<BitString> {
    check_input(c, input)?;
    if let Some((index, g)) = c.gates.iter().enumerate().find(|(_, g)| !g.is_permutation()) {
        return Err(Error::NonPermutationGate { index, kind: g.kind.name() });
    }
    Ok(emulate_with_phase(c, input)?.0)
}

/// Like [`emulate_classical`] but also tracks MCZ phase flips; `true` means
/// the basis state picked up a factor of `-1`.
pub fn emulate_with_phase(c: &Circuit, input: &BitString) -> Result<(BitString, bool)> {
    check_input(c, input)?;
    let mut s = input.clone();
    let mut negative = false;
    for (index, g) in c.gates.iter().enumerate() {
        match g.kind {
            GateKind::H => return Err(Error::NonPermutationGate { index, kind: "H" }),
            GateKind::Mcz => {
                if controls_fire(g, &s) && s.get(g.target) {
                    negative = !negative;
                }
            }
            _ => {
                if controls_fire(g, &s) {
                    s.flip(g.target);
                }
            }
        }
    }
    Ok((s, negative))
}

/// Gate counts for a gate slice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub x: u64,
    pub h: u64,
    pub cnot: u64,
    pub ccx: u64,
    pub mcx: BTreeMap<usize, u64>,
    pub mcz: BTreeMap<usize, u64>,
}

impl GateCounts {
    pub fn of(gates: &[Gate]) -> Self {
        let mut c = GateCounts::default();
        for g in gates {
            match g.kind {
                GateKind::X => c.x += 1,
                GateKind::H => c.h += 1,
                GateKind::Cnot => c.cnot += 1,
                GateKind::Toffoli => c.ccx += 1,
                GateKind::Mcx => *c.mcx.entry(g.arity()).or_default() += 1,
                GateKind::Mcz => *c.mcz.entry(g.arity()).or_default() += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.x + self.h + self.cnot + self.ccx + self.mcx.values().sum::<u64>() + self.mcz.values().sum::<u64>()
    }

    pub fn add(&mut self, other: &GateCounts) {
        self.x += other.x;
        self.h += other.h;
        self.cnot += other.cnot;
        self.ccx += other.ccx;
        for (k, v) in &other.mcx {
            *self.mcx.entry(*k).or_default() += v;
        }
        for (k, v) in &other.mcz {
            *self.mcz.entry(*k).or_default() += v;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateCensus {
    pub total: GateCounts,
    pub sections: Vec<(String, GateCounts)>,
}

pub fn gate_census(c: &Circuit) -> GateCensus {
    c.census()
}
