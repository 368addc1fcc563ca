//! Two's complement codec and the register layout planner.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{Coeff, DiophantineSystem};

/// Carry-in qubit plus the squaring ancilla.
pub const FIXED_ANCILLAS: usize = 2;
/// Extra accumulator MSB beyond the magnitude bound, reserved for the sign.
pub const SIGN_HEADROOM: usize = 1;

/// A contiguous run of qubits; bit 0 of the register is qubit `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub offset: usize,
    pub width: usize,
}

impl Span {
    pub fn new(offset: usize, width: usize) -> Self {
        Span { offset, width }
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    pub fn qubit(&self, bit: usize) -> usize {
        debug_assert!(bit < self.width);
        self.offset + bit
    }

    pub fn msb(&self) -> usize {
        self.offset + self.width - 1
    }

    pub fn qubits(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator {
        self.offset..self.end()
    }

    pub fn contains(&self, q: usize) -> bool {
        q >= self.offset && q < self.end()
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.width > 0 && other.width > 0 && self.offset < other.end() && other.offset < self.end()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.offset, self.end())
    }
}

fn check_width(w: u32) -> Result<()> {
    if w == 0 || w > 127 {
        return Err(Error::InvalidArgument(format!("bit width {w} outside 1..=127")));
    }
    Ok(())
}

pub fn twos_complement_range(w: u32) -> (i128, i128) {
    let half = 1i128 << (w - 1);
    (-half, half - 1)
}

/// Bits of `value` in `w`-bit two's complement, bit `i` of the result being
/// `b_i`.
pub fn encode_twos_complement(value: i128, w: u32) -> Result<u128> {
    check_width(w)?;
    let (lo, hi) = twos_complement_range(w);
    if value < lo || value > hi {
        return Err(Error::OutOfRange { value, width: w });
    }
    Ok((value as u128) & ((1u128 << w) - 1))
}

/// Wrapping encode: `value mod 2^w`. Used to load constants and to read
/// accumulator contents modulo the register width.
pub fn wrap_to_width(value: i128, w: u32) -> u128 {
    if w >= 128 {
        value as u128
    } else {
        (value as u128) & ((1u128 << w) - 1)
    }
}

pub fn decode_twos_complement(bits: u128, w: u32) -> i128 {
    let bits = wrap_to_width(bits as i128, w);
    if w < 128 && bits >> (w - 1) & 1 == 1 {
        bits as i128 - (1i128 << w)
    } else {
        bits as i128
    }
}

/// MSB-first rendering, e.g. `(-2, 3)` gives `"110"`.
pub fn twos_complement_string(value: i128, w: u32) -> Result<String> {
    let bits = encode_twos_complement(value, w)?;
    Ok((0..w)
        .rev()
        .map(|i| if bits >> i & 1 == 1 { '1' } else { '0' })
        .collect())
}

/// `ceil(log2(x))` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u128) -> usize {
    if x <= 1 {
        0
    } else {
        (128 - (x - 1).leading_zeros()) as usize
    }
}

/// Qubit layout for one system: `S | F | D_2..D_{d-1} | R | E | carry | ancilla`.
///
/// `E` is recycled scratch that holds sign-extension copies while an adder
/// runs; it is zero between additions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterPlan {
    pub n: usize,
    pub m: usize,
    pub bits: usize,
    pub degree: usize,
    pub s: Vec<Span>,
    pub f: Span,
    /// `(l, span)` for `l = 2..d-1`, ascending.
    pub d: Vec<(usize, Span)>,
    pub r: Span,
    pub e: Span,
    pub carry: usize,
    pub square_ancilla: usize,
    total: usize,
}

impl RegisterPlan {
    pub fn total_qubits(&self) -> usize {
        self.total
    }

    /// Whole system register as one span (variables are adjacent).
    pub fn s_span(&self) -> Span {
        Span::new(self.s[0].offset, self.n * self.bits)
    }

    pub fn workspace(&self, level: usize) -> Result<Span> {
        self.d
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, s)| *s)
            .ok_or(Error::MissingWorkspace(level))
    }

    /// Every register and ancilla, labelled; used for structural checks.
    pub fn labelled_spans(&self) -> Vec<(String, Span)> {
        let mut out: Vec<(String, Span)> = self
            .s
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("S[{i}]"), *s))
            .collect();
        out.push(("F".into(), self.f));
        out.extend(self.d.iter().map(|(l, s)| (format!("D_{l}"), *s)));
        out.push(("R".into(), self.r));
        out.push(("E".into(), self.e));
        out.push(("carry".into(), Span::new(self.carry, 1)));
        out.push(("ancilla".into(), Span::new(self.square_ancilla, 1)));
        out
    }

    /// Spans are pairwise disjoint and tile `[0, q)` exactly.
    pub fn validate(&self) -> Result<()> {
        let mut spans: Vec<(String, Span)> = self
            .labelled_spans()
            .into_iter()
            .filter(|(_, s)| s.width > 0)
            .collect();
        spans.sort_by_key(|(_, s)| s.offset);
        let mut cursor = 0;
        for (label, s) in &spans {
            if s.offset != cursor {
                return Err(Error::OverlappingSpans(format!(
                    "{label} starts at {} but the previous register ends at {cursor}",
                    s.offset
                )));
            }
            cursor = s.end();
        }
        if cursor != self.total {
            return Err(Error::OverlappingSpans(format!(
                "registers cover {cursor} qubits, plan declares {}",
                self.total
            )));
        }
        Ok(())
    }

    /// Non-system qubits, i.e. everything that must return to zero.
    pub fn non_system_qubits(&self) -> impl Iterator<Item = usize> {
        self.s_span().end()..self.total
    }
}

/// Table-style magnitude bound `sum |c| N^|alpha|` of each equation.
pub fn equation_bounds(sys: &DiophantineSystem) -> Vec<Coeff> {
    let n_len = sys.interval_len() as Coeff;
    sys.equations()
        .iter()
        .map(|eq| {
            eq.magnitude_bound(n_len)
                .expect("magnitude bound validated at construction")
        })
        .collect()
}

/// `max_j ceil(log2(sum |c| N^|alpha|))`, the accumulator term of the qubit
/// count before sign headroom.
pub fn accumulator_term(sys: &DiophantineSystem) -> usize {
    equation_bounds(sys)
        .into_iter()
        .map(|b| ceil_log2(b as u128))
        .max()
        .unwrap_or(0)
}

/// Accumulator width: magnitude term plus the sign bit, widened further only
/// in the degenerate constant-only case where `|f|` can hit a power of two.
pub fn accumulator_width(sys: &DiophantineSystem) -> usize {
    let mut width = accumulator_term(sys) + SIGN_HEADROOM;
    let half = (sys.interval_len() / 2) as Coeff;
    let exact = sys
        .equations()
        .iter()
        .map(|eq| eq.magnitude_bound(half).expect("validated"))
        .max()
        .unwrap_or(0) as u128;
    while width < 128 && exact > (1u128 << (width - 1)) - 1 {
        width += 1;
    }
    width
}

pub fn counter_width(m: usize) -> usize {
    ceil_log2(2 * m as u128 + 1)
}

pub fn plan_registers(sys: &DiophantineSystem) -> RegisterPlan {
    let n = sys.n();
    let w = sys.bits() as usize;
    let d = sys.degree() as usize;
    let fw = accumulator_width(sys);

    let mut cursor = 0;
    let mut take = |width: usize| {
        let s = Span::new(cursor, width);
        cursor += width;
        s
    };
    let s: Vec<Span> = (0..n).map(|_| take(w)).collect();
    let f = take(fw);
    let dl: Vec<(usize, Span)> = (2..d).map(|l| (l, take(l * w))).collect();
    let r = take(counter_width(sys.m()));
    // Widest sign extension: a w-bit operand into F at shift 0, or one
    // variable's worth when extending D_{l-1} into D_l.
    let ext = fw.saturating_sub(w).max(if d >= 3 { w } else { 0 });
    let e = take(ext);
    let carry = take(1).offset;
    let square_ancilla = take(1).offset;
    RegisterPlan {
        n,
        m: sys.m(),
        bits: w,
        degree: d,
        s,
        f,
        d: dl,
        r,
        e,
        carry,
        square_ancilla,
        total: cursor,
    }
}

pub fn total_qubits(plan: &RegisterPlan) -> usize {
    plan.total_qubits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    const THREE_QUADRATICS: &str = "vars x y z\nbits 3\n\
        eq 3x^2 + 2y^2 + 5z^2 = 40\n\
        eq 2xy - 4yz + 3xz = 13\n\
        eq -x^2 + 5y - 7z = -6\n";

    #[test]
    fn encode_examples() {
        assert_eq!(twos_complement_string(-2, 3).unwrap(), "110");
        assert_eq!(twos_complement_string(0, 5).unwrap(), "00000");
        assert_eq!(twos_complement_string(-8, 4).unwrap(), "1000");
        assert!(matches!(
            encode_twos_complement(4, 3),
            Err(Error::OutOfRange { value: 4, width: 3 })
        ));
        assert!(encode_twos_complement(-5, 3).is_err());
    }

    #[test]
    fn decode_inverts_encode_exhaustively() {
        for w in 1..=16u32 {
            let (lo, hi) = twos_complement_range(w);
            for v in lo..=hi {
                let bits = encode_twos_complement(v, w).unwrap();
                assert_eq!(decode_twos_complement(bits, w), v, "w={w} v={v}");
            }
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(680), 10);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn three_quadratics_plan() {
        let sys = parse_system(THREE_QUADRATICS).unwrap();
        // eq1: 10 * 64 + 40, eq2: 9 * 64 + 13, eq3: 64 + 12 * 8 + 6
        assert_eq!(equation_bounds(&sys), vec![680, 589, 166]);
        let plan = plan_registers(&sys);
        assert_eq!(plan.s.iter().map(|s| s.width).sum::<usize>(), 9);
        assert_eq!(plan.f.width, 11);
        assert!(plan.d.is_empty());
        assert_eq!(plan.r.width, 3);
        assert_eq!(plan.e.width, 8);
        assert_eq!(plan.total_qubits(), 9 + 11 + 3 + 8 + FIXED_ANCILLAS);
        plan.validate().unwrap();
    }

    #[test]
    fn linear_single_variable_has_no_workspace() {
        let sys = parse_system("vars x\nbits 4\neq 3x = 1").unwrap();
        let plan = plan_registers(&sys);
        assert!(plan.d.is_empty());
        plan.validate().unwrap();
    }

    #[test]
    fn cubic_plan_has_one_workspace() {
        let sys = parse_system("vars x y z\nbits 2\neq 2xyz = 0\neq x^4 = 1").unwrap();
        let plan = plan_registers(&sys);
        let levels: Vec<_> = plan.d.iter().map(|(l, s)| (*l, s.width)).collect();
        assert_eq!(levels, vec![(2, 4), (3, 6)]);
        assert!(plan.workspace(4).is_err());
        plan.validate().unwrap();
    }

    #[test]
    fn degenerate_constants_get_room() {
        // f = -4: bound 4 gives term 2; -4 and +4 both need 4 bits
        let sys = parse_system("vars x\nbits 2\neq 0 = 4").unwrap();
        let fw = accumulator_width(&sys);
        assert_eq!(fw, 4);
        let zero = parse_system("vars x\nbits 2\neq 0 = 0").unwrap();
        assert_eq!(accumulator_width(&zero), 1);
    }

    #[test]
    fn accumulator_holds_every_value_and_its_negation() {
        for text in [THREE_QUADRATICS, "vars x\nbits 1\neq x = 0", "vars x y\nbits 2\neq x^3 - 2y = 1"] {
            let sys = parse_system(text).unwrap();
            let fw = accumulator_width(&sys) as u32;
            let (lo, hi) = twos_complement_range(fw);
            let size = sys.domain_size().unwrap();
            for idx in 0..size {
                let a = sys.assignment_at(idx);
                for eq in sys.equations() {
                    let v = eq.evaluate(&a).unwrap();
                    assert!(v >= lo && v <= hi && -v >= lo && -v <= hi);
                }
            }
        }
    }
}
