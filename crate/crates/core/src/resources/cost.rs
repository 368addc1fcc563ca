use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::circuit::{Circuit, GateCounts};
use crate::poly::{hamming_weight, lambda_penalty, DiophantineSystem};

pub type Rational = Ratio<u64>;

/// Toffoli equivalents of an MCX with `n_c` controls under the linear-depth
/// decomposition: free below two controls, one Toffoli at two, `2 n_c - 3` above.
pub fn mcx_cost(n_c: usize) -> u64 {
    match n_c {
        0 | 1 => 0,
        2 => 1,
        n => 2 * n as u64 - 3,
    }
}

/// Seven T-type gates count as one Toffoli.
pub fn t_cost(t: u64, t_dagger: u64) -> Rational {
    Ratio::new(t + t_dagger, 7)
}

/// Shape of the system a report was computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDescriptor {
    pub n: usize,
    pub d: u32,
    pub interval_len: u64,
    pub m: usize,
    pub lambda: u64,
    pub sum_hamming: u64,
    pub max_hamming: u32,
}

impl InstanceDescriptor {
    pub fn of(sys: &DiophantineSystem) -> Self {
        let weights: Vec<u32> = sys
            .equations()
            .iter()
            .flat_map(|eq| eq.monomials())
            .map(|m| hamming_weight(m.coefficient))
            .collect();
        InstanceDescriptor {
            n: sys.n(),
            d: sys.degree(),
            interval_len: sys.interval_len(),
            m: sys.m(),
            lambda: lambda_penalty(sys),
            sum_hamming: weights.iter().map(|&w| w as u64).sum(),
            max_hamming: weights.into_iter().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub toffoli_equiv: Rational,
    /// `sum C_MCX` over MCX and MCZ gates (MCZ priced as MCX of equal arity).
    pub mcx_toffoli_equiv: u64,
    /// Multi-controlled gates (MCX and MCZ) by control count.
    pub mcx_histogram: BTreeMap<usize, u64>,
    pub ccx_count: u64,
    pub t_count: u64,
    pub t_dagger_count: u64,
    pub qubits: usize,
    pub sections: Vec<(String, Rational)>,
    pub descriptor: Option<InstanceDescriptor>,
}

fn multi_controlled(counts: &GateCounts) -> BTreeMap<usize, u64> {
    let mut h = counts.mcx.clone();
    for (k, v) in &counts.mcz {
        *h.entry(*k).or_default() += v;
    }
    h
}

/// `sum C_MCX + C_T + N_CCX` for a census.
pub fn counts_cost(counts: &GateCounts, t: u64, t_dagger: u64) -> Rational {
    let mcx: u64 = multi_controlled(counts).iter().map(|(&k, &v)| mcx_cost(k) * v).sum();
    Ratio::from_integer(mcx + counts.ccx) + t_cost(t, t_dagger)
}

impl CostReport {
    pub fn from_counts(counts: &GateCounts, t: u64, t_dagger: u64, qubits: usize) -> Self {
        let mcx_histogram = multi_controlled(counts);
        CostReport {
            toffoli_equiv: counts_cost(counts, t, t_dagger),
            mcx_toffoli_equiv: mcx_histogram.iter().map(|(&k, &v)| mcx_cost(k) * v).sum(),
            mcx_histogram,
            ccx_count: counts.ccx,
            t_count: t,
            t_dagger_count: t_dagger,
            qubits,
            sections: Vec::new(),
            descriptor: None,
        }
    }

    pub fn with_descriptor(mut self, sys: &DiophantineSystem) -> Self {
        self.descriptor = Some(InstanceDescriptor::of(sys));
        self
    }

    /// Toffoli equivalents as a float, for fitting.
    pub fn total_f64(&self) -> f64 {
        *self.toffoli_equiv.numer() as f64 / *self.toffoli_equiv.denom() as f64
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(out, "qubits {}", self.qubits).unwrap();
        writeln!(out, "toffoli_equiv {}", self.toffoli_equiv).unwrap();
        writeln!(out, "ccx {}", self.ccx_count).unwrap();
        writeln!(out, "mcx_toffoli_equiv {}", self.mcx_toffoli_equiv).unwrap();
        writeln!(out, "t {} tdg {}", self.t_count, self.t_dagger_count).unwrap();
        for (k, v) in &self.mcx_histogram {
            writeln!(out, "mcx_arity {k} {v}").unwrap();
        }
        if let Some(d) = &self.descriptor {
            writeln!(
                out,
                "instance n={} d={} N={} m={} lambda={} sum_hamming={} max_hamming={}",
                d.n, d.d, d.interval_len, d.m, d.lambda, d.sum_hamming, d.max_hamming
            )
            .unwrap();
        }
        for (label, cost) in &self.sections {
            writeln!(out, "section {label} {cost}").unwrap();
        }
        out
    }
}

/// Census-driven cost of a circuit. Synthesis emits no bare T gates.
pub fn toffoli_equiv_cost(c: &Circuit) -> CostReport {
    let census = c.census();
    let mut report = CostReport::from_counts(&census.total, 0, 0, c.qubit_count());
    report.sections = census.sections.iter().map(|(l, counts)| (l.clone(), counts_cost(counts, 0, 0))).collect();
    report
}
