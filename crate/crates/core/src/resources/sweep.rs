//! Synthesis-only sweeps: build the Grover iteration for many systems, price
//! it, and regress cost against qubit count.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cost::{toffoli_equiv_cost, InstanceDescriptor, Rational};
use super::fit::{fit_linear, fit_loglog, LinearFit};
use super::instance::{random_instance, InstanceParams};
use super::model::qubit_count_model;
use crate::error::Result;
use crate::oracle::OracleBundle;
use crate::poly::{Coeff, DiophantineSystem, Polynomial};

pub const CSV_HEADER: &str = "instance_id,seed,n,d,N,m,lambda,sum_hamming,q_planned,q_model,ccx,mcx_toffoli_equiv,total_toffoli_equiv";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub instance_id: usize,
    pub seed: u64,
    pub n: usize,
    pub d: u32,
    pub interval_len: u64,
    pub m: usize,
    pub lambda: u64,
    pub sum_hamming: u64,
    pub q_planned: usize,
    pub q_model: usize,
    pub ccx: u64,
    pub mcx_toffoli_equiv: u64,
    pub total_toffoli_equiv: Rational,
}

impl SweepRow {
    pub fn total_f64(&self) -> f64 {
        *self.total_toffoli_equiv.numer() as f64 / *self.total_toffoli_equiv.denom() as f64
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.seed,
            self.n,
            self.d,
            self.interval_len,
            self.m,
            self.lambda,
            self.sum_hamming,
            self.q_planned,
            self.q_model,
            self.ccx,
            self.mcx_toffoli_equiv,
            self.total_toffoli_equiv
        )
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_line()).unwrap();
    }
    out
}

/// Synthesizes the full Grover iteration for `sys` and prices it.
pub fn evaluate_instance(instance_id: usize, seed: u64, sys: &DiophantineSystem) -> Result<SweepRow> {
    let bundle = OracleBundle::new(sys)?;
    let cost = toffoli_equiv_cost(&bundle.iteration);
    let desc = InstanceDescriptor::of(sys);
    Ok(SweepRow {
        instance_id,
        seed,
        n: desc.n,
        d: desc.d,
        interval_len: desc.interval_len,
        m: desc.m,
        lambda: desc.lambda,
        sum_hamming: desc.sum_hamming,
        q_planned: bundle.plan.total_qubits(),
        q_model: qubit_count_model(sys).total(),
        ccx: cost.ccx_count,
        mcx_toffoli_equiv: cost.mcx_toffoli_equiv,
        total_toffoli_equiv: cost.toffoli_equiv,
    })
}

/// Instance distribution of a random sweep. Each row draws `n`, `d`, `m`
/// uniformly from the inclusive ranges and `bits` from the list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub instances: usize,
    pub n: (usize, usize),
    pub d: (u32, u32),
    pub bits: Vec<u32>,
    pub m: (usize, usize),
    pub coeff_magnitude: (Coeff, Coeff),
    pub terms: (usize, usize),
    pub constant_term: bool,
    pub cover_variables: bool,
}

impl SweepConfig {
    /// 1500 instances over `n, d` in `[1, 7]`. Each equation is one monomial
    /// of degree `d`, a linear term for every variable it misses, and a
    /// constant, so every declared variable is constrained.
    pub fn global() -> Self {
        SweepConfig {
            instances: 1500,
            n: (1, 7),
            d: (1, 7),
            bits: vec![2, 3, 4],
            m: (1, 3),
            coeff_magnitude: (1, 15),
            terms: (1, 1),
            constant_term: true,
            cover_variables: true,
        }
    }

    pub fn row_seed(seed: u64, instance_id: usize) -> u64 {
        seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (instance_id as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
    }

    pub fn params_for(&self, row_seed: u64) -> InstanceParams {
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed ^ 0x5EED);
        InstanceParams {
            n: rng.gen_range(self.n.0..=self.n.1),
            d: rng.gen_range(self.d.0..=self.d.1),
            bits: self.bits[rng.gen_range(0..self.bits.len())],
            m: rng.gen_range(self.m.0..=self.m.1),
            coeff_magnitude: self.coeff_magnitude,
            terms: self.terms,
            constant_term: self.constant_term,
            cover_variables: self.cover_variables,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `(instance_id, seed, error)` for rows that failed to synthesize.
    pub failures: Vec<(usize, u64, String)>,
    /// Log-log fit of total Toffoli equivalents against planned qubits.
    pub fit: Option<LinearFit<f64>>,
}

impl SweepOutcome {
    pub fn csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub fn exponent_fit(rows: &[SweepRow]) -> Result<LinearFit<f64>> {
    let xs: Vec<f64> = rows.iter().map(|r| r.q_planned as f64).collect();
    let ys: Vec<f64> = rows.iter().map(SweepRow::total_f64).collect();
    fit_loglog(&xs, &ys)
}

/// Rows are synthesized in parallel and emitted in instance order.
pub fn sweep_and_fit(cfg: &SweepConfig, seed: u64) -> SweepOutcome {
    let results: Vec<(usize, u64, Result<SweepRow>)> = (0..cfg.instances)
        .into_par_iter()
        .map(|id| {
            let row_seed = SweepConfig::row_seed(seed, id);
            let row = random_instance(&cfg.params_for(row_seed), row_seed)
                .and_then(|sys| evaluate_instance(id, row_seed, &sys));
            (id, row_seed, row)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (id, s, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((id, s, e.to_string())),
        }
    }
    let fit = exponent_fit(&rows).ok();
    SweepOutcome { rows, failures, fit }
}

fn single_equation(n: usize, bits: u32, terms: Vec<(Coeff, Vec<u32>)>) -> Result<DiophantineSystem> {
    let names = (0..n).map(|i| format!("x{i}")).collect();
    DiophantineSystem::new(names, vec![Polynomial::new(n, terms)?], bits)
}

/// `c x = c` with `c = 2^k - 1`, i.e. coefficient Hamming weight `k`, across
/// variable widths. One `(weight, rows)` group per requested weight.
pub fn linear_stratum(weights: &[u32], bits: &[u32]) -> Result<Vec<(u32, Vec<SweepRow>)>> {
    weights
        .iter()
        .map(|&k| {
            let c: Coeff = (1 << k) - 1;
            let rows = bits
                .iter()
                .enumerate()
                .map(|(i, &w)| evaluate_instance(i, 0, &single_equation(1, w, vec![(c, vec![1]), (-c, vec![0])])?))
                .collect::<Result<Vec<_>>>()?;
            Ok((k, rows))
        })
        .collect()
}

/// Per-weight linear fits of cost against `q`.
pub fn linear_stratum_fits(groups: &[(u32, Vec<SweepRow>)]) -> Result<Vec<(u32, LinearFit<f64>)>> {
    groups
        .iter()
        .map(|(k, rows)| {
            let xs: Vec<f64> = rows.iter().map(|r| r.q_planned as f64).collect();
            let ys: Vec<f64> = rows.iter().map(SweepRow::total_f64).collect();
            Ok((*k, fit_linear(&xs, &ys)?))
        })
        .collect()
}

/// `c x^2 - 2 x = 1` with `c = 2^k - 1`, one `(weight, rows)` group per
/// requested leading-coefficient weight `k`.
pub fn quadratic_stratum(weights: &[u32], bits: &[u32]) -> Result<Vec<(u32, Vec<SweepRow>)>> {
    weights
        .iter()
        .map(|&k| {
            let c: Coeff = (1 << k) - 1;
            let rows = bits
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    evaluate_instance(i, 0, &single_equation(1, w, vec![(c, vec![2]), (-2, vec![1]), (-1, vec![0])])?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((k, rows))
        })
        .collect()
}

/// `m` copies of the cubic `3 x^2 y - 5 x y + 7 = 0`, so every equation
/// carries the same coefficient weight.
pub fn equation_count_stratum(bits: u32, ms: &[usize]) -> Result<Vec<SweepRow>> {
    ms.iter()
        .enumerate()
        .map(|(i, &m)| {
            let eq = Polynomial::new(2, vec![(3, vec![2, 1]), (-5, vec![1, 1]), (7, vec![0, 0])])?;
            let sys = DiophantineSystem::new(vec!["x".into(), "y".into()], vec![eq; m], bits)?;
            evaluate_instance(i, 0, &sys)
        })
        .collect()
}

/// Cumulative Hamming weight of the linear part of [`variable_count_stratum`].
pub const STRATUM_WEIGHT: u32 = 7;

/// Degree of [`variable_count_stratum`] systems.
pub const STRATUM_DEGREE: u32 = 4;

/// `3 x0 x1 x2 x3 + sum_i (2^{k_i} - 1) x_i = 1` over `n >= 4` variables, the
/// weights `k_i` splitting [`STRATUM_WEIGHT`] as evenly as possible so the
/// cumulative coefficient weight does not depend on `n`.
pub fn variable_count_stratum(n: usize, bits: &[u32]) -> Result<Vec<SweepRow>> {
    let d = STRATUM_DEGREE as usize;
    if n < d || n > STRATUM_WEIGHT as usize {
        return Err(crate::error::Error::InvalidArgument(format!(
            "variable count {n} outside {d}..={STRATUM_WEIGHT}"
        )));
    }
    let mut lead = vec![0u32; n];
    lead[..d].iter_mut().for_each(|e| *e = 1);
    let mut terms: Vec<(Coeff, Vec<u32>)> = vec![(3, lead)];
    for i in 0..n {
        let k = STRATUM_WEIGHT as usize / n + usize::from(i < STRATUM_WEIGHT as usize % n);
        let mut e = vec![0u32; n];
        e[i] = 1;
        terms.push((((1 as Coeff) << k) - 1, e));
    }
    terms.push((-1, vec![0; n]));
    bits.iter()
        .enumerate()
        .map(|(i, &w)| evaluate_instance(i, 0, &single_equation(n, w, terms.clone())?))
        .collect()
}
