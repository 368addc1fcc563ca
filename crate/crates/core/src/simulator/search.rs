//! Randomized search on top of [`GroverEngine`]: the BBHT schedule for an
//! unknown number of solutions, a fixed-depth calibrated variant, and full
//! enumeration by repeated search with solution exclusion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::DEFAULT_MAX_QUBITS;
use super::trace::{calibrated_depth, Backend, GroverEngine};
use crate::error::{Error, Result};
use crate::oracle::{augment_exclude, OracleBundle};
use crate::poly::{Assignment, DiophantineSystem};

/// Growth factor of the BBHT depth bound.
pub const LAMBDA: f64 = 6.0 / 5.0;
/// Default query budget per search, in units of `ceil(sqrt|D|)`.
pub const DEFAULT_BUDGET_MULTIPLIER: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub backend: Backend,
    pub max_qubits: usize,
    /// Total oracle queries allowed per search; `None` means
    /// `budget_multiplier * ceil(sqrt|D|)`.
    pub budget: Option<u64>,
    pub budget_multiplier: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            backend: Backend::Hybrid,
            max_qubits: DEFAULT_MAX_QUBITS,
            budget: None,
            budget_multiplier: DEFAULT_BUDGET_MULTIPLIER,
        }
    }
}

impl SearchConfig {
    pub fn query_budget(&self, domain_size: u128) -> u64 {
        self.budget
            .unwrap_or_else(|| self.budget_multiplier * (domain_size as f64).sqrt().ceil() as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    /// Classically verified solution, if one was found.
    pub solution: Option<Assignment>,
    /// Grover iterations (oracle calls) spent across all attempts.
    pub queries: u64,
    pub attempts: u64,
    pub budget: u64,
}

impl SearchReport {
    pub fn found(&self) -> bool {
        self.solution.is_some()
    }
}

fn verified(bundle: &OracleBundle, x: &Assignment) -> Result<bool> {
    Ok(!bundle.excluded.contains(x) && bundle.system.is_solution(x)?)
}

/// BBHT: `T = 1`; draw `j` uniformly below `T`, run `j` iterations from a fresh
/// `|psi0>`, measure and verify; on failure `T <- min(lambda T, sqrt|D|)`.
pub fn bbht_with_engine<R: Rng>(engine: &GroverEngine<f64>, rng: &mut R, budget: u64) -> Result<SearchReport> {
    let bundle = engine.bundle();
    let cap = (engine.domain_size() as f64).sqrt();
    let mut bound = 1.0f64;
    let mut queries = 0u64;
    let mut attempts = 0u64;
    // zero-depth draws cost nothing, so bound the attempt count separately
    let max_attempts = 64 * budget.max(1) + 64;
    while queries < budget.max(1) && attempts < max_attempts {
        let j = rng.gen_range(0..bound.ceil().max(1.0) as u64);
        let state = engine.run(j)?;
        let candidate = engine.measure(&state, rng);
        queries += j;
        attempts += 1;
        if verified(bundle, &candidate)? {
            return Ok(SearchReport { solution: Some(candidate), queries, attempts, budget });
        }
        bound = (LAMBDA * bound).min(cap);
    }
    Ok(SearchReport { solution: None, queries, attempts, budget })
}

pub fn bbht_search(sys: &DiophantineSystem, seed: u64, cfg: &SearchConfig) -> Result<SearchReport> {
    let engine = GroverEngine::<f64>::new(OracleBundle::new(sys)?, cfg.backend, cfg.max_qubits)?;
    let budget = cfg.query_budget(engine.domain_size());
    bbht_with_engine(&engine, &mut ChaCha8Rng::seed_from_u64(seed), budget)
}

/// Repeats `L = calibrated_depth(M~, |D|)` iterations, measuring after each
/// run, until a verified solution appears or the budget is spent.
pub fn calibrated_search(sys: &DiophantineSystem, m_estimate: u128, seed: u64, cfg: &SearchConfig) -> Result<SearchReport> {
    let engine = GroverEngine::<f64>::new(OracleBundle::new(sys)?, cfg.backend, cfg.max_qubits)?;
    let depth = calibrated_depth(m_estimate, engine.domain_size())?;
    let budget = cfg.query_budget(engine.domain_size());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state = engine.run(depth)?;
    let (mut queries, mut attempts) = (0u64, 0u64);
    loop {
        queries += depth;
        attempts += 1;
        let candidate = engine.measure(&state, &mut rng);
        if verified(engine.bundle(), &candidate)? {
            return Ok(SearchReport { solution: Some(candidate), queries, attempts, budget });
        }
        if queries >= budget || attempts >= budget.max(1) {
            return Ok(SearchReport { solution: None, queries, attempts, budget });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    /// Solutions in lexicographic order.
    pub solutions: Vec<Assignment>,
    pub searches: Vec<SearchReport>,
    pub total_queries: u64,
    /// `false` when enumeration stopped on the overall query cap rather than
    /// on a full-budget search that found nothing.
    pub complete: bool,
}

/// Finds every solution by BBHT, excluding each one from the oracle once
/// found, until a search exhausts its budget.
pub fn enumerate_all(sys: &DiophantineSystem, seed: u64, cfg: &SearchConfig) -> Result<Enumeration> {
    enumerate_all_capped(sys, seed, cfg, None)
}

pub fn enumerate_all_capped(sys: &DiophantineSystem, seed: u64, cfg: &SearchConfig, total_cap: Option<u64>) -> Result<Enumeration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundle = OracleBundle::new(sys)?;
    let mut out = Enumeration { solutions: Vec::new(), searches: Vec::new(), total_queries: 0, complete: false };
    loop {
        if total_cap.is_some_and(|cap| out.total_queries >= cap) {
            break;
        }
        let engine = GroverEngine::<f64>::new(bundle, cfg.backend, cfg.max_qubits)?;
        let budget = cfg.query_budget(engine.domain_size());
        let report = bbht_with_engine(&engine, &mut rng, budget)?;
        out.total_queries += report.queries;
        let found = report.solution.clone();
        out.searches.push(report);
        match found {
            Some(x) => {
                bundle = augment_exclude(engine.bundle(), &x)?;
                out.solutions.push(x);
            }
            None => {
                out.complete = true;
                break;
            }
        }
        if out.solutions.len() as u128 == engine.domain_size() {
            out.complete = true;
            break;
        }
    }
    out.solutions.sort();
    Ok(out)
}

/// Error used by callers that treat an unfinished search as a failure.
pub fn budget_error(report: &SearchReport) -> Error {
    Error::InvalidArgument(format!(
        "no solution within {} queries ({} attempts)",
        report.budget, report.attempts
    ))
}
