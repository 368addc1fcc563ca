use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use super::state::{Real, StateVector, DEFAULT_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::oracle::{emulate_oracle, s_index, OracleBundle};
use crate::poly::{brute_force_solve_capped, Assignment, DiophantineSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Full state vector over every qubit of the plan.
    Dense,
    /// Amplitudes over S only; the oracle phase of each basis state comes from
    /// emulating the synthesized oracle, diffusion is applied exactly.
    Hybrid,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "hybrid" => Ok(Backend::Hybrid),
            other => Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
        }
    }
}

/// Success probability after each Grover step; entry 0 is the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationTrace<T: Real> {
    pub probabilities: Vec<T>,
    pub backend: Backend,
}

impl<T: Real> AmplificationTrace<T> {
    pub fn steps(&self) -> usize {
        self.probabilities.len().saturating_sub(1)
    }

    /// Step with the highest success probability (earliest on ties).
    pub fn peak(&self) -> (usize, T) {
        self.probabilities
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,success_probability,backend\n");
        for (i, p) in self.probabilities.iter().enumerate() {
            writeln!(out, "{i},{},{}", p.to_f64().unwrap_or(f64::NAN), self.backend).unwrap();
        }
        out
    }
}

/// A bundle prepared for repeated Grover runs on one backend.
pub struct GroverEngine<T: Real> {
    bundle: OracleBundle,
    backend: Backend,
    cap: usize,
    /// Oracle phase per S index (hybrid only).
    marked: Vec<bool>,
    /// Target set per S index: solutions not excluded.
    target: Vec<bool>,
    target_count: u128,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> GroverEngine<T> {
    pub fn new(bundle: OracleBundle, backend: Backend, cap: usize) -> Result<Self> {
        let s_bits = bundle.plan.s_span().width;
        let needed = match backend {
            Backend::Dense => bundle.plan.total_qubits(),
            Backend::Hybrid => s_bits,
        };
        if needed > cap {
            return Err(Error::CapExceeded { what: "state vector", needed, cap });
        }
        let solutions = brute_force_solve_capped(&bundle.system, 1u128 << s_bits)?;
        let mut target = vec![false; 1 << s_bits];
        let mut target_count = 0;
        for x in solutions.iter().filter(|x| !bundle.excluded.contains(x)) {
            target[s_index(&bundle.plan, x)? as usize] = true;
            target_count += 1;
        }
        let marked = match backend {
            Backend::Hybrid => emulate_oracle(&bundle, s_bits)?.marked,
            Backend::Dense => Vec::new(),
        };
        Ok(GroverEngine { bundle, backend, cap, marked, target, target_count, _scalar: std::marker::PhantomData })
    }

    pub fn bundle(&self) -> &OracleBundle {
        &self.bundle
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn domain_size(&self) -> u128 {
        self.target.len() as u128
    }

    /// Number of non-excluded solutions, from brute force.
    pub fn target_count(&self) -> u128 {
        self.target_count
    }

    fn s_qubits(&self) -> Vec<usize> {
        self.bundle.plan.s_span().qubits().collect()
    }

    pub fn initial_state(&self) -> Result<StateVector<T>> {
        match self.backend {
            Backend::Hybrid => StateVector::uniform(self.s_qubits(), self.cap),
            Backend::Dense => {
                let mut s = StateVector::zero((0..self.bundle.plan.total_qubits()).collect(), self.cap)?;
                for q in self.s_qubits() {
                    s.apply_gate(&crate::circuit::Gate::h(q))?;
                }
                Ok(s)
            }
        }
    }

    pub fn step(&self, state: &mut StateVector<T>) -> Result<()> {
        match self.backend {
            Backend::Hybrid => {
                state.apply_phases(&self.marked);
                state.invert_about_mean();
            }
            Backend::Dense => {
                for g in self.bundle.iteration.gates() {
                    state.apply_gate(g)?;
                }
            }
        }
        Ok(())
    }

    /// Basis index restricted to S (S occupies the lowest qubits).
    fn s_part(&self, index: usize) -> usize {
        index & (self.target.len() - 1)
    }

    pub fn success_probability(&self, state: &StateVector<T>) -> T {
        state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.target[self.s_part(*i)])
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Measures S and decodes the outcome.
    pub fn measure<R: rand::Rng + ?Sized>(&self, state: &StateVector<T>, rng: &mut R) -> Assignment {
        let index = self.s_part(state.sample(rng));
        self.bundle.s_assignment(index as u128)
    }

    /// Fresh `|psi0>` advanced by `steps` iterations.
    pub fn run(&self, steps: u64) -> Result<StateVector<T>> {
        let mut s = self.initial_state()?;
        for _ in 0..steps {
            self.step(&mut s)?;
        }
        Ok(s)
    }

    pub fn trace(&self, t_max: usize) -> Result<AmplificationTrace<T>> {
        let mut s = self.initial_state()?;
        let mut probabilities = Vec::with_capacity(t_max + 1);
        probabilities.push(self.success_probability(&s));
        for _ in 0..t_max {
            self.step(&mut s)?;
            probabilities.push(self.success_probability(&s));
        }
        Ok(AmplificationTrace { probabilities, backend: self.backend })
    }
}

pub fn grover_trace_with<T: Real>(sys: &DiophantineSystem, t_max: usize, backend: Backend, cap: usize) -> Result<AmplificationTrace<T>> {
    GroverEngine::<T>::new(OracleBundle::new(sys)?, backend, cap)?.trace(t_max)
}

pub fn grover_trace(sys: &DiophantineSystem, t_max: usize, backend: Backend) -> Result<AmplificationTrace<f64>> {
    grover_trace_with(sys, t_max, backend, DEFAULT_MAX_QUBITS)
}

fn check_counts(m: u128, domain: u128) -> Result<()> {
    if m == 0 || m > domain {
        return Err(Error::InvalidArgument(format!("need 1 <= M <= |D|, got M = {m}, |D| = {domain}")));
    }
    Ok(())
}

/// `floor(pi/4 * sqrt(|D| / M))`.
pub fn optimal_iterations(domain_size: u128, m: u128) -> Result<u64> {
    check_counts(m, domain_size)?;
    Ok((std::f64::consts::FRAC_PI_4 * (domain_size as f64 / m as f64).sqrt()).floor() as u64)
}

/// `floor(pi / (4 asin(sqrt(M / |D|))))`.
pub fn calibrated_depth(m_estimate: u128, domain_size: u128) -> Result<u64> {
    check_counts(m_estimate, domain_size)?;
    let theta = (m_estimate as f64 / domain_size as f64).sqrt().asin();
    Ok((std::f64::consts::PI / (4.0 * theta)).floor() as u64)
}

/// Ideal Grover success probability `sin^2((2t+1) theta)`.
pub fn rotation_law(m: u128, domain_size: u128, t: u64) -> f64 {
    let theta = (m as f64 / domain_size as f64).sqrt().asin();
    ((2 * t + 1) as f64 * theta).sin().powi(2)
}
