use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{Coeff, DiophantineSystem, Polynomial, MAX_BITS, MAX_DEGREE, MAX_VARS};

/// Shape of a random system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceParams {
    pub n: usize,
    pub d: u32,
    pub bits: u32,
    pub m: usize,
    /// Inclusive range of coefficient magnitudes; signs are uniform.
    pub coeff_magnitude: (Coeff, Coeff),
    /// Inclusive range of non-constant monomials drawn per equation. The
    /// first is always of degree exactly `d`.
    pub terms: (usize, usize),
    pub constant_term: bool,
    /// Add a linear term for every variable the drawn monomials miss.
    pub cover_variables: bool,
}

impl InstanceParams {
    pub fn new(n: usize, d: u32, bits: u32, m: usize) -> Self {
        InstanceParams { n, d, bits, m, coeff_magnitude: (1, 9), terms: (1, 3), constant_term: true, cover_variables: false }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 || self.n > MAX_VARS {
            return bad(format!("n = {} outside 1..={MAX_VARS}", self.n));
        }
        if self.d == 0 || self.d > MAX_DEGREE {
            return bad(format!("d = {} outside 1..={MAX_DEGREE}", self.d));
        }
        if self.bits == 0 || self.bits > MAX_BITS {
            return bad(format!("bits = {} outside 1..={MAX_BITS}", self.bits));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        let (lo, hi) = self.coeff_magnitude;
        if lo < 1 || lo > hi {
            return bad(format!("coefficient range [{lo}, {hi}] is empty or contains zero"));
        }
        if self.terms.0 == 0 || self.terms.0 > self.terms.1 {
            return bad(format!("term range {:?} is empty", self.terms));
        }
        Ok(())
    }
}

fn random_exponents(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for _ in 0..degree {
        e[rng.gen_range(0..n)] += 1;
    }
    e
}

fn random_coeff(rng: &mut ChaCha8Rng, (lo, hi): (Coeff, Coeff)) -> Coeff {
    let mag = rng.gen_range(lo..=hi);
    *[mag, -mag].choose(rng).expect("non-empty")
}

/// Seed-deterministic system whose every equation has a monomial of degree
/// exactly `d`.
pub fn random_instance(params: &InstanceParams, seed: u64) -> Result<DiophantineSystem> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n;
    let mut equations = Vec::with_capacity(params.m);
    for _ in 0..params.m {
        // merging can cancel the leading monomial; redraw until it survives
        let poly = loop {
            let k = rng.gen_range(params.terms.0..=params.terms.1);
            let mut terms = Vec::with_capacity(k + 1);
            terms.push((random_coeff(&mut rng, params.coeff_magnitude), random_exponents(&mut rng, n, params.d)));
            for _ in 1..k {
                let deg = rng.gen_range(1..=params.d);
                terms.push((random_coeff(&mut rng, params.coeff_magnitude), random_exponents(&mut rng, n, deg)));
            }
            if params.cover_variables {
                for v in 0..n {
                    if terms.iter().all(|(_, e)| e[v] == 0) {
                        let mut e = vec![0u32; n];
                        e[v] = 1;
                        terms.push((random_coeff(&mut rng, params.coeff_magnitude), e));
                    }
                }
            }
            if params.constant_term {
                terms.push((random_coeff(&mut rng, params.coeff_magnitude), vec![0; n]));
            }
            let p = Polynomial::new(n, terms)?;
            if p.degree() == params.d {
                break p;
            }
        };
        equations.push(poly);
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    DiophantineSystem::new(names, equations, params.bits)
}
