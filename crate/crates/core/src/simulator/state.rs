use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Scalar type of amplitudes: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Send + Sync + Debug + Display + 'static {}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + ToPrimitive + Send + Sync + Debug + Display + 'static {}

pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Below this many amplitudes gate kernels stay on one thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Amplitudes over an ordered qubit subset; local bit `k` of an index is
/// `qubits[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    qubits: Vec<usize>,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` over `qubits`.
    pub fn zero(qubits: Vec<usize>, cap: usize) -> Result<Self> {
        Self::basis(qubits, 0, cap)
    }

    pub fn basis(qubits: Vec<usize>, index: usize, cap: usize) -> Result<Self> {
        if qubits.len() > cap {
            return Err(Error::CapExceeded { what: "state vector", needed: qubits.len(), cap });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << qubits.len()];
        if index >= amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(StateVector { qubits, amps })
    }

    /// Uniform superposition over the subset.
    pub fn uniform(qubits: Vec<usize>, cap: usize) -> Result<Self> {
        let mut s = Self::zero(qubits, cap)?;
        let a = T::one() / T::from_usize(s.amps.len()).expect("length fits").sqrt();
        s.amps.iter_mut().for_each(|x| *x = Complex::new(a, T::zero()));
        Ok(s)
    }

    pub fn from_amplitudes(qubits: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != 1 << qubits.len() {
            return Err(Error::DimensionMismatch { expected: 1 << qubits.len(), found: amps.len() });
        }
        Ok(StateVector { qubits, amps })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probability(&self, index: usize) -> T {
        self.amps[index].norm_sqr()
    }

    fn local(&self, qubit: usize) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&q| q == qubit)
            .ok_or(Error::QubitOutOfRange { qubit, limit: self.qubits.len() })
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let t = self.local(g.target)?;
        let (mut mask, mut value) = (0usize, 0usize);
        for c in &g.controls {
            let b = 1 << self.local(c.qubit)?;
            mask |= b;
            if c.positive {
                value |= b;
            }
        }
        let half = 1usize << t;
        let parallel = self.amps.len() >= PARALLEL_THRESHOLD;
        let kernel = move |base: usize, lo: &mut [Complex<T>], hi: &mut [Complex<T>]| {
            for j in 0..lo.len() {
                let i = base + j;
                if i & mask != value {
                    continue;
                }
                match g.kind {
                    GateKind::H => {
                        let s = T::FRAC_1_SQRT_2();
                        let (a, b) = (lo[j], hi[j]);
                        lo[j] = (a + b).scale(s);
                        hi[j] = (a - b).scale(s);
                    }
                    GateKind::Mcz => hi[j] = -hi[j],
                    _ => std::mem::swap(&mut lo[j], &mut hi[j]),
                }
            }
        };
        if parallel {
            self.amps.par_chunks_mut(2 * half).enumerate().for_each(|(k, chunk)| {
                let (lo, hi) = chunk.split_at_mut(half);
                kernel(k * 2 * half, lo, hi);
            });
        } else {
            self.amps.chunks_mut(2 * half).enumerate().for_each(|(k, chunk)| {
                let (lo, hi) = chunk.split_at_mut(half);
                kernel(k * 2 * half, lo, hi);
            });
        }
        Ok(())
    }

    /// Negates the amplitude of every index flagged in `marked`.
    pub fn apply_phases(&mut self, marked: &[bool]) {
        self.amps
            .par_iter_mut()
            .with_min_len(PARALLEL_THRESHOLD)
            .zip(marked.par_iter())
            .for_each(|(a, &m)| {
                if m {
                    *a = -*a;
                }
            });
    }

    /// `a <- 2 <a> - a`, the exact reflection about the uniform state.
    pub fn invert_about_mean(&mut self) {
        let n = T::from_usize(self.amps.len()).expect("length fits");
        let sum = self.amps.iter().fold(Complex::new(T::zero(), T::zero()), |acc, a| acc + a);
        let twice_mean = sum.scale((T::one() + T::one()) / n);
        self.amps
            .par_iter_mut()
            .with_min_len(PARALLEL_THRESHOLD)
            .for_each(|a| *a = twice_mean - *a);
    }

    /// Draws a basis index with probability `|amp|^2`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.amps.iter().map(|a| a.norm_sqr().to_f64().unwrap_or(0.0)).sum();
        let mut r = rng.gen::<f64>() * total;
        for (i, a) in self.amps.iter().enumerate() {
            r -= a.norm_sqr().to_f64().unwrap_or(0.0);
            if r < 0.0 {
                return i;
            }
        }
        self.amps.len() - 1
    }
}

pub fn run_circuit<T: Real>(c: &Circuit, mut state: StateVector<T>) -> Result<StateVector<T>> {
    for g in c.gates() {
        state.apply_gate(g)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{emulate_classical, BitString, Control};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_on_zero() {
        let s: StateVector<f64> = StateVector::zero(vec![0], 4).unwrap();
        let c = Circuit::from_gates(1, "h", vec![Gate::h(0)]).unwrap();
        let s = run_circuit(&c, s).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn rejects_foreign_qubits() {
        let s: StateVector<f64> = StateVector::zero(vec![0, 1], 4).unwrap();
        let c = Circuit::from_gates(3, "x", vec![Gate::x(2)]).unwrap();
        assert!(matches!(run_circuit(&c, s), Err(Error::QubitOutOfRange { qubit: 2, .. })));
        assert!(StateVector::<f64>::zero((0..5).collect(), 4).is_err());
    }

    #[test]
    fn permutations_match_classical_emulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = crate::circuit::tests::random_permutation_circuit(&mut rng, 8, 60);
        for input in [0usize, 1, 77, 200, 255] {
            let s: StateVector<f64> = StateVector::basis((0..8).collect(), input, 26).unwrap();
            let out = run_circuit(&c, s).unwrap();
            let expect = emulate_classical(&c, &BitString::from_u128(8, input as u128)).unwrap();
            let idx = expect.to_u128().unwrap() as usize;
            assert!((out.probability(idx) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_over_random_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = 15;
        let mut s: StateVector<f64> = StateVector::uniform((0..k).collect(), 26).unwrap();
        for _ in 0..10_000 {
            let t = rng.gen_range(0..k);
            let c = (t + rng.gen_range(1..k)) % k;
            let g = match rng.gen_range(0..3) {
                0 => Gate::h(t),
                1 => Gate::cnot(c, t),
                _ => Gate::mcz([Control { qubit: c, positive: rng.gen() }], t),
            };
            s.apply_gate(&g).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_works() {
        let s: StateVector<f32> = StateVector::uniform(vec![0, 1, 2], 26).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sampling_matches_born_rule() {
        let amps: Vec<Complex<f64>> = [0.1f64, 0.2, 0.3, 0.4].iter().map(|p| Complex::new(p.sqrt(), 0.0)).collect();
        let s = StateVector::from_amplitudes(vec![0, 1], amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[s.sample(&mut rng)] += 1;
        }
        for (i, p) in [0.1f64, 0.2, 0.3, 0.4].iter().enumerate() {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((counts[i] as f64 - n as f64 * p).abs() <= 3.0 * sigma, "bin {i}: {}", counts[i]);
        }
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<usize> = (0..50).map(|_| s.sample(&mut a)).collect();
        let ys: Vec<usize> = (0..50).map(|_| s.sample(&mut b)).collect();
        assert_eq!(xs, ys);
    }
}
