//! Pure-state trajectory fallback for registers past the dense cap.
//!
//! Keeps a 2^n statevector and samples one Kraus operator per qubit per
//! noise application with probability `||K psi||^2`, which reproduces the
//! channel in expectation. Estimates carry statistical error ~1/sqrt(runs);
//! callers surface that in their outputs.

use num_complex::Complex64;
use rand::Rng;

use crate::circuits::Circuit;
use crate::noise::NoiseChannel;
use crate::pauli::{PauliObservable, StabilizerProductState};
use crate::{Error, KahanSum, Result};

use super::{
    stabilizer_statevector, statevector_pauli_expectation, sv_apply_1q, sv_apply_gate,
};

/// Trajectory simulation is limited to this many qubits.
pub const TRAJECTORY_CAP: usize = 15;

pub struct TrajectorySim<'a> {
    circuit: &'a Circuit,
    stages: Vec<Vec<nalgebra::Matrix2<Complex64>>>,
}

impl<'a> TrajectorySim<'a> {
    pub fn new(circuit: &'a Circuit, noise: &NoiseChannel) -> Result<Self> {
        if circuit.n > TRAJECTORY_CAP {
            return Err(Error::SizeOverCap {
                n: circuit.n,
                cap: TRAJECTORY_CAP,
            });
        }
        noise.validate()?;
        Ok(TrajectorySim {
            circuit,
            stages: noise.kraus_sequence(),
        })
    }

    pub fn n(&self) -> usize {
        self.circuit.n
    }

    /// One stochastic pure-state run from `input`.
    pub fn run_once<R: Rng + ?Sized>(&self, input: &[Complex64], rng: &mut R) -> Vec<Complex64> {
        let n = self.circuit.n;
        let mut state = input.to_vec();
        for layer in &self.circuit.layers {
            for gate in layer {
                sv_apply_gate(n, &mut state, gate);
            }
            for q in 0..n {
                for stage in &self.stages {
                    sample_kraus(n, &mut state, q, stage, rng);
                }
            }
        }
        state
    }

    /// Monte-Carlo estimate of `Tr[O C(|input><input|)]` with its standard
    /// error.
    pub fn estimate_expectation<R: Rng + ?Sized>(
        &self,
        obs: &PauliObservable,
        input: &[Complex64],
        runs: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if obs.n() != self.circuit.n {
            return Err(Error::DimensionMismatch {
                left: self.circuit.n,
                right: obs.n(),
            });
        }
        if runs == 0 {
            return Err(Error::InvalidParameter("need at least one run".into()));
        }
        let mut sum = KahanSum::new();
        let mut sumsq = KahanSum::new();
        for _ in 0..runs {
            let state = self.run_once(input, rng);
            let mut v = 0.0;
            for (coeff, p) in obs.terms() {
                v += coeff * statevector_pauli_expectation(self.circuit.n, &state, p);
            }
            sum.add(v);
            sumsq.add(v * v);
        }
        let mean = sum.value() / runs as f64;
        let var = (sumsq.value() / runs as f64 - mean * mean).max(0.0);
        Ok((mean, (var / runs as f64).sqrt()))
    }

    /// Monte-Carlo estimate of `<psi|C(|input><input|)|psi>` with standard
    /// error.
    pub fn estimate_overlap<R: Rng + ?Sized>(
        &self,
        psi: &StabilizerProductState,
        input: &[Complex64],
        runs: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if psi.n() != self.circuit.n {
            return Err(Error::DimensionMismatch {
                left: self.circuit.n,
                right: psi.n(),
            });
        }
        if runs == 0 {
            return Err(Error::InvalidParameter("need at least one run".into()));
        }
        let target = stabilizer_statevector(psi);
        let mut sum = KahanSum::new();
        let mut sumsq = KahanSum::new();
        for _ in 0..runs {
            let state = self.run_once(input, rng);
            let ip: Complex64 = target
                .iter()
                .zip(&state)
                .map(|(t, s)| t.conj() * s)
                .sum();
            let v = ip.norm_sqr();
            sum.add(v);
            sumsq.add(v * v);
        }
        let mean = sum.value() / runs as f64;
        let var = (sumsq.value() / runs as f64 - mean * mean).max(0.0);
        Ok((mean, (var / runs as f64).sqrt()))
    }

    /// Purity estimate `Tr[rho^2]` from disjoint trajectory pairs,
    /// `E |<psi_a|psi_b>|^2 = Tr[rho^2]`.
    pub fn estimate_purity<R: Rng + ?Sized>(
        &self,
        input: &[Complex64],
        pairs: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if pairs == 0 {
            return Err(Error::InvalidParameter("need at least one pair".into()));
        }
        let mut sum = KahanSum::new();
        let mut sumsq = KahanSum::new();
        for _ in 0..pairs {
            let a = self.run_once(input, rng);
            let b = self.run_once(input, rng);
            let ip: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            let v = ip.norm_sqr();
            sum.add(v);
            sumsq.add(v * v);
        }
        let mean = sum.value() / pairs as f64;
        let var = (sumsq.value() / pairs as f64 - mean * mean).max(0.0);
        Ok((mean, (var / pairs as f64).sqrt()))
    }
}

fn sample_kraus<R: Rng + ?Sized>(
    n: usize,
    state: &mut [Complex64],
    q: usize,
    kraus: &[nalgebra::Matrix2<Complex64>],
    rng: &mut R,
) {
    if kraus.len() == 1 {
        sv_apply_1q(n, state, q, &kraus[0]);
        return;
    }
    let mask = 1usize << (n - 1 - q);
    // ||K psi||^2 for each K without materializing the images.
    let mut probs = Vec::with_capacity(kraus.len());
    for k in kraus {
        let mut norm = 0.0;
        for i in 0..state.len() {
            if i & mask != 0 {
                continue;
            }
            let a = state[i];
            let b = state[i | mask];
            norm += (k[(0, 0)] * a + k[(0, 1)] * b).norm_sqr();
            norm += (k[(1, 0)] * a + k[(1, 1)] * b).norm_sqr();
        }
        probs.push(norm);
    }
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random_range(0.0..1.0) * total;
    let mut acc = 0.0;
    let mut chosen = kraus.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            chosen = i;
            break;
        }
    }
    sv_apply_1q(n, state, q, &kraus[chosen]);
    let norm = probs[chosen].sqrt();
    if norm > 0.0 {
        let inv = Complex64::new(1.0 / norm, 0.0);
        for z in state.iter_mut() {
            *z *= inv;
        }
    }
}
