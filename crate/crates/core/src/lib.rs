//! Learning noisy quantum states and processes from low-weight Pauli
//! coefficients.
//!
//! A layered `n`-qubit circuit interleaved with i.i.d. single-qubit noise
//! concentrates its output state (and the Heisenberg image of any observable)
//! on Pauli strings of low Hamming weight. This crate implements the two
//! estimators that exploit that structure — state reconstruction from random
//! stabilizer-product overlaps and process reconstruction from observable
//! expectations — together with everything needed to verify them at desk
//! scale:
//!
//! - [`pauli`] — sparse Pauli strings, stabilizer-product states, low-weight
//!   enumeration,
//! - [`noise`] — single-qubit channels, Pauli-transfer matrices and the
//!   depolarizing/non-unital factorization,
//! - [`circuits`] — brickwork/staircase 2-design circuits, Trotterized 2D
//!   transverse-field Ising circuits, entangling input-preparation circuits,
//! - [`oracle`] — exact density-matrix evolution, adjoint (Heisenberg)
//!   evolution, overlaps, norms and classical shadows for small `n`,
//! - [`paths`] — the Pauli path integral: path coefficients, legal-path
//!   enumeration and truncated reconstructions used as an independent
//!   cross-check of the learners,
//! - [`learn`] — the state/process coefficient estimators themselves,
//! - [`experiments`] — a reproducible sweep harness (CSV/JSON output),
//!   zero-noise extrapolation and the worst-case sample lower bound.

pub mod circuits;
pub mod experiments;
pub mod learn;
pub mod noise;
pub mod oracle;
pub mod paths;
pub mod pauli;
pub mod rng;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("duplicate qubit index {0} in Pauli support")]
    DuplicateQubit(usize),
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("truncation weight {l_prime} exceeds qubit count {n}")]
    TruncationTooLarge { l_prime: usize, n: usize },
    #[error("invalid noise channel: {0}")]
    InvalidNoise(String),
    #[error("channel contracts every traceless observable to zero; effective rate would be 1")]
    FullyDepolarizing,
    #[error("non-unital channel unsupported here: {0}")]
    NonUnitalUnsupported(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("system size {n} exceeds cap {cap}")]
    SizeOverCap { n: usize, cap: usize },
    #[error("matrix is not Hermitian within tolerance {0:.1e}")]
    NotHermitian(f64),
    #[error("path has {got} cuts but depth-{depth} circuit needs {want}")]
    PathLengthMismatch { got: usize, want: usize, depth: usize },
    #[error("path enumeration exceeded the yield budget of {0}")]
    PathBudgetExceeded(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Neumaier-compensated accumulator.
///
/// Summations that feed learned coefficients must not depend on the work
/// schedule; every reduction over dataset records runs in a fixed order with
/// compensation so results are reproducible to the last bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_sum_recovers_cancellation() {
        let mut s = KahanSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }
}
