//! The two coefficient estimators: state learning from stabilizer-product
//! overlaps and process learning from observable expectations.
//!
//! Both run the same kernel. Draw product states `psi_j` with each qubit
//! uniform over the six Pauli eigenstates, record a scalar per state (an
//! overlap `v_j` for states, an expectation `phi_j` for processes), then for
//! every Pauli string of weight at most `l'`:
//!
//! ```text
//!   estimate_P = 3^|P| / N * sum_j value_j <psi_j|P|psi_j>
//! ```
//!
//! Averaged over the complete stabilizer ensemble this reproduces the
//! standard Pauli coefficient exactly (the `3^|P|` undoes the second moment
//! of the single-qubit ensemble); sampling replaces the exact average.
//! Coefficient sums run per string in record order with compensated
//! summation, so results do not depend on the worker count.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::oracle::{self, DensityMatrix};
use crate::pauli::{
    enumerate_low_weight, sample_stabilizer_product, stab_expectation, PauliObservable,
    PauliString, StabilizerProductState,
};
use crate::rng::{derived_rng, streams};
use crate::{Error, KahanSum, Result};

/// How record values are acquired: exactly, or through a two-outcome shot
/// model with the given number of shots per record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    Exact,
    Shots(u64),
}

impl Acquisition {
    pub fn label(&self) -> String {
        match self {
            Acquisition::Exact => "exact".into(),
            Acquisition::Shots(m) => format!("shots({m})"),
        }
    }
}

/// One dataset record: the sampled input state and its measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub state: StabilizerProductState,
    pub value: f64,
}

/// Provenance carried by learned models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerMeta {
    pub n_data: usize,
    pub acquisition: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    pauli: PauliString,
    value: f64,
}

fn coeffs_to_entries(coeffs: &BTreeMap<PauliString, f64>) -> Vec<CoeffEntry> {
    coeffs
        .iter()
        .map(|(p, v)| CoeffEntry {
            pauli: p.clone(),
            value: *v,
        })
        .collect()
}

fn entries_to_coeffs(entries: Vec<CoeffEntry>) -> BTreeMap<PauliString, f64> {
    entries.into_iter().map(|e| (e.pauli, e.value)).collect()
}

/// Learned sparse state: `rho_hat = sum_{|P| <= l'} coeffs[P] * P`.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedState {
    pub n: usize,
    pub l_prime: usize,
    pub coeffs: BTreeMap<PauliString, f64>,
    pub meta: LearnerMeta,
}

/// Learned process predictor: `f(.) = sum_{|P| <= l'} coeffs[P] Tr[P .]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedProcess {
    pub n: usize,
    pub l_prime: usize,
    pub coeffs: BTreeMap<PauliString, f64>,
    pub observable_spec: Option<PauliObservable>,
    pub meta: LearnerMeta,
}

macro_rules! learned_json {
    ($ty:ident { $($extra_field:ident : $extra_ty:ty),* }) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
                #[derive(Serialize)]
                struct Raw<'a> {
                    n: usize,
                    l_prime: usize,
                    coeffs: Vec<CoeffEntry>,
                    $($extra_field: &'a $extra_ty,)*
                    meta: &'a LearnerMeta,
                }
                Raw {
                    n: self.n,
                    l_prime: self.l_prime,
                    coeffs: coeffs_to_entries(&self.coeffs),
                    $($extra_field: &self.$extra_field,)*
                    meta: &self.meta,
                }
                .serialize(ser)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
                #[derive(Deserialize)]
                struct Raw {
                    n: usize,
                    l_prime: usize,
                    coeffs: Vec<CoeffEntry>,
                    $(#[serde(default)] $extra_field: $extra_ty,)*
                    meta: LearnerMeta,
                }
                let raw = Raw::deserialize(de)?;
                Ok($ty {
                    n: raw.n,
                    l_prime: raw.l_prime,
                    coeffs: entries_to_coeffs(raw.coeffs),
                    $($extra_field: raw.$extra_field,)*
                    meta: raw.meta,
                })
            }
        }
    };
}

learned_json!(LearnedState {});
learned_json!(LearnedProcess {
    observable_spec: Option<PauliObservable>
});

/// Truncation weight suggested by the error/noise trade-off,
/// `ceil(log(1/eps) / log(2/(1-gamma)^2))`. Guidance only; every entry point
/// accepts an explicit `l'` and never requires knowing `gamma`.
pub fn default_truncation_weight(epsilon: f64, gamma: f64) -> Result<usize> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0,1), got {epsilon}"
        )));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be in [0,1), got {gamma}"
        )));
    }
    let denom = (2.0 / (1.0 - gamma).powi(2)).ln();
    Ok(((1.0 / epsilon).ln() / denom).ceil().max(0.0) as usize)
}

/// Draw `n_data` stabilizer-product states and record their overlaps with
/// the target. Record `j` uses the seed derived from `(master_seed, j)`, so
/// the dataset is reproducible and embarrassingly parallel.
pub fn generate_qst_dataset<F>(
    overlap: F,
    n: usize,
    n_data: usize,
    acquisition: Acquisition,
    master_seed: u64,
) -> Result<Vec<SampleRecord>>
where
    F: Fn(&StabilizerProductState) -> Result<f64> + Sync,
{
    generate_dataset(overlap, n, n_data, acquisition, master_seed, 1.0)
}

/// Same sampling scheme with process outputs `phi_j = Tr[O C(psi_j)]`.
/// `value_bound` scales the two-outcome shot model (use the observable's
/// absolute-coefficient sum).
pub fn generate_qpt_dataset<F>(
    process: F,
    n: usize,
    n_data: usize,
    acquisition: Acquisition,
    master_seed: u64,
    value_bound: f64,
) -> Result<Vec<SampleRecord>>
where
    F: Fn(&StabilizerProductState) -> Result<f64> + Sync,
{
    if value_bound <= 0.0 {
        return Err(Error::InvalidParameter(
            "value bound must be positive".into(),
        ));
    }
    generate_dataset(process, n, n_data, acquisition, master_seed, value_bound)
}

fn generate_dataset<F>(
    provider: F,
    n: usize,
    n_data: usize,
    acquisition: Acquisition,
    master_seed: u64,
    bound: f64,
) -> Result<Vec<SampleRecord>>
where
    F: Fn(&StabilizerProductState) -> Result<f64> + Sync,
{
    if n_data == 0 {
        return Err(Error::EmptyDataset);
    }
    if let Acquisition::Shots(0) = acquisition {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    (0..n_data)
        .into_par_iter()
        .map(|j| {
            let mut rng = derived_rng(master_seed, streams::DATASET, j as u64);
            let state = sample_stabilizer_product(n, &mut rng);
            let exact = provider(&state)?;
            let value = match acquisition {
                Acquisition::Exact => exact,
                Acquisition::Shots(m) => oracle::binomial_estimate(exact, bound, m, &mut rng),
            };
            Ok(SampleRecord { state, value })
        })
        .collect()
}

/// Shared estimator kernel: `3^|P|/N sum_j value_j <psi_j|P|psi_j>` for every
/// string of weight at most `l_prime`, parallel over strings and
/// order-fixed within each sum.
fn estimate_coeffs(
    dataset: &[SampleRecord],
    n: usize,
    l_prime: usize,
) -> Result<BTreeMap<PauliString, f64>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for rec in dataset {
        if rec.state.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: rec.state.n(),
            });
        }
    }
    let strings: Vec<PauliString> = enumerate_low_weight(n, l_prime)?.collect();
    let inv_n = 1.0 / dataset.len() as f64;
    let coeffs: Vec<(PauliString, f64)> = strings
        .into_par_iter()
        .map(|p| {
            let weight_scale = 3.0f64.powi(p.weight() as i32);
            let mut acc = KahanSum::new();
            for rec in dataset {
                let e = stab_expectation(&rec.state, &p).expect("validated lengths");
                if e != 0 {
                    acc.add(rec.value * e as f64);
                }
            }
            let value = weight_scale * acc.value() * inv_n;
            (p, value)
        })
        .collect();
    Ok(coeffs.into_iter().collect())
}

/// State-learning estimator over a QST dataset.
pub fn estimate_state_coeffs(
    dataset: &[SampleRecord],
    n: usize,
    l_prime: usize,
    meta: LearnerMeta,
) -> Result<LearnedState> {
    Ok(LearnedState {
        n,
        l_prime,
        coeffs: estimate_coeffs(dataset, n, l_prime)?,
        meta,
    })
}

/// Process-learning estimator over a QPT dataset; same kernel, observable
/// expectations in the value channel.
pub fn estimate_process_coeffs(
    dataset: &[SampleRecord],
    n: usize,
    l_prime: usize,
    observable_spec: Option<PauliObservable>,
    meta: LearnerMeta,
) -> Result<LearnedProcess> {
    Ok(LearnedProcess {
        n,
        l_prime,
        coeffs: estimate_coeffs(dataset, n, l_prime)?,
        observable_spec,
        meta,
    })
}

/// State learning through simulated classical shadows instead of overlaps:
/// an alternative acquisition path with the same `LearnedState` contract.
pub fn shadow_estimate_state<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    l_prime: usize,
    num_shadows: usize,
    rng: &mut R,
    seed_label: u64,
) -> Result<LearnedState> {
    let n = rho.n();
    let p_list: Vec<PauliString> = enumerate_low_weight(n, l_prime)?.collect();
    let coeffs = oracle::classical_shadow_coeffs(rho, &p_list, num_shadows, rng)?;
    Ok(LearnedState {
        n,
        l_prime,
        coeffs,
        meta: LearnerMeta {
            n_data: num_shadows,
            acquisition: "shadows".into(),
            seed: seed_label,
        },
    })
}

impl LearnedState {
    /// Trace-norm error `|| rho - rho_hat ||_1` against an exact oracle
    /// state.
    pub fn reconstruct_and_score(&self, oracle_rho: &DensityMatrix) -> Result<f64> {
        if oracle_rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: oracle_rho.n(),
            });
        }
        oracle::trace_norm_error(oracle_rho, self.n, self.coeffs.iter())
    }
}

impl LearnedProcess {
    fn check_n(&self, other: usize) -> Result<()> {
        if other != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other,
            });
        }
        Ok(())
    }

    /// Predict on a stabilizer product state in `O(n)` per retained term.
    pub fn predict_stab(&self, input: &StabilizerProductState) -> Result<f64> {
        self.check_n(input.n())?;
        let mut acc = KahanSum::new();
        for (p, beta) in &self.coeffs {
            let e = stab_expectation(input, p)?;
            if e != 0 {
                acc.add(beta * e as f64);
            }
        }
        Ok(acc.value())
    }

    /// Predict on a product of single-qubit pure states given their Bloch
    /// vectors `(x, y, z)`.
    pub fn predict_bloch(&self, bloch: &[[f64; 3]]) -> Result<f64> {
        self.check_n(bloch.len())?;
        let mut acc = KahanSum::new();
        for (p, beta) in &self.coeffs {
            let mut e = 1.0;
            for (q, axis) in p.support() {
                e *= bloch[q][axis as usize];
                if e == 0.0 {
                    break;
                }
            }
            acc.add(beta * e);
        }
        Ok(acc.value())
    }

    /// Predict on an arbitrary pure state given its dense statevector.
    pub fn predict_statevector(&self, state: &[Complex64]) -> Result<f64> {
        let n = self.n;
        if state.len() != 1usize << n {
            return Err(Error::InvalidParameter(format!(
                "statevector length {} != 2^{n}",
                state.len()
            )));
        }
        let mut acc = KahanSum::new();
        for (p, beta) in &self.coeffs {
            acc.add(beta * oracle::statevector_pauli_expectation(n, state, p));
        }
        Ok(acc.value())
    }

    /// Predict on an arbitrary density matrix (oracle-side expectations).
    pub fn predict_density(&self, rho: &DensityMatrix) -> Result<f64> {
        self.check_n(rho.n())?;
        let mut acc = KahanSum::new();
        for (p, beta) in &self.coeffs {
            acc.add(beta * rho.pauli_trace(p)?.re);
        }
        Ok(acc.value())
    }
}
