//! Classical-shadow acquisition simulated on an exact density matrix.
//!
//! Each shot measures every qubit in a uniformly random Pauli basis; the
//! single-shot reconstruction `(x)_j (3 U_j^dag |b_j><b_j| U_j - I)` gives an
//! unbiased estimator of `rho`, so `2^-n Tr[shadow * P]` averages to the
//! standard Pauli coefficient of `rho`. For a string `P` the shot factor is
//! `+-3^|P|` when every measured axis on the support matches and 0 otherwise.

use std::collections::{BTreeMap, HashMap};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;

use crate::pauli::{Axis, PauliString};
use crate::{Error, KahanSum, Result};

use super::{left_mul_1q, right_mul_1q, DensityMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Basis-change unitary mapping the measured axis to Z.
fn basis_rotation(axis: Axis) -> Matrix2<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = Matrix2::new(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0));
    match axis {
        Axis::Z => Matrix2::identity(),
        Axis::X => h,
        // H S^dag : maps Y eigenstates onto the computational basis.
        Axis::Y => h * Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)),
    }
}

/// Outcome probabilities of measuring every qubit of `rho` in the given axes.
fn outcome_distribution(rho: &DensityMatrix, axes: &[Axis]) -> Vec<f64> {
    let n = rho.n();
    let dim = rho.dim();
    let mut data = rho.data().to_vec();
    for (q, &axis) in axes.iter().enumerate() {
        let u = basis_rotation(axis);
        left_mul_1q(n, &mut data, q, &u);
        right_mul_1q(n, &mut data, q, &u.adjoint());
    }
    let mut probs: Vec<f64> = (0..dim).map(|i| data[i * dim + i].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in &mut probs {
            *p /= total;
        }
    }
    probs
}

/// Empirical mean of `2^-n Tr[shadow * P]` over `num_shadows` simulated
/// random-Pauli-basis shots, for every requested string. Unbiased for
/// [`super::exact_pauli_coeff`].
pub fn classical_shadow_coeffs<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    p_list: &[PauliString],
    num_shadows: usize,
    rng: &mut R,
) -> Result<BTreeMap<PauliString, f64>> {
    let n = rho.n();
    for p in p_list {
        if p.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: p.n(),
            });
        }
    }
    if num_shadows == 0 {
        return Err(Error::InvalidParameter("need at least one shadow".into()));
    }

    let scale = 1.0 / (1u64 << n) as f64;
    let mut sums: Vec<KahanSum> = vec![KahanSum::new(); p_list.len()];
    // The same axis choice recurs 3^-n of the time; cache its distribution.
    let mut dist_cache: HashMap<Vec<Axis>, Vec<f64>> = HashMap::new();

    for _ in 0..num_shadows {
        let axes: Vec<Axis> = (0..n).map(|_| Axis::ALL[rng.random_range(0..3)]).collect();
        let probs = dist_cache
            .entry(axes.clone())
            .or_insert_with(|| outcome_distribution(rho, &axes))
            .clone();
        let u: f64 = rng.random_range(0.0..1.0);
        let mut acc = 0.0;
        let mut outcome = probs.len() - 1;
        for (b, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                outcome = b;
                break;
            }
        }

        for (k, p) in p_list.iter().enumerate() {
            let mut factor = 1.0;
            for (q, axis) in p.support() {
                if axes[q] != axis {
                    factor = 0.0;
                    break;
                }
                let bit = (outcome >> (n - 1 - q)) & 1;
                factor *= if bit == 0 { 3.0 } else { -3.0 };
            }
            sums[k].add(scale * factor);
        }
    }

    Ok(p_list
        .iter()
        .cloned()
        .zip(sums.iter().map(|s| s.value() / num_shadows as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_pauli_coeff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shadow_identity_coefficient_is_exact() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let id = PauliString::identity(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = classical_shadow_coeffs(&rho, &[id.clone()], 50, &mut rng).unwrap();
        assert!((out[&id] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn shadow_zero_state_z_coefficient() {
        let rho = DensityMatrix::zero_state(1).unwrap();
        let z = PauliString::single(1, 0, Axis::Z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = classical_shadow_coeffs(&rho, &[z.clone()], 100_000, &mut rng).unwrap();
        assert!((out[&z] - 0.5).abs() < 0.02, "estimate {}", out[&z]);
    }

    #[test]
    fn shadow_mean_zero_case() {
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let x = PauliString::single(1, 0, Axis::X).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shots = 100_000;
        let out = classical_shadow_coeffs(&rho, &[x.clone()], shots, &mut rng).unwrap();
        // per-shot variance <= 3^{2|P|} * 2^{-2n}; 3 sigma band
        let sigma = (3.0f64 / shots as f64).sqrt() / 2.0;
        assert!(out[&x].abs() < 3.0 * sigma, "estimate {}", out[&x]);
    }

    #[test]
    fn shadows_are_unbiased_across_all_two_qubit_paulis() {
        // Structured 2-qubit state: evolve |00> by a fixed circuit.
        use crate::circuits::{build_random_circuit, Architecture, GateEnsemble};
        use crate::noise::NoiseChannel;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let circ =
            build_random_circuit(2, 2, Architecture::Brickwork, GateEnsemble::HaarSu4, &mut rng)
                .unwrap();
        let rho = crate::oracle::evolve_density(
            &circ,
            &NoiseChannel::Depolarizing { gamma: 0.05 },
            &DensityMatrix::zero_state(2).unwrap(),
        )
        .unwrap();
        let p_list: Vec<PauliString> = crate::pauli::enumerate_low_weight(2, 2).unwrap().collect();
        let shots = 400_000;
        let out = classical_shadow_coeffs(&rho, &p_list, shots, &mut rng).unwrap();
        for p in &p_list {
            let exact = exact_pauli_coeff(&rho, p).unwrap();
            // 4 sigma with per-shot bound 3^|P| 2^-n
            let sigma = (3.0f64.powi(p.weight() as i32) / 4.0) / (shots as f64).sqrt();
            assert!(
                (out[p] - exact).abs() < 4.0 * sigma + 1e-9,
                "P={p} est={} exact={exact}",
                out[p]
            );
        }
    }
}
