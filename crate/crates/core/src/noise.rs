//! Single-qubit noise channels, their Pauli-transfer matrices and the
//! factorization of a non-unital channel into a depolarizing part and a
//! (non-physical) remainder whose adjoint fixes the identity.
//!
//! PTM convention: `T[i][j] = 1/2 Tr[P_i E(P_j)]` in the basis order
//! `(I, X, Y, Z)`, so `E(P_j) = sum_i T[i][j] P_i` and composition is the
//! ordinary matrix product with column-vector action. The adjoint channel's
//! PTM is the transpose.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const B_I: usize = 0;
pub const B_X: usize = 1;
pub const B_Y: usize = 2;
pub const B_Z: usize = 3;

/// Single-qubit noise channel. `Composed` applies its parts left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseChannel {
    Depolarizing { gamma: f64 },
    Pauli { gammas: [f64; 4] },
    AmplitudeDamping { gamma: f64 },
    Composed { parts: Vec<NoiseChannel> },
}

impl NoiseChannel {
    pub fn identity() -> Self {
        NoiseChannel::Depolarizing { gamma: 0.0 }
    }

    /// The depolarizing + amplitude-damping mixture, applied in that order
    /// per qubit per layer.
    pub fn mixture(gamma_depolarizing: f64, gamma_damping: f64) -> Self {
        NoiseChannel::Composed {
            parts: vec![
                NoiseChannel::Depolarizing {
                    gamma: gamma_depolarizing,
                },
                NoiseChannel::AmplitudeDamping {
                    gamma: gamma_damping,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseChannel::Depolarizing { gamma } | NoiseChannel::AmplitudeDamping { gamma } => {
                if !(0.0..1.0).contains(gamma) {
                    return Err(Error::InvalidNoise(format!(
                        "gamma must lie in [0, 1), got {gamma}"
                    )));
                }
            }
            NoiseChannel::Pauli { gammas } => {
                if gammas.iter().any(|g| *g < 0.0) {
                    return Err(Error::InvalidNoise("Pauli rates must be non-negative".into()));
                }
                let sum: f64 = gammas.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidNoise(format!(
                        "Pauli rates must sum to 1 (got {sum})"
                    )));
                }
            }
            NoiseChannel::Composed { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidNoise("composed channel needs parts".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Short tag used in result tables.
    pub fn kind_tag(&self) -> String {
        match self {
            NoiseChannel::Depolarizing { .. } => "depolarizing".into(),
            NoiseChannel::Pauli { .. } => "pauli".into(),
            NoiseChannel::AmplitudeDamping { .. } => "amplitude_damping".into(),
            NoiseChannel::Composed { parts } => {
                let inner: Vec<String> = parts.iter().map(|p| p.kind_tag()).collect();
                format!("composed({})", inner.join("+"))
            }
        }
    }

    /// Representative strength for reporting: the channel's effective
    /// depolarizing rate.
    pub fn representative_gamma(&self) -> f64 {
        match self {
            NoiseChannel::Depolarizing { gamma } | NoiseChannel::AmplitudeDamping { gamma } => *gamma,
            _ => effective_depolarizing_rate(self).unwrap_or(1.0),
        }
    }

    /// Kraus operators of each sequential stage, in application order.
    pub fn kraus_sequence(&self) -> Vec<Vec<Matrix2<Complex64>>> {
        fn c(x: f64) -> Complex64 {
            Complex64::new(x, 0.0)
        }
        match self {
            NoiseChannel::Depolarizing { gamma } => {
                let g = *gamma;
                vec![vec![
                    Matrix2::identity() * c((1.0 - 0.75 * g).sqrt()),
                    pauli_mat2(B_X) * c((g / 4.0).sqrt()),
                    pauli_mat2(B_Y) * c((g / 4.0).sqrt()),
                    pauli_mat2(B_Z) * c((g / 4.0).sqrt()),
                ]]
            }
            NoiseChannel::Pauli { gammas } => vec![(0..4)
                .filter(|&i| gammas[i] > 0.0)
                .map(|i| pauli_mat2(i) * c(gammas[i].sqrt()))
                .collect()],
            NoiseChannel::AmplitudeDamping { gamma } => {
                let g = *gamma;
                let k0 = Matrix2::new(c(1.0), c(0.0), c(0.0), c((1.0 - g).sqrt()));
                let k1 = Matrix2::new(c(0.0), c(g.sqrt()), c(0.0), c(0.0));
                vec![vec![k0, k1]]
            }
            NoiseChannel::Composed { parts } => {
                parts.iter().flat_map(|p| p.kraus_sequence()).collect()
            }
        }
    }
}

/// Standard single-qubit Pauli matrix for basis index 0..3.
pub fn pauli_mat2(i: usize) -> Matrix2<Complex64> {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let im = Complex64::new(0.0, 1.0);
    match i {
        B_I => Matrix2::new(o, z, z, o),
        B_X => Matrix2::new(z, o, o, z),
        B_Y => Matrix2::new(z, -im, im, z),
        B_Z => Matrix2::new(o, z, z, -o),
        _ => unreachable!("Pauli basis index"),
    }
}

/// 4x4 Pauli-transfer matrix in the (I, X, Y, Z) basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix(pub [[f64; 4]; 4]);

impl TransferMatrix {
    pub fn identity() -> Self {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        TransferMatrix(t)
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in t.iter_mut().enumerate() {
            row[i] = d[i];
        }
        TransferMatrix(t)
    }

    pub fn matmul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for (k, rhs_row) in rhs.0.iter().enumerate() {
                    acc += self.0[i][k] * rhs_row[j];
                }
                out[i][j] = acc;
            }
        }
        TransferMatrix(out)
    }

    pub fn transpose(&self) -> TransferMatrix {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[j][i] = *v;
            }
        }
        TransferMatrix(out)
    }

    pub fn max_abs_diff(&self, rhs: &TransferMatrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - rhs.0[i][j]).abs());
            }
        }
        m
    }

    /// True when the PTM is diagonal with unit identity action, i.e. the
    /// channel is a Pauli-diagonal unital channel.
    pub fn is_unital_diagonal(&self, tol: f64) -> bool {
        for i in 0..4 {
            for j in 0..4 {
                if i != j && self.0[i][j].abs() > tol {
                    return false;
                }
            }
        }
        (self.0[0][0] - 1.0).abs() <= tol
    }
}

/// Factorization `E = E_depo^gamma_eff o E_prime`, with `E_prime` generally
/// non-physical but adjoint-unital and Frobenius-contractive on traceless
/// inputs.
#[derive(Clone, Copy, Debug)]
pub struct NonUnitalDecomposition {
    pub gamma_eff: f64,
    pub e_prime: TransferMatrix,
}

/// Exact PTM of a channel; `Composed` is the ordered matrix product.
pub fn transfer_matrix(ch: &NoiseChannel) -> TransferMatrix {
    match ch {
        NoiseChannel::Depolarizing { gamma } => {
            let l = 1.0 - gamma;
            TransferMatrix::diagonal([1.0, l, l, l])
        }
        NoiseChannel::Pauli { gammas } => {
            let [_, g2, g3, g4] = *gammas;
            TransferMatrix::diagonal([
                1.0,
                1.0 - 2.0 * (g3 + g4),
                1.0 - 2.0 * (g2 + g4),
                1.0 - 2.0 * (g2 + g3),
            ])
        }
        NoiseChannel::AmplitudeDamping { gamma } => {
            let g = *gamma;
            let s = (1.0 - g).sqrt();
            TransferMatrix([
                [1.0, 0.0, 0.0, 0.0],
                [0.0, s, 0.0, 0.0],
                [0.0, 0.0, s, 0.0],
                [g, 0.0, 0.0, 1.0 - g],
            ])
        }
        NoiseChannel::Composed { parts } => {
            let mut t = TransferMatrix::identity();
            for p in parts {
                // parts apply left to right: T = T(p_k) ... T(p_1)
                t = transfer_matrix(p).matmul(&t);
            }
            t
        }
    }
}

/// PTM of the adjoint channel: the transpose in this real basis.
pub fn adjoint_transfer_matrix(ch: &NoiseChannel) -> TransferMatrix {
    transfer_matrix(ch).transpose()
}

/// Effective depolarizing rate `gamma_eff = 1 - chi` where `chi` is the
/// largest Frobenius contraction of the adjoint channel over unit-norm
/// traceless observables, identity leakage included: the top singular value
/// of the adjoint PTM restricted to traceless input components.
pub fn effective_depolarizing_rate(ch: &NoiseChannel) -> Result<f64> {
    ch.validate()?;
    let t = transfer_matrix(ch);
    // Column p of m is the component vector of E^dag(P_p) over (I,X,Y,Z),
    // which is row p of T(E).
    let mut m = DMatrix::<f64>::zeros(4, 3);
    for (col, p) in [B_X, B_Y, B_Z].into_iter().enumerate() {
        for i in 0..4 {
            m[(i, col)] = t.0[p][i];
        }
    }
    let svd = m.svd(false, false);
    let chi = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    if chi <= 1e-9 {
        return Err(Error::FullyDepolarizing);
    }
    Ok((1.0 - chi).max(0.0))
}

/// Split `E = E_depo^gamma_eff o E_prime` by rescaling the traceless action
/// and moving the identity deficit into `E_prime(I)`.
pub fn decompose_non_unital(ch: &NoiseChannel) -> Result<NonUnitalDecomposition> {
    let gamma_eff = effective_depolarizing_rate(ch)?;
    if gamma_eff >= 1.0 - 1e-9 {
        return Err(Error::FullyDepolarizing);
    }
    let t = transfer_matrix(ch);
    let scale = 1.0 - gamma_eff;
    let mut e = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 1..4 {
            e[i][j] = t.0[i][j] / scale;
        }
        let delta = if i == B_I { gamma_eff } else { 0.0 };
        e[i][B_I] = (t.0[i][B_I] - delta) / scale;
    }
    Ok(NonUnitalDecomposition {
        gamma_eff,
        e_prime: TransferMatrix(e),
    })
}

/// Recompose a decomposition into the PTM it should reproduce.
pub fn recompose(d: &NonUnitalDecomposition) -> TransferMatrix {
    let depo = transfer_matrix(&NoiseChannel::Depolarizing { gamma: d.gamma_eff });
    depo.matmul(&d.e_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent PTM route: T[i][j] = 1/2 Tr[P_i sum_k K_k P_j K_k^dag].
    fn ptm_from_kraus(ch: &NoiseChannel) -> TransferMatrix {
        let mut t = TransferMatrix::identity();
        for stage in ch.kraus_sequence() {
            let mut s = [[0.0; 4]; 4];
            for j in 0..4 {
                let mut image = Matrix2::<Complex64>::zeros();
                for k in &stage {
                    image += k * pauli_mat2(j) * k.adjoint();
                }
                for (i, row) in s.iter_mut().enumerate() {
                    row[j] = 0.5 * (pauli_mat2(i) * image).trace().re;
                }
            }
            t = TransferMatrix(s).matmul(&t);
        }
        t
    }

    fn random_channel(rng: &mut impl rand::Rng) -> NoiseChannel {
        match rng.random_range(0..4) {
            0 => NoiseChannel::Depolarizing {
                gamma: rng.random_range(0.0..0.5),
            },
            1 => {
                let mut g = [
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.0..0.2),
                    rng.random_range(0.0..0.2),
                    rng.random_range(0.0..0.2),
                ];
                let s: f64 = g.iter().sum();
                for x in &mut g {
                    *x /= s;
                }
                NoiseChannel::Pauli { gammas: g }
            }
            2 => NoiseChannel::AmplitudeDamping {
                gamma: rng.random_range(0.0..0.5),
            },
            _ => NoiseChannel::mixture(rng.random_range(0.0..0.3), rng.random_range(0.0..0.3)),
        }
    }

    #[test]
    fn depolarizing_ptm_is_uniform_diagonal() {
        let t = transfer_matrix(&NoiseChannel::Depolarizing { gamma: 0.02 });
        assert_eq!(t, TransferMatrix::diagonal([1.0, 0.98, 0.98, 0.98]));
    }

    #[test]
    fn identity_pauli_channel_is_identity() {
        let t = transfer_matrix(&NoiseChannel::Pauli {
            gammas: [1.0, 0.0, 0.0, 0.0],
        });
        assert_eq!(t, TransferMatrix::identity());
    }

    #[test]
    fn amplitude_damping_ptm_matches_hand_computation() {
        let g: f64 = 0.36;
        let t = transfer_matrix(&NoiseChannel::AmplitudeDamping { gamma: g });
        let s = (1.0 - g).sqrt();
        let want = TransferMatrix([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, s, 0.0, 0.0],
            [0.0, 0.0, s, 0.0],
            [g, 0.0, 0.0, 1.0 - g],
        ]);
        assert!(t.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn ptm_agrees_with_kraus_route() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        use rand::SeedableRng;
        for _ in 0..50 {
            let ch = random_channel(&mut rng);
            let closed = transfer_matrix(&ch);
            let kraus = ptm_from_kraus(&ch);
            assert!(
                closed.max_abs_diff(&kraus) < 1e-12,
                "channel {ch:?} closed-form vs Kraus PTM"
            );
        }
    }

    #[test]
    fn trace_preservation_row() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let t = transfer_matrix(&random_channel(&mut rng));
            assert_eq!(t.0[B_I][B_I], 1.0);
            for j in 1..4 {
                assert!(t.0[B_I][j].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_channel_eigenvalues_line_by_line() {
        let gammas = [0.7, 0.1, 0.12, 0.08];
        let t = transfer_matrix(&NoiseChannel::Pauli { gammas });
        let [_, g2, g3, g4] = gammas;
        assert!((t.0[B_X][B_X] - (1.0 - 2.0 * (g3 + g4))).abs() < 1e-15);
        assert!((t.0[B_Y][B_Y] - (1.0 - 2.0 * (g2 + g4))).abs() < 1e-15);
        assert!((t.0[B_Z][B_Z] - (1.0 - 2.0 * (g2 + g3))).abs() < 1e-15);
    }

    #[test]
    fn adjoint_is_transpose_and_detects_unitality() {
        let dep = NoiseChannel::Depolarizing { gamma: 0.1 };
        let t = transfer_matrix(&dep);
        assert!(adjoint_transfer_matrix(&dep).max_abs_diff(&t) < 1e-15);

        // E^dag(Z) = gamma I + (1-gamma) Z for amplitude damping.
        let g = 0.23;
        let ta = adjoint_transfer_matrix(&NoiseChannel::AmplitudeDamping { gamma: g });
        assert!((ta.0[B_I][B_Z] - g).abs() < 1e-15);
        assert!((ta.0[B_Z][B_Z] - (1.0 - g)).abs() < 1e-15);

        // Unitality: column I of the forward PTM is e_I iff unital.
        let col_i = |t: &TransferMatrix| [t.0[B_X][B_I], t.0[B_Y][B_I], t.0[B_Z][B_I]];
        assert!(col_i(&t).iter().all(|x| x.abs() < 1e-15));
        let tad = transfer_matrix(&NoiseChannel::AmplitudeDamping { gamma: g });
        assert!(col_i(&tad).iter().any(|x| x.abs() > 1e-3));
    }

    #[test]
    fn effective_rate_examples() {
        let g = 0.17;
        let r = effective_depolarizing_rate(&NoiseChannel::Depolarizing { gamma: g }).unwrap();
        assert!((r - g).abs() < 1e-12);

        let id = effective_depolarizing_rate(&NoiseChannel::identity()).unwrap();
        assert!(id.abs() < 1e-12);

        let v = effective_depolarizing_rate(&NoiseChannel::AmplitudeDamping { gamma: 0.1 }).unwrap();
        assert!(v > 0.0 && v < 1.0);
        // For gamma < 1/2 the dominant contraction is sqrt(1-gamma).
        assert!((v - (1.0 - 0.9f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn fully_contracting_channel_is_rejected() {
        let ch = NoiseChannel::Pauli {
            gammas: [0.25, 0.25, 0.25, 0.25],
        };
        assert!(matches!(
            effective_depolarizing_rate(&ch),
            Err(Error::FullyDepolarizing)
        ));
    }

    #[test]
    fn decomposition_examples_and_invariants() {
        // Depolarizing: E' is the identity map.
        let g = 0.3;
        let d = decompose_non_unital(&NoiseChannel::Depolarizing { gamma: g }).unwrap();
        assert!((d.gamma_eff - g).abs() < 1e-12);
        assert!(d.e_prime.max_abs_diff(&TransferMatrix::identity()) < 1e-12);

        let id = decompose_non_unital(&NoiseChannel::identity()).unwrap();
        assert!(id.gamma_eff.abs() < 1e-12);
        assert!(id.e_prime.max_abs_diff(&TransferMatrix::identity()) < 1e-12);

        // Amplitude damping: reconstruction and adjoint unitality.
        let ch = NoiseChannel::AmplitudeDamping { gamma: 0.1 };
        let d = decompose_non_unital(&ch).unwrap();
        assert!(recompose(&d).max_abs_diff(&transfer_matrix(&ch)) < 1e-12);
        // Adjoint unitality: E'^dag(I) = I, i.e. row I of T(E') is e_I.
        assert!((d.e_prime.0[B_I][B_I] - 1.0).abs() < 1e-12);
        for j in 1..4 {
            assert!(d.e_prime.0[B_I][j].abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_of_e_prime_adjoint_on_paulis() {
        for g in [0.01, 0.05, 0.1, 0.3] {
            let d = decompose_non_unital(&NoiseChannel::AmplitudeDamping { gamma: g }).unwrap();
            for p in [B_X, B_Y, B_Z] {
                // ||E'^dag(P)||_F = Euclidean norm of row p of T(E').
                let norm: f64 = d.e_prime.0[p].iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(norm <= 1.0 + 1e-12, "gamma={g} P={p} norm={norm}");
            }
        }
    }

    #[test]
    fn identity_leakage_scales_quadratically() {
        // nu = |b_I|^2 for E'^dag(Z); nu / gamma^2 stays bounded.
        for k in 1..=30 {
            let g = 0.01 * k as f64;
            let d = decompose_non_unital(&NoiseChannel::AmplitudeDamping { gamma: g }).unwrap();
            let b_i = d.e_prime.0[B_Z][B_I]; // identity component of E'^dag(Z)
            let nu = b_i * b_i;
            assert!(nu / (g * g) < 4.0, "gamma={g} ratio={}", nu / (g * g));
        }
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs_random_mixtures(seed in 0u64..100) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let parts: Vec<NoiseChannel> = (0..rng.random_range(1..4))
                .map(|_| random_channel(&mut rng))
                .collect();
            let ch = NoiseChannel::Composed { parts };
            if let Ok(d) = decompose_non_unital(&ch) {
                prop_assert!(recompose(&d).max_abs_diff(&transfer_matrix(&ch)) < 1e-12);
                for p in [B_X, B_Y, B_Z] {
                    let norm: f64 = d.e_prime.0[p].iter().map(|x| x * x).sum::<f64>().sqrt();
                    prop_assert!(norm <= 1.0 + 1e-12);
                }
            }
        }
    }
}
