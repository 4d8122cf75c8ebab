//! Exact simulation oracles for small registers: dense density-matrix
//! evolution under noisy layered circuits, adjoint (Heisenberg) evolution of
//! observables, overlaps with stabilizer product states, Schatten-1 distance
//! and exact Pauli coefficients.
//!
//! Everything here is ground truth for the learners and the path machinery;
//! sizes are capped (`DENSE_ORACLE_CAP`) because storage is `4^n` complex
//! entries. Index convention: qubit 0 is the leftmost tensor factor, i.e. the
//! most significant bit of a basis index.

mod shadows;
mod trajectory;

pub use shadows::classical_shadow_coeffs;
pub use trajectory::TrajectorySim;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuits::{Circuit, Gate};
use crate::noise::NoiseChannel;
use crate::pauli::{Axis, PauliObservable, PauliString, StabilizerLabel, StabilizerProductState};
use crate::{Error, Result};

/// Dense density matrices are limited to this many qubits.
pub const DENSE_ORACLE_CAP: usize = 12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

// --- dense kernels ----------------------------------------------------------

/// rho -> (M on qubit q) rho, in place.
fn left_mul_1q(n: usize, data: &mut [Complex64], q: usize, m: &Matrix2<Complex64>) {
    let dim = 1 << n;
    let mask = bit_mask(n, q);
    for i in 0..dim {
        if i & mask != 0 {
            continue;
        }
        let i1 = i | mask;
        for j in 0..dim {
            let a = data[i * dim + j];
            let b = data[i1 * dim + j];
            data[i * dim + j] = m[(0, 0)] * a + m[(0, 1)] * b;
            data[i1 * dim + j] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

/// rho -> rho (M on qubit q), in place.
fn right_mul_1q(n: usize, data: &mut [Complex64], q: usize, m: &Matrix2<Complex64>) {
    let dim = 1 << n;
    let mask = bit_mask(n, q);
    for i in 0..dim {
        let row = i * dim;
        for j in 0..dim {
            if j & mask != 0 {
                continue;
            }
            let j1 = j | mask;
            let a = data[row + j];
            let b = data[row + j1];
            data[row + j] = a * m[(0, 0)] + b * m[(1, 0)];
            data[row + j1] = a * m[(0, 1)] + b * m[(1, 1)];
        }
    }
}

fn left_mul_2q(n: usize, data: &mut [Complex64], targets: (usize, usize), u: &Matrix4<Complex64>) {
    let dim = 1 << n;
    let ma = bit_mask(n, targets.0);
    let mb = bit_mask(n, targets.1);
    for i in 0..dim {
        if i & ma != 0 || i & mb != 0 {
            continue;
        }
        let rows = [i, i | mb, i | ma, i | ma | mb];
        for j in 0..dim {
            let old = [
                data[rows[0] * dim + j],
                data[rows[1] * dim + j],
                data[rows[2] * dim + j],
                data[rows[3] * dim + j],
            ];
            for (k, &row) in rows.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (l, &o) in old.iter().enumerate() {
                    acc += u[(k, l)] * o;
                }
                data[row * dim + j] = acc;
            }
        }
    }
}

fn right_mul_2q(n: usize, data: &mut [Complex64], targets: (usize, usize), u: &Matrix4<Complex64>) {
    let dim = 1 << n;
    let ma = bit_mask(n, targets.0);
    let mb = bit_mask(n, targets.1);
    for j in 0..dim {
        if j & ma != 0 || j & mb != 0 {
            continue;
        }
        let cols = [j, j | mb, j | ma, j | ma | mb];
        for i in 0..dim {
            let row = i * dim;
            let old = [
                data[row + cols[0]],
                data[row + cols[1]],
                data[row + cols[2]],
                data[row + cols[3]],
            ];
            for (l, &col) in cols.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (k, &o) in old.iter().enumerate() {
                    acc += o * u[(k, l)];
                }
                data[row + col] = acc;
            }
        }
    }
}

/// A -> U A U^dag on the gate's targets.
fn conjugate_gate(n: usize, data: &mut [Complex64], gate: &Gate) {
    left_mul_2q(n, data, gate.targets, &gate.unitary);
    right_mul_2q(n, data, gate.targets, &gate.unitary.adjoint());
}

/// A -> sum_k K_k A K_k^dag on qubit q.
fn apply_kraus_1q(n: usize, data: &mut [Complex64], q: usize, kraus: &[Matrix2<Complex64>]) {
    let mut acc = vec![c(0.0, 0.0); data.len()];
    let mut tmp = vec![c(0.0, 0.0); data.len()];
    for k in kraus {
        tmp.copy_from_slice(data);
        left_mul_1q(n, &mut tmp, q, k);
        right_mul_1q(n, &mut tmp, q, &k.adjoint());
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += t;
        }
    }
    data.copy_from_slice(&acc);
}

/// A -> sum_k K_k^dag A K_k on qubit q (adjoint channel).
fn apply_adjoint_kraus_1q(n: usize, data: &mut [Complex64], q: usize, kraus: &[Matrix2<Complex64>]) {
    let mut acc = vec![c(0.0, 0.0); data.len()];
    let mut tmp = vec![c(0.0, 0.0); data.len()];
    for k in kraus {
        tmp.copy_from_slice(data);
        left_mul_1q(n, &mut tmp, q, &k.adjoint());
        right_mul_1q(n, &mut tmp, q, k);
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += t;
        }
    }
    data.copy_from_slice(&acc);
}

/// Sparse walk over a Pauli string: for each row `i`, its unique non-zero
/// column `i ^ flip` and the complex entry value.
#[derive(Clone, Copy)]
pub(crate) struct PauliAction {
    flip: usize,
    y_mask: usize,
    z_mask: usize,
    y_count: u32,
}

impl PauliAction {
    pub(crate) fn new(p: &PauliString) -> Self {
        let n = p.n();
        let (mut flip, mut y_mask, mut z_mask, mut y_count) = (0usize, 0usize, 0usize, 0u32);
        for (q, axis) in p.support() {
            let m = bit_mask(n, q);
            match axis {
                Axis::X => flip |= m,
                Axis::Y => {
                    flip |= m;
                    y_mask |= m;
                    y_count += 1;
                }
                Axis::Z => z_mask |= m,
            }
        }
        PauliAction {
            flip,
            y_mask,
            z_mask,
            y_count,
        }
    }

    #[inline]
    pub(crate) fn column(&self, row: usize) -> usize {
        row ^ self.flip
    }

    /// Entry P[row, row ^ flip].
    #[inline]
    pub(crate) fn entry(&self, row: usize) -> Complex64 {
        // Y factor: row bit 0 -> -i, 1 -> +i. Z factor: row bit 1 -> -1.
        let y_ones = (row & self.y_mask).count_ones();
        let z_ones = (row & self.z_mask).count_ones();
        // (-i)^(y_count) * (-1)^(y_zeros... ) handled via i^(2*y_ones - y_count)
        let mut v = c(1.0, 0.0);
        let quarter_turns = (2 * y_ones as i64 - self.y_count as i64).rem_euclid(4);
        v *= match quarter_turns {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        if z_ones % 2 == 1 {
            v = -v;
        }
        v
    }
}

/// Tr[P A] for dense row-major `A`.
fn pauli_trace(n: usize, data: &[Complex64], p: &PauliString) -> Complex64 {
    let dim = 1 << n;
    let action = PauliAction::new(p);
    let mut acc = c(0.0, 0.0);
    for i in 0..dim {
        let j = action.column(i);
        acc += action.entry(i) * data[j * dim + i];
    }
    acc
}

/// data += coeff * P.
fn add_pauli(n: usize, data: &mut [Complex64], p: &PauliString, coeff: f64) {
    let dim = 1 << n;
    let action = PauliAction::new(p);
    for i in 0..dim {
        let j = action.column(i);
        data[i * dim + j] += action.entry(i) * c(coeff, 0.0);
    }
}

// --- statevector helpers (shared with trajectories and prep states) --------

pub(crate) fn sv_apply_1q(n: usize, state: &mut [Complex64], q: usize, m: &Matrix2<Complex64>) {
    let dim = 1 << n;
    let mask = bit_mask(n, q);
    for i in 0..dim {
        if i & mask != 0 {
            continue;
        }
        let i1 = i | mask;
        let a = state[i];
        let b = state[i1];
        state[i] = m[(0, 0)] * a + m[(0, 1)] * b;
        state[i1] = m[(1, 0)] * a + m[(1, 1)] * b;
    }
}

pub(crate) fn sv_apply_gate(n: usize, state: &mut [Complex64], gate: &Gate) {
    let dim = 1 << n;
    let ma = bit_mask(n, gate.targets.0);
    let mb = bit_mask(n, gate.targets.1);
    let u = &gate.unitary;
    for i in 0..dim {
        if i & ma != 0 || i & mb != 0 {
            continue;
        }
        let idx = [i, i | mb, i | ma, i | ma | mb];
        let old = [state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]];
        for (k, &ix) in idx.iter().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (l, &o) in old.iter().enumerate() {
                acc += u[(k, l)] * o;
            }
            state[ix] = acc;
        }
    }
}

/// Statevector of a pure circuit applied to `|0^n>`; no noise.
pub fn prepare_statevector(circuit: &Circuit) -> Vec<Complex64> {
    let dim = 1 << circuit.n;
    let mut state = vec![c(0.0, 0.0); dim];
    state[0] = c(1.0, 0.0);
    for layer in &circuit.layers {
        for gate in layer {
            sv_apply_gate(circuit.n, &mut state, gate);
        }
    }
    state
}

/// `<psi|P|psi>` for an explicit statevector.
pub fn statevector_pauli_expectation(n: usize, state: &[Complex64], p: &PauliString) -> f64 {
    debug_assert_eq!(state.len(), 1 << n);
    let action = PauliAction::new(p);
    let mut acc = c(0.0, 0.0);
    for (i, amp) in state.iter().enumerate() {
        let j = action.column(i);
        acc += amp.conj() * action.entry(i) * state[j];
    }
    acc.re
}

/// Per-qubit statevector factors of the six stabilizer labels.
pub(crate) fn label_amplitudes(label: StabilizerLabel) -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        StabilizerLabel::ZPlus => [c(1.0, 0.0), c(0.0, 0.0)],
        StabilizerLabel::ZMinus => [c(0.0, 0.0), c(1.0, 0.0)],
        StabilizerLabel::XPlus => [c(s, 0.0), c(s, 0.0)],
        StabilizerLabel::XMinus => [c(s, 0.0), c(-s, 0.0)],
        StabilizerLabel::YPlus => [c(s, 0.0), c(0.0, s)],
        StabilizerLabel::YMinus => [c(s, 0.0), c(0.0, -s)],
    }
}

/// Dense statevector of a stabilizer product state.
pub fn stabilizer_statevector(psi: &StabilizerProductState) -> Vec<Complex64> {
    let n = psi.n();
    let dim = 1 << n;
    let factors: Vec<[Complex64; 2]> = psi.labels().iter().map(|&l| label_amplitudes(l)).collect();
    let mut out = vec![c(1.0, 0.0); dim];
    for (i, v) in out.iter_mut().enumerate() {
        for (q, f) in factors.iter().enumerate() {
            let bit = (i >> (n - 1 - q)) & 1;
            *v *= f[bit];
        }
    }
    out
}

// --- public types -------------------------------------------------------------

/// Exact 2^n x 2^n density operator (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

/// Dense Hermitian operator (observables, Heisenberg images, differences).
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    n: usize,
    data: Vec<Complex64>,
}

macro_rules! dense_common {
    ($ty:ident) => {
        impl $ty {
            pub fn n(&self) -> usize {
                self.n
            }

            pub fn dim(&self) -> usize {
                1 << self.n
            }

            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            pub fn entry(&self, i: usize, j: usize) -> Complex64 {
                self.data[i * self.dim() + j]
            }

            pub fn trace(&self) -> Complex64 {
                let dim = self.dim();
                (0..dim).map(|i| self.data[i * dim + i]).sum()
            }

            /// Max-entry deviation from Hermiticity.
            pub fn hermiticity_defect(&self) -> f64 {
                let dim = self.dim();
                let mut worst: f64 = 0.0;
                for i in 0..dim {
                    for j in i..dim {
                        let d = (self.data[i * dim + j] - self.data[j * dim + i].conj()).norm();
                        worst = worst.max(d);
                    }
                }
                worst
            }

            /// Tr[P A], exact.
            pub fn pauli_trace(&self, p: &PauliString) -> Result<Complex64> {
                if p.n() != self.n {
                    return Err(Error::DimensionMismatch {
                        left: self.n,
                        right: p.n(),
                    });
                }
                Ok(pauli_trace(self.n, &self.data, p))
            }
        }
    };
}

dense_common!(DensityMatrix);
dense_common!(OperatorMatrix);

impl DensityMatrix {
    /// `|0^n><0^n|`.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1 << n;
        let mut data = vec![c(0.0, 0.0); dim * dim];
        data[0] = c(1.0, 0.0);
        Ok(DensityMatrix { n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1 << n;
        let mut data = vec![c(0.0, 0.0); dim * dim];
        let w = c(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            data[i * dim + i] = w;
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_statevector(n: usize, state: &[Complex64]) -> Result<Self> {
        check_cap(n)?;
        let dim = 1 << n;
        if state.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "statevector length {} != 2^{n}",
                state.len()
            )));
        }
        let mut data = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = state[i] * state[j].conj();
            }
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn from_stabilizer_product(psi: &StabilizerProductState) -> Result<Self> {
        Self::from_statevector(psi.n(), &stabilizer_statevector(psi))
    }

    /// Hermitian + unit trace + positive semidefinite (within tolerances).
    pub fn validate(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::NotHermitian(h));
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > tol || t.im.abs() > tol {
            return Err(Error::InvalidParameter(format!("trace {t} != 1")));
        }
        let min = min_eigenvalue(self.n, &self.data)?;
        if min < -1e-9 {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    /// Tr[O rho] for a sparse observable.
    pub fn expectation(&self, obs: &PauliObservable) -> Result<f64> {
        if obs.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: obs.n(),
            });
        }
        let mut acc = 0.0;
        for (coeff, p) in obs.terms() {
            acc += coeff * pauli_trace(self.n, &self.data, p).re;
        }
        Ok(acc)
    }

    /// Debug dump: little-endian u32 `n` header, then row-major
    /// `(re: f64, im: f64)` little-endian pairs.
    pub fn dump_binary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load_binary<R: std::io::Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 4];
        r.read_exact(&mut header)?;
        let n = u32::from_le_bytes(header) as usize;
        check_cap(n)?;
        let dim = 1usize << n;
        let mut data = Vec::with_capacity(dim * dim);
        let mut buf = [0u8; 16];
        for _ in 0..dim * dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            data.push(c(re, im));
        }
        Ok(DensityMatrix { n, data })
    }
}

impl OperatorMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        Ok(OperatorMatrix {
            n,
            data: vec![c(0.0, 0.0); dim * dim],
        })
    }

    /// Dense matrix of a Pauli string.
    pub fn from_pauli(p: &PauliString) -> Result<Self> {
        let mut out = Self::zeros(p.n())?;
        add_pauli(out.n, &mut out.data, p, 1.0);
        Ok(out)
    }

    /// Dense matrix of a sparse observable.
    pub fn from_observable(obs: &PauliObservable) -> Result<Self> {
        let mut out = Self::zeros(obs.n())?;
        for (coeff, p) in obs.terms() {
            add_pauli(out.n, &mut out.data, p, *coeff);
        }
        Ok(out)
    }

    /// Dense `sum_P coeffs[P] * P`.
    pub fn from_pauli_coeffs<'a, I>(n: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a PauliString, &'a f64)>,
    {
        let mut out = Self::zeros(n)?;
        for (p, coeff) in coeffs {
            if p.n() != n {
                return Err(Error::DimensionMismatch { left: n, right: p.n() });
            }
            add_pauli(n, &mut out.data, p, *coeff);
        }
        Ok(out)
    }

    /// Difference `rho - self`-style helper: returns `a - b` as an operator.
    pub fn from_difference(a: &DensityMatrix, b: &OperatorMatrix) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::DimensionMismatch {
                left: a.n(),
                right: b.n(),
            });
        }
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x - y)
            .collect();
        Ok(OperatorMatrix { n: a.n, data })
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeOverCap {
            n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    Ok(())
}

fn min_eigenvalue(n: usize, data: &[Complex64]) -> Result<f64> {
    let dim = 1usize << n;
    let m = DMatrix::from_fn(dim, dim, |i, j| data[i * dim + j]);
    let eig = m.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

// --- oracle operations ---------------------------------------------------------

/// Apply the noisy circuit of Eq.-(1) shape to `rho_in`: per layer, the
/// two-qubit gates, then the single-qubit channel on every qubit.
pub fn evolve_density(
    circuit: &Circuit,
    noise: &NoiseChannel,
    rho_in: &DensityMatrix,
) -> Result<DensityMatrix> {
    if circuit.n != rho_in.n() {
        return Err(Error::DimensionMismatch {
            left: circuit.n,
            right: rho_in.n(),
        });
    }
    check_cap(circuit.n)?;
    noise.validate()?;
    circuit.validate()?;
    let stages = noise.kraus_sequence();
    let n = circuit.n;
    let mut data = rho_in.data.clone();
    for layer in &circuit.layers {
        for gate in layer {
            conjugate_gate(n, &mut data, gate);
        }
        for q in 0..n {
            for stage in &stages {
                apply_kraus_1q(n, &mut data, q, stage);
            }
        }
    }
    Ok(DensityMatrix { n, data })
}

/// Heisenberg image `C^dag(O)`: satisfies
/// `Tr[O C(rho)] = Tr[C^dag(O) rho]` for every state.
pub fn adjoint_evolve_observable(
    circuit: &Circuit,
    noise: &NoiseChannel,
    obs: &PauliObservable,
) -> Result<OperatorMatrix> {
    if circuit.n != obs.n() {
        return Err(Error::DimensionMismatch {
            left: circuit.n,
            right: obs.n(),
        });
    }
    check_cap(circuit.n)?;
    noise.validate()?;
    circuit.validate()?;
    let stages = noise.kraus_sequence();
    let n = circuit.n;
    let mut out = OperatorMatrix::from_observable(obs)?;
    for layer in circuit.layers.iter().rev() {
        // Adjoint of (noise after gates): adjoint noise first, stages reversed.
        for q in 0..n {
            for stage in stages.iter().rev() {
                apply_adjoint_kraus_1q(n, &mut out.data, q, stage);
            }
        }
        for gate in layer {
            let adj = Gate::new(gate.targets, gate.unitary.adjoint());
            conjugate_gate(n, &mut out.data, &adj);
        }
    }
    Ok(out)
}

/// Exact overlap `<psi|rho|psi>` with a stabilizer product state.
pub fn overlap(rho: &DensityMatrix, psi: &StabilizerProductState) -> Result<f64> {
    if rho.n() != psi.n() {
        return Err(Error::DimensionMismatch {
            left: rho.n(),
            right: psi.n(),
        });
    }
    let dim = rho.dim();
    let v = stabilizer_statevector(psi);
    let mut acc = c(0.0, 0.0);
    for i in 0..dim {
        let mut row = c(0.0, 0.0);
        for j in 0..dim {
            row += rho.data[i * dim + j] * v[j];
        }
        acc += v[i].conj() * row;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// SWAP-test acquisition model: the exact overlap corrupted by binomial shot
/// noise, `2k/shots - 1` with `k ~ Binomial(shots, (1+v)/2)`.
pub fn noisy_overlap<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    psi: &StabilizerProductState,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let v = overlap(rho, psi)?;
    Ok(binomial_estimate(v, 1.0, shots, rng))
}

/// Two-outcome shot model for a bounded expectation: estimate of `value`
/// from `shots` Bernoulli trials with success probability `(1 + value/bound)/2`.
pub fn binomial_estimate<R: Rng + ?Sized>(value: f64, bound: f64, shots: u64, rng: &mut R) -> f64 {
    let p = ((1.0 + value / bound) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(shots, p).expect("valid binomial").sample(rng);
    bound * (2.0 * k as f64 / shots as f64 - 1.0)
}

/// Schatten 1-norm of a Hermitian operator: sum of |eigenvalues|.
pub fn schatten1(a: &OperatorMatrix) -> Result<f64> {
    let defect = a.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    let dim = a.dim();
    let m = DMatrix::from_fn(dim, dim, |i, j| a.data[i * dim + j]);
    let eig = m.symmetric_eigen();
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Standard-convention Pauli coefficient `alpha_P = 2^-n Tr[P rho]`.
pub fn exact_pauli_coeff(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    let t = rho.pauli_trace(p)?;
    Ok(t.re / rho.dim() as f64)
}

/// Trace-norm distance between an exact state and a coefficient map
/// reconstruction `sum_P coeffs[P] P`.
pub fn trace_norm_error<'a, I>(rho: &DensityMatrix, n: usize, coeffs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a PauliString, &'a f64)>,
{
    let approx = OperatorMatrix::from_pauli_coeffs(n, coeffs)?;
    let diff = OperatorMatrix::from_difference(rho, &approx)?;
    schatten1(&diff)
}
