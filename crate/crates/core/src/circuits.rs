//! Layered two-qubit circuits: random 2-design architectures (brickwork,
//! staircase), Trotterized 2D transverse-field Ising dynamics and the cyclic
//! CNOT entangling circuit used to prepare out-of-distribution input states.
//!
//! A [`Circuit`] is a list of layers; within a layer no qubit appears in two
//! gates, so layer unitaries factor over disjoint pairs. Noise is applied by
//! the simulators once per qubit after every layer, so `depth()` counts noise
//! applications. Builders that fold single-qubit rotations into two-qubit
//! gates keep that layer structure literal; TFIM circuits additionally record
//! how many layers make up one Trotter step.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Two-qubit gate. The 4x4 unitary is indexed by `|b_a b_b>` where `b_a`
/// (the first target's bit) is the high bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub targets: (usize, usize),
    pub unitary: Matrix4<Complex64>,
}

impl Gate {
    pub fn new(targets: (usize, usize), unitary: Matrix4<Complex64>) -> Self {
        Gate { targets, unitary }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let m = self.unitary.adjoint() * self.unitary - Matrix4::identity();
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Brickwork,
    Staircase,
    Custom,
    Tfim,
    Entangler,
}

/// Gate ensemble for random architectures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateEnsemble {
    HaarSu4,
    Clifford2,
}

/// Depth-d layered circuit on an n-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub layers: Vec<Vec<Gate>>,
    pub architecture: Architecture,
    /// Seed recorded by the harness for replay; builders leave it unset.
    pub seed: Option<u64>,
    /// For TFIM circuits: number of layers forming one Trotter step.
    pub layers_per_trotter_step: Option<usize>,
}

impl Circuit {
    pub fn new(n: usize, layers: Vec<Vec<Gate>>, architecture: Architecture) -> Self {
        Circuit {
            n,
            layers,
            architecture,
            seed: None,
            layers_per_trotter_step: None,
        }
    }

    /// Number of layers; one tensor-product noise application follows each.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    /// Trotter-step count when the circuit was built by the TFIM builder.
    pub fn trotter_steps(&self) -> Option<usize> {
        self.layers_per_trotter_step
            .map(|per| self.layers.len() / per.max(1))
    }

    /// Layer disjointness, target bounds and per-gate unitarity.
    pub fn validate(&self) -> Result<()> {
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.n];
            for g in layer {
                let (a, b) = g.targets;
                if a == b {
                    return Err(Error::InvalidCircuit(format!(
                        "layer {li}: gate targets a qubit twice ({a})"
                    )));
                }
                for q in [a, b] {
                    if q >= self.n {
                        return Err(Error::QubitOutOfRange { index: q, n: self.n });
                    }
                    if used[q] {
                        return Err(Error::InvalidCircuit(format!(
                            "layer {li}: qubit {q} used by two gates"
                        )));
                    }
                    used[q] = true;
                }
                let defect = g.unitarity_defect();
                if defect > 1e-12 {
                    return Err(Error::InvalidCircuit(format!(
                        "layer {li}: gate on {:?} not unitary (defect {defect:.2e})",
                        g.targets
                    )));
                }
            }
        }
        Ok(())
    }
}

// --- elementary matrices -------------------------------------------------

pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn rx(theta: f64) -> Matrix2<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::new(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

pub fn ry(theta: f64) -> Matrix2<Complex64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

pub fn rz(theta: f64) -> Matrix2<Complex64> {
    let h = theta / 2.0;
    Matrix2::new(
        Complex64::from_polar(1.0, -h),
        c(0.0, 0.0),
        c(0.0, 0.0),
        Complex64::from_polar(1.0, h),
    )
}

/// `exp(-i theta/2 Z (x) Z)`.
pub fn rzz(theta: f64) -> Matrix4<Complex64> {
    let h = theta / 2.0;
    let m = Complex64::from_polar(1.0, -h);
    let p = Complex64::from_polar(1.0, h);
    Matrix4::from_diagonal(&Vector4::new(m, p, p, m))
}

/// CNOT with the first target as control.
pub fn cnot() -> Matrix4<Complex64> {
    let o = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    Matrix4::new(
        o, z, z, z, //
        z, o, z, z, //
        z, z, z, o, //
        z, z, o, z,
    )
}

// --- gate sampling --------------------------------------------------------

/// Haar-random SU(4) element via a complex Ginibre matrix and a
/// phase-corrected QR factorization. The determinant phase is irrelevant to
/// channel action.
pub fn sample_haar_su4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<Complex64> {
    use rand_distr::StandardNormal;
    let mut g = Matrix4::<Complex64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = c(re, im) / c(2.0f64.sqrt(), 0.0);
        }
    }
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut lambda = Vector4::from_element(c(1.0, 0.0));
    for i in 0..4 {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            lambda[i] = d / d.norm();
        }
    }
    q * Matrix4::from_diagonal(&lambda)
}

// Two-qubit Pauli group modulo phase as F_2^4 vectors (x1, z1, x2, z2).
fn symplectic(u: u8, v: u8) -> u8 {
    let (x1, z1, x2, z2) = (u & 1, (u >> 1) & 1, (u >> 2) & 1, (u >> 3) & 1);
    let (x1p, z1p, x2p, z2p) = (v & 1, (v >> 1) & 1, (v >> 2) & 1, (v >> 3) & 1);
    (x1 & z1p) ^ (z1 & x1p) ^ (x2 & z2p) ^ (z2 & x2p)
}

/// Hermitian matrix of a Pauli code: per qubit (x,z) -> I/X/Z/Y.
fn pauli_code_matrix(code: u8) -> Matrix4<Complex64> {
    fn factor(x: u8, z: u8) -> Matrix2<Complex64> {
        match (x, z) {
            (0, 0) => Matrix2::identity(),
            (1, 0) => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            (0, 1) => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
            _ => Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        }
    }
    let a = factor(code & 1, (code >> 1) & 1);
    let b = factor((code >> 2) & 1, (code >> 3) & 1);
    kron2(&a, &b)
}

/// Unitary realizing the tableau `X_A -> s0 P(a), Z_A -> s1 P(b),
/// X_B -> s2 P(c), Z_B -> s3 P(d)`; columns are built from the stabilizer
/// state fixed by the Z images.
pub(crate) fn clifford_from_tableau(codes: [u8; 4], signs: [bool; 4]) -> Matrix4<Complex64> {
    let sgn = |s: bool| if s { c(-1.0, 0.0) } else { c(1.0, 0.0) };
    let xa = pauli_code_matrix(codes[0]) * sgn(signs[0]);
    let zb_a = pauli_code_matrix(codes[1]) * sgn(signs[1]);
    let xb = pauli_code_matrix(codes[2]) * sgn(signs[2]);
    let zb_b = pauli_code_matrix(codes[3]) * sgn(signs[3]);

    // |phi> stabilized by both Z images: project a basis vector.
    let p1 = (Matrix4::identity() + zb_a) * c(0.5, 0.0);
    let p2 = (Matrix4::identity() + zb_b) * c(0.5, 0.0);
    let proj = p2 * p1;
    let mut phi = Vector4::zeros();
    for k in 0..4 {
        let candidate = proj.column(k).into_owned();
        if candidate.norm() > 1e-6 {
            phi = candidate;
            break;
        }
    }
    let mut phi = phi / c(phi.norm(), 0.0);
    // Deterministic global phase: first significant entry real positive.
    for k in 0..4 {
        if phi[k].norm() > 1e-9 {
            let ph = phi[k] / c(phi[k].norm(), 0.0);
            phi *= ph.conj();
            break;
        }
    }

    let mut u = Matrix4::zeros();
    for (col, (ba, bb)) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let mut v = phi;
        if bb == 1 {
            v = xb * v;
        }
        if ba == 1 {
            v = xa * v;
        }
        u.set_column(col, &v);
    }
    u
}

/// Uniform element of the two-qubit Clifford group (an exact unitary
/// 2-design): a uniform symplectic tableau (15 * 8 * 3 * 2 = 720 choices)
/// with independent +/- signs on the four generator images (16 choices).
pub fn sample_two_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<Complex64> {
    let a = rng.random_range(1u8..16);
    let b = loop {
        let cand = rng.random_range(0u8..16);
        if symplectic(a, cand) == 1 {
            break cand;
        }
    };
    let cc = loop {
        let cand = rng.random_range(1u8..16);
        if symplectic(cand, a) == 0 && symplectic(cand, b) == 0 {
            break cand;
        }
    };
    let d = loop {
        let cand = rng.random_range(0u8..16);
        if symplectic(cand, a) == 0 && symplectic(cand, b) == 0 && symplectic(cand, cc) == 1 {
            break cand;
        }
    };
    let signs = [
        rng.random_bool(0.5),
        rng.random_bool(0.5),
        rng.random_bool(0.5),
        rng.random_bool(0.5),
    ];
    clifford_from_tableau([a, b, cc, d], signs)
}

/// All 720 sign-free tableaus; with signs this enumerates the group.
#[doc(hidden)]
pub fn all_symplectic_tableaus() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(720);
    for a in 1u8..16 {
        for b in 0u8..16 {
            if symplectic(a, b) != 1 {
                continue;
            }
            for cc in 1u8..16 {
                if symplectic(cc, a) != 0 || symplectic(cc, b) != 0 {
                    continue;
                }
                for d in 0u8..16 {
                    if symplectic(d, a) == 0 && symplectic(d, b) == 0 && symplectic(d, cc) == 1 {
                        out.push([a, b, cc, d]);
                    }
                }
            }
        }
    }
    out
}

fn sample_gate<R: Rng + ?Sized>(ensemble: GateEnsemble, rng: &mut R) -> Matrix4<Complex64> {
    match ensemble {
        GateEnsemble::HaarSu4 => sample_haar_su4(rng),
        GateEnsemble::Clifford2 => sample_two_qubit_clifford(rng),
    }
}

// --- builders ---------------------------------------------------------------

/// Random circuit on a named architecture with freshly sampled gates.
///
/// Brickwork alternates the even-pair layer `(0,1),(2,3),...` with the
/// staggered layer `(1,2),(3,4),...` starting from the even layer; `d` counts
/// layers. A staircase repetition applies the descending chain
/// `(n-1,n-2), ..., (1,0)` one gate per layer (the gates share qubits, so
/// they cannot be merged into one disjoint layer); `d` counts repetitions and
/// `depth()` is `d * (n-1)`.
pub fn build_random_circuit<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    architecture: Architecture,
    ensemble: GateEnsemble,
    rng: &mut R,
) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidCircuit("need at least 2 qubits".into()));
    }
    if d < 1 {
        return Err(Error::InvalidCircuit("need depth >= 1".into()));
    }
    let layers = match architecture {
        Architecture::Brickwork => {
            let mut layers = Vec::with_capacity(d);
            for li in 0..d {
                let start = li % 2;
                let mut layer = Vec::new();
                let mut q = start;
                while q + 1 < n {
                    layer.push(Gate::new((q, q + 1), sample_gate(ensemble, rng)));
                    q += 2;
                }
                layers.push(layer);
            }
            layers
        }
        Architecture::Staircase => {
            let mut layers = Vec::with_capacity(d * (n - 1));
            for _ in 0..d {
                for q in (1..n).rev() {
                    layers.push(vec![Gate::new((q, q - 1), sample_gate(ensemble, rng))]);
                }
            }
            layers
        }
        other => {
            return Err(Error::InvalidCircuit(format!(
                "build_random_circuit supports brickwork/staircase, got {other:?}"
            )))
        }
    };
    let circuit = Circuit::new(n, layers, architecture);
    circuit.validate()?;
    Ok(circuit)
}

/// Nearest-neighbor edges of a rows x cols grid, colored so that each color
/// class is a disjoint pairing: horizontal even/odd column, then vertical
/// even/odd row. Empty classes are dropped.
pub fn grid_edge_coloring(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    let q = |r: usize, col: usize| r * cols + col;
    let mut classes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 4];
    for r in 0..rows {
        for col in 0..cols.saturating_sub(1) {
            classes[col % 2].push((q(r, col), q(r, col + 1)));
        }
    }
    for r in 0..rows.saturating_sub(1) {
        for col in 0..cols {
            classes[2 + r % 2].push((q(r, col), q(r + 1, col)));
        }
    }
    classes.into_iter().filter(|c| !c.is_empty()).collect()
}

/// Trotterized 2D transverse-field Ising circuit on a rows x cols grid.
///
/// One Trotter step is `R_ZZ(-pi/2)` on every grid edge (edge-colored into
/// disjoint layers) followed by an `R_X(theta_h)` sweep. Single-qubit
/// rotations ride on two-qubit gates over the pairing `(0,1),(2,3),...`; an
/// odd register gets one extra layer carrying the last qubit's rotation.
/// `theta_J` is fixed at `-pi/2`; `depth()` counts noise layers and
/// [`Circuit::trotter_steps`] recovers the step count.
pub fn build_tfim_circuit(rows: usize, cols: usize, steps: usize, theta_h: f64) -> Result<Circuit> {
    let n = rows * cols;
    if rows == 0 || cols == 0 || n < 2 {
        return Err(Error::InvalidCircuit(
            "TFIM grid needs rows*cols >= 2".into(),
        ));
    }
    if steps < 1 {
        return Err(Error::InvalidCircuit("need at least one Trotter step".into()));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta_h) {
        return Err(Error::InvalidCircuit(format!(
            "theta_h must lie in [0, pi/2], got {theta_h}"
        )));
    }
    let coloring = grid_edge_coloring(rows, cols);
    let zz = rzz(-std::f64::consts::FRAC_PI_2);
    let rot = rx(theta_h);

    let mut step_layers: Vec<Vec<Gate>> = Vec::new();
    for class in &coloring {
        step_layers.push(
            class
                .iter()
                .map(|&pair| Gate::new(pair, zz))
                .collect(),
        );
    }
    let mut sweep = Vec::new();
    let mut q = 0;
    while q + 1 < n {
        sweep.push(Gate::new((q, q + 1), kron2(&rot, &rot)));
        q += 2;
    }
    step_layers.push(sweep);
    if n % 2 == 1 {
        step_layers.push(vec![Gate::new(
            (n - 2, n - 1),
            kron2(&Matrix2::identity(), &rot),
        )]);
    }

    let per_step = step_layers.len();
    let mut layers = Vec::with_capacity(per_step * steps);
    for _ in 0..steps {
        layers.extend(step_layers.iter().cloned());
    }
    let mut circuit = Circuit::new(n, layers, Architecture::Tfim);
    circuit.layers_per_trotter_step = Some(per_step);
    circuit.validate()?;
    Ok(circuit)
}

/// Entangled-input preparation circuit: per layer, `R_Y(theta_i)` then
/// `R_Z(phi_i)` on every qubit, followed by the cyclic CNOT chain
/// `(0->1), (1->2), ..., (n-2 -> n-1), (n-1 -> 0)`. Each CNOT is its own
/// layer (the chain overlaps on qubits). The closing gate exists only for
/// n > 2 - a two-qubit "cycle" has a single edge, and doubling it would
/// cancel the entangler. Angle slices run per layer.
pub fn build_entangled_prep(n: usize, layer_angles: &[(Vec<f64>, Vec<f64>)]) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidCircuit("need at least 2 qubits".into()));
    }
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for (thetas, phis) in layer_angles {
        if thetas.len() != n || phis.len() != n {
            return Err(Error::InvalidCircuit(format!(
                "angle slices must have length {n} (got {} thetas, {} phis)",
                thetas.len(),
                phis.len()
            )));
        }
        let rots: Vec<Matrix2<Complex64>> = (0..n).map(|q| rz(phis[q]) * ry(thetas[q])).collect();
        let mut sweep = Vec::new();
        let mut q = 0;
        while q + 1 < n {
            sweep.push(Gate::new((q, q + 1), kron2(&rots[q], &rots[q + 1])));
            q += 2;
        }
        layers.push(sweep);
        if n % 2 == 1 {
            layers.push(vec![Gate::new(
                (n - 2, n - 1),
                kron2(&Matrix2::identity(), &rots[n - 1]),
            )]);
        }
        for q in 0..n - 1 {
            layers.push(vec![Gate::new((q, q + 1), cnot())]);
        }
        if n > 2 {
            layers.push(vec![Gate::new((n - 1, 0), cnot())]);
        }
    }
    let circuit = Circuit::new(n, layers, Architecture::Entangler);
    circuit.validate()?;
    Ok(circuit)
}

// --- serialization -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GateJson {
    targets: [usize; 2],
    unitary: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    architecture: Architecture,
    seed: Option<u64>,
    #[serde(default)]
    layers_per_trotter_step: Option<usize>,
    layers: Vec<Vec<GateJson>>,
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|g| GateJson {
                        targets: [g.targets.0, g.targets.1],
                        unitary: g.unitary.iter().map(|z| [z.re, z.im]).collect(),
                    })
                    .collect()
            })
            .collect();
        CircuitJson {
            n: self.n,
            architecture: self.architecture,
            seed: self.seed,
            layers_per_trotter_step: self.layers_per_trotter_step,
            layers,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = CircuitJson::deserialize(de)?;
        let mut layers = Vec::with_capacity(raw.layers.len());
        for layer in raw.layers {
            let mut gates = Vec::with_capacity(layer.len());
            for g in layer {
                if g.unitary.len() != 16 {
                    return Err(serde::de::Error::custom("gate unitary must have 16 entries"));
                }
                // nalgebra iter order is column-major; mirror serialize.
                let mut m = Matrix4::zeros();
                for (k, [re, im]) in g.unitary.into_iter().enumerate() {
                    m[(k % 4, k / 4)] = c(re, im);
                }
                gates.push(Gate::new((g.targets[0], g.targets[1]), m));
            }
            layers.push(gates);
        }
        let circuit = Circuit {
            n: raw.n,
            layers,
            architecture: raw.architecture,
            seed: raw.seed,
            layers_per_trotter_step: raw.layers_per_trotter_step,
        };
        circuit.validate().map_err(serde::de::Error::custom)?;
        Ok(circuit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli16(i: usize) -> Matrix4<Complex64> {
        kron2(&crate::noise::pauli_mat2(i / 4), &crate::noise::pauli_mat2(i % 4))
    }

    /// (1/4 Tr[P_a U P_b U^dag])^2, the squared normalized-Pauli moment.
    fn moment(u: &Matrix4<Complex64>, a: usize, b: usize) -> f64 {
        let t = (pauli16(a) * u * pauli16(b) * u.adjoint()).trace() / c(4.0, 0.0);
        (t.re * t.re + t.im * t.im) as f64
    }

    #[test]
    fn haar_sample_is_unitary_with_quarter_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mean = 0.0;
        let draws = 100_000;
        for k in 0..draws {
            let u = sample_haar_su4(&mut rng);
            if k < 100 {
                let defect = (u.adjoint() * u - Matrix4::identity())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(defect < 1e-12, "unitarity defect {defect}");
            }
            mean += u[(0, 0)].norm_sqr();
        }
        mean /= draws as f64;
        assert!((mean - 0.25).abs() < 0.01, "E|U00|^2 = {mean}");
    }

    #[test]
    fn haar_second_moment_is_one_fifteenth() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 200_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..draws {
            let u = sample_haar_su4(&mut rng);
            let m = moment(&u, 4, 4); // x = y = X (x) I
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / draws as f64;
        let var = (sumsq / draws as f64 - mean * mean).max(0.0);
        let sigma = (var / draws as f64).sqrt();
        assert!(
            (mean - 1.0 / 15.0).abs() < 3.0 * sigma + 1e-4,
            "mean {mean}, sigma {sigma}"
        );
    }

    #[test]
    fn clifford_samples_are_unitary_pauli_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = sample_two_qubit_clifford(&mut rng);
            let defect = (u.adjoint() * u - Matrix4::identity())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(defect < 1e-10, "unitarity defect {defect}");
            // Conjugation maps each Pauli to +/- a single Pauli.
            for a in 1..16 {
                let image = u * pauli16(a) * u.adjoint();
                let mut hits = 0;
                for b in 1..16 {
                    let overlap = (pauli16(b) * image).trace().norm() / 4.0;
                    if overlap > 1e-8 {
                        hits += 1;
                        assert!((overlap - 1.0).abs() < 1e-8, "non-Pauli image");
                    }
                }
                assert_eq!(hits, 1, "image of Pauli {a} not a signed Pauli");
            }
        }
    }

    #[test]
    fn clifford_full_group_average_is_exactly_one_fifteenth() {
        // Sign choices multiply the unitary by a Pauli, which flips at most
        // the sign of the conjugated Pauli; the squared moment is invariant,
        // so averaging the 720 sign-free tableaus averages the full group.
        let tableaus = all_symplectic_tableaus();
        assert_eq!(tableaus.len(), 720);
        let signs = [false; 4];
        let pairs = [(4usize, 4usize), (1, 5), (15, 7), (9, 2)];
        for (a, b) in pairs {
            let mut sum = 0.0;
            for t in &tableaus {
                let u = clifford_from_tableau(*t, signs);
                sum += moment(&u, a, b);
            }
            let mean = sum / tableaus.len() as f64;
            assert!(
                (mean - 1.0 / 15.0).abs() < 1e-10,
                "pair ({a},{b}) group mean {mean}"
            );
        }
        // Mixed identity cases vanish exactly.
        let u = clifford_from_tableau(tableaus[17], signs);
        assert!(moment(&u, 0, 3) < 1e-20);
        assert!((moment(&u, 0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clifford_monte_carlo_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 100_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..draws {
            let u = sample_two_qubit_clifford(&mut rng);
            let m = moment(&u, 4, 4);
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / draws as f64;
        let var = (sumsq / draws as f64 - mean * mean).max(0.0);
        let sigma = (var / draws as f64).sqrt();
        assert!(
            (mean - 1.0 / 15.0).abs() < 3.0 * sigma + 1e-4,
            "mean {mean}, sigma {sigma}"
        );
    }

    #[test]
    fn brickwork_structure_matches_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let circ =
            build_random_circuit(4, 2, Architecture::Brickwork, GateEnsemble::HaarSu4, &mut rng)
                .unwrap();
        assert_eq!(circ.depth(), 2);
        let targets: Vec<Vec<(usize, usize)>> = circ
            .layers
            .iter()
            .map(|l| l.iter().map(|g| g.targets).collect())
            .collect();
        assert_eq!(targets[0], vec![(0, 1), (2, 3)]);
        assert_eq!(targets[1], vec![(1, 2)]);
    }

    #[test]
    fn staircase_structure_matches_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let circ =
            build_random_circuit(3, 1, Architecture::Staircase, GateEnsemble::HaarSu4, &mut rng)
                .unwrap();
        // One repetition: (2,1) then (1,0), one gate per layer.
        assert_eq!(circ.depth(), 2);
        assert_eq!(circ.layers[0][0].targets, (2, 1));
        assert_eq!(circ.layers[1][0].targets, (1, 0));
    }

    #[test]
    fn builders_are_seed_deterministic() {
        for ensemble in [GateEnsemble::HaarSu4, GateEnsemble::Clifford2] {
            let a = build_random_circuit(
                5,
                3,
                Architecture::Brickwork,
                ensemble,
                &mut ChaCha8Rng::seed_from_u64(99),
            )
            .unwrap();
            let b = build_random_circuit(
                5,
                3,
                Architecture::Brickwork,
                ensemble,
                &mut ChaCha8Rng::seed_from_u64(99),
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tfim_grid_edge_count() {
        let coloring = grid_edge_coloring(3, 5);
        let total: usize = coloring.iter().map(|c| c.len()).sum();
        assert_eq!(total, 22); // 3*4 horizontal + 2*5 vertical
        for class in &coloring {
            let mut seen = std::collections::HashSet::new();
            for &(a, b) in class {
                assert!(seen.insert(a) && seen.insert(b), "color class overlaps");
            }
        }
    }

    #[test]
    fn rzz_matrix_at_minus_half_pi() {
        let m = rzz(-std::f64::consts::FRAC_PI_2);
        let want = [
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ];
        for i in 0..4 {
            assert!((m[(i, i)] - want[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn tfim_layer_bookkeeping() {
        let circ = build_tfim_circuit(2, 3, 4, 0.3).unwrap();
        // 2x3 grid: 3 non-empty color classes + 1 rotation sweep per step.
        assert_eq!(circ.layers_per_trotter_step, Some(4));
        assert_eq!(circ.depth(), 16);
        assert_eq!(circ.trotter_steps(), Some(4));
        circ.validate().unwrap();

        // Odd register gets the extra rotation-carrier layer.
        let odd = build_tfim_circuit(3, 5, 1, 0.3).unwrap();
        assert_eq!(odd.layers_per_trotter_step, Some(4 + 1 + 1));
    }

    #[test]
    fn entangled_prep_zero_angles_and_structure() {
        let angles = vec![(vec![0.0; 4], vec![0.0; 4])];
        let circ = build_entangled_prep(4, &angles).unwrap();
        circ.validate().unwrap();
        // rotation sweep + 4 CNOT layers
        assert_eq!(circ.depth(), 1 + 4);
        let last = circ.layers.last().unwrap();
        assert_eq!(last[0].targets, (3, 0));
        // CNOT chain acts trivially on |0^n>
        let state = crate::oracle::prepare_statevector(&circ);
        assert!((state[0].norm() - 1.0).abs() < 1e-12);
    }

    /// Von Neumann entropy (bits) of the first `k` qubits of a pure state.
    fn half_chain_entropy_bits(n: usize, k: usize, state: &[Complex64]) -> f64 {
        let rows = 1usize << k;
        let cols = 1usize << (n - k);
        let mut reduced = nalgebra::DMatrix::<Complex64>::zeros(rows, rows);
        for i in 0..rows {
            for j in 0..rows {
                let mut acc = c(0.0, 0.0);
                for b in 0..cols {
                    acc += state[i * cols + b] * state[j * cols + b].conj();
                }
                reduced[(i, j)] = acc;
            }
        }
        reduced
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .filter(|&&p| p > 1e-12)
            .map(|&p| -p * p.log2())
            .sum()
    }

    #[test]
    fn entangled_prep_generates_entanglement() {
        // n=2, theta = (pi/2, 0): Bell-like state with positive entropy.
        let angles = vec![(vec![std::f64::consts::FRAC_PI_2, 0.0], vec![0.0, 0.0])];
        let circ = build_entangled_prep(2, &angles).unwrap();
        let state = crate::oracle::prepare_statevector(&circ);
        assert!(half_chain_entropy_bits(2, 1, &state) > 0.5);

        // two random-angle layers at n=4: half-chain entropy > 0.5 bits in
        // at least 90 of 100 seeds.
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let angles: Vec<(Vec<f64>, Vec<f64>)> = (0..2)
                .map(|_| {
                    (
                        (0..4).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect(),
                        (0..4).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
                    )
                })
                .collect();
            let circ = build_entangled_prep(4, &angles).unwrap();
            let state = crate::oracle::prepare_statevector(&circ);
            if half_chain_entropy_bits(4, 2, &state) > 0.5 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "only {hits}/100 seeds entangled");
    }

    #[test]
    fn tfim_at_zero_transverse_angle_is_diagonal() {
        // theta_h = 0: every gate is diagonal in Z, so |0^n> only picks up
        // phases and <Z_i> stays 1 under noiseless evolution.
        let circ = build_tfim_circuit(2, 3, 3, 0.0).unwrap();
        let state = crate::oracle::prepare_statevector(&circ);
        for q in 0..6 {
            let z = crate::pauli::PauliString::single(6, q, crate::pauli::Axis::Z).unwrap();
            let v = crate::oracle::statevector_pauli_expectation(6, &state, &z);
            assert!((v - 1.0).abs() < 1e-12, "qubit {q}: <Z> = {v}");
        }
    }

    #[test]
    fn circuit_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut circ =
            build_random_circuit(4, 3, Architecture::Brickwork, GateEnsemble::Clifford2, &mut rng)
                .unwrap();
        circ.seed = Some(7);
        let json = serde_json::to_string(&circ).unwrap();
        let back: Circuit = serde_json::from_str(&json).unwrap();
        assert_eq!(circ.n, back.n);
        assert_eq!(circ.seed, back.seed);
        assert_eq!(circ.layers.len(), back.layers.len());
        for (la, lb) in circ.layers.iter().zip(&back.layers) {
            for (ga, gb) in la.iter().zip(lb) {
                assert_eq!(ga.targets, gb.targets);
                let diff = (ga.unitary - gb.unitary)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-15);
            }
        }
    }
}
