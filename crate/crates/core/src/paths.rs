//! The Pauli path integral: per-path coefficients, legal-path enumeration
//! and truncated reconstructions of states and Heisenberg-evolved
//! observables.
//!
//! A path assigns one Pauli string to every cut between circuit layers
//! (`d+1` strings for depth `d`); its coefficient is the product of
//! per-layer transition traces in the normalized-Pauli convention, with the
//! `<0^n|s_0|0^n>` boundary on the state side. Structural legality is the
//! support rule implied by the 2-design second-moment table: a gate maps
//! identity to identity and non-identity to non-identity, and untouched
//! qubits carry their factor across the cut unchanged. Exact zeros of a
//! particular gate slip through the filter; they only add zero to sums.
//!
//! Noise decay multiplies each cut after the first (the input state sees no
//! channel before layer 1), which is what makes the untruncated sums here
//! reproduce the dense oracle exactly — that equivalence is this module's
//! defining contract and is pinned by tests.

use std::collections::BTreeMap;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::circuits::{kron2, Circuit};
use crate::noise::{
    adjoint_transfer_matrix, decompose_non_unital, pauli_mat2, transfer_matrix, NoiseChannel,
};
use crate::pauli::{Axis, PauliString};
use crate::{Error, Result};

/// One Pauli string per cut, `cuts.len() = depth + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliPath {
    pub cuts: Vec<PauliString>,
}

impl PauliPath {
    /// Total weight: non-identity factors summed over every cut.
    pub fn total_weight(&self) -> usize {
        self.cuts.iter().map(|c| c.weight()).sum()
    }
}

/// Sparse map from terminal (or initial) Pauli strings to real coefficients,
/// in the standard `alpha_P = 2^-n Tr[P rho]` convention.
#[derive(Clone, Debug, Serialize)]
pub struct PathExpansion {
    pub n: usize,
    pub truncation_weight: usize,
    pub terms: BTreeMap<PauliString, f64>,
}

impl PathExpansion {
    pub fn coeff(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }
}

// Cut strings are per-qubit codes 0..3 (I, X, Y, Z) while inside this module.
type Cut = Vec<u8>;

fn axis_code(a: Axis) -> u8 {
    match a {
        Axis::X => 1,
        Axis::Y => 2,
        Axis::Z => 3,
    }
}

fn cut_from_string(p: &PauliString) -> Cut {
    let mut cut = vec![0u8; p.n()];
    for (q, a) in p.support() {
        cut[q] = axis_code(a);
    }
    cut
}

fn string_from_cut(cut: &[u8]) -> PauliString {
    let factors = cut.iter().enumerate().filter_map(|(q, &code)| match code {
        0 => None,
        1 => Some((q, Axis::X)),
        2 => Some((q, Axis::Y)),
        _ => Some((q, Axis::Z)),
    });
    PauliString::new(cut.len(), factors).expect("cut codes are valid")
}

fn cut_weight(cut: &[u8]) -> usize {
    cut.iter().filter(|&&c| c != 0).count()
}

/// Per-gate transition table `M[out][in] = 1/4 Tr[P_out U P_in U^dag]`
/// (normalized two-qubit Paulis), plus the layer's untouched qubits.
struct LayerTransitions {
    gates: Vec<((usize, usize), [[f64; 16]; 16])>,
    untouched: Vec<usize>,
}

fn pauli16(code: usize) -> Matrix4<Complex64> {
    kron2(&pauli_mat2(code / 4), &pauli_mat2(code % 4))
}

/// The identity row and column vanish for every unitary
/// (`Tr[P U U^dag] = Tr[P]`), so they are pinned exactly rather than left to
/// floating-point noise; the legality filter relies on that zero pattern.
fn gate_table(u: &Matrix4<Complex64>) -> [[f64; 16]; 16] {
    let mut table = [[0.0; 16]; 16];
    table[0][0] = 1.0;
    for b in 1..16 {
        let image = u * pauli16(b) * u.adjoint();
        for (a, row) in table.iter_mut().enumerate().skip(1) {
            row[b] = (pauli16(a) * image).trace().re / 4.0;
        }
    }
    table
}

fn layer_transitions(circuit: &Circuit) -> Vec<LayerTransitions> {
    circuit
        .layers
        .iter()
        .map(|layer| {
            let mut used = vec![false; circuit.n];
            let gates = layer
                .iter()
                .map(|g| {
                    used[g.targets.0] = true;
                    used[g.targets.1] = true;
                    (g.targets, gate_table(&g.unitary))
                })
                .collect();
            let untouched = (0..circuit.n).filter(|&q| !used[q]).collect();
            LayerTransitions { gates, untouched }
        })
        .collect()
}

/// Walk every structurally legal assignment of the layer's "other side"
/// given one fixed side. `forward` fixes the in-cut and enumerates out-cuts
/// with `M[out][in]`; backward fixes the out-cut and enumerates in-cuts with
/// `M[out][in]` read the other way.
fn for_each_transition(
    layer: &LayerTransitions,
    fixed: &Cut,
    forward: bool,
    mut visit: impl FnMut(&Cut, usize, f64),
) {
    let n = fixed.len();
    let mut other: Cut = vec![0; n];
    for &q in &layer.untouched {
        other[q] = fixed[q];
    }
    let base_weight = layer.untouched.iter().filter(|&&q| fixed[q] != 0).count();

    fn recurse(
        layer: &LayerTransitions,
        fixed: &Cut,
        forward: bool,
        gi: usize,
        other: &mut Cut,
        weight: usize,
        product: f64,
        visit: &mut impl FnMut(&Cut, usize, f64),
    ) {
        if gi == layer.gates.len() {
            visit(other, weight, product);
            return;
        }
        let ((a, b), table) = &layer.gates[gi];
        let fixed_code = (fixed[*a] * 4 + fixed[*b]) as usize;
        if fixed_code == 0 {
            // identity in <=> identity out
            other[*a] = 0;
            other[*b] = 0;
            let m = table[0][0];
            recurse(layer, fixed, forward, gi + 1, other, weight, product * m, visit);
            return;
        }
        for code in 1..16usize {
            let m = if forward {
                table[code][fixed_code]
            } else {
                table[fixed_code][code]
            };
            other[*a] = (code / 4) as u8;
            other[*b] = (code % 4) as u8;
            let extra = (code / 4 != 0) as usize + (code % 4 != 0) as usize;
            recurse(
                layer,
                fixed,
                forward,
                gi + 1,
                other,
                weight + extra,
                product * m,
                visit,
            );
        }
        other[*a] = 0;
        other[*b] = 0;
    }

    recurse(
        layer,
        fixed,
        forward,
        0,
        &mut other,
        base_weight,
        1.0,
        &mut visit,
    );
}

/// `Phi(C, s)` of the path integral: the product of per-layer transition
/// traces and the `<0^n|s_0|0^n>` boundary, in the normalized-Pauli
/// convention (the all-identity path evaluates to `2^{-n/2}`). Per-gate
/// traces are evaluated directly, so a single path costs a handful of 4x4
/// products.
pub fn path_coefficient(circuit: &Circuit, path: &PauliPath) -> Result<f64> {
    let d = circuit.depth();
    if path.cuts.len() != d + 1 {
        return Err(Error::PathLengthMismatch {
            got: path.cuts.len(),
            want: d + 1,
            depth: d,
        });
    }
    for cut in &path.cuts {
        if cut.n() != circuit.n {
            return Err(Error::DimensionMismatch {
                left: circuit.n,
                right: cut.n(),
            });
        }
    }
    // <0^n|s_0|0^n> in normalized convention: 2^{-n/2} iff s_0 is diagonal.
    if path.cuts[0]
        .support()
        .any(|(_, a)| a != Axis::Z)
    {
        return Ok(0.0);
    }
    let mut phi = 2.0f64.powi(-(circuit.n as i32)).sqrt();

    let cuts: Vec<Cut> = path.cuts.iter().map(cut_from_string).collect();
    for (i, layer) in circuit.layers.iter().enumerate() {
        let (inc, out) = (&cuts[i], &cuts[i + 1]);
        let mut used = vec![false; circuit.n];
        for gate in layer {
            let (a, b) = gate.targets;
            used[a] = true;
            used[b] = true;
            let in_code = (inc[a] * 4 + inc[b]) as usize;
            let out_code = (out[a] * 4 + out[b]) as usize;
            // identity row/column vanish exactly for every unitary
            if (in_code == 0) != (out_code == 0) {
                return Ok(0.0);
            }
            if in_code != 0 {
                let image = gate.unitary * pauli16(in_code) * gate.unitary.adjoint();
                phi *= (pauli16(out_code) * image).trace().re / 4.0;
            }
        }
        for q in 0..circuit.n {
            if !used[q] && inc[q] != out[q] {
                return Ok(0.0);
            }
        }
    }
    Ok(phi)
}

/// Enumerate the structurally legal paths of the state-learning form
/// (`s_0` supported on {I, Z}, identity preserved gate-by-gate, untouched
/// factors carried across every cut) with total weight at most `max_weight`.
/// Fails once more than `max_yield` paths are produced.
pub fn enumerate_legal_paths(
    circuit: &Circuit,
    max_weight: usize,
    max_yield: usize,
) -> Result<Vec<PauliPath>> {
    let layers = layer_transitions(circuit);
    let n = circuit.n;
    let mut out: Vec<PauliPath> = Vec::new();

    fn extend(
        layers: &[LayerTransitions],
        level: usize,
        cuts: &mut Vec<Cut>,
        weight: usize,
        max_weight: usize,
        max_yield: usize,
        out: &mut Vec<PauliPath>,
    ) -> Result<()> {
        let d = layers.len();
        if level == d {
            if out.len() >= max_yield {
                return Err(Error::PathBudgetExceeded(max_yield));
            }
            out.push(PauliPath {
                cuts: cuts.iter().map(|c| string_from_cut(c)).collect(),
            });
            return Ok(());
        }
        // Every remaining cut of a live (non-identity) path adds >= 1.
        let live = cut_weight(cuts.last().unwrap()) > 0;
        if live && weight + (d - level) > max_weight {
            return Ok(());
        }
        let fixed = cuts.last().unwrap().clone();
        let mut failure = None;
        for_each_transition(&layers[level], &fixed, true, |next, w, _product| {
            if failure.is_some() || weight + w > max_weight {
                return;
            }
            cuts.push(next.clone());
            if let Err(e) = extend(layers, level + 1, cuts, weight + w, max_weight, max_yield, out)
            {
                failure = Some(e);
            }
            cuts.pop();
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    // s_0 over {I, Z}^n within the weight budget, in canonical-ish order.
    let mut s0 = vec![0u8; n];
    loop {
        let w0 = cut_weight(&s0);
        if w0 <= max_weight {
            let mut cuts = vec![s0.clone()];
            extend(&layers, 0, &mut cuts, w0, max_weight, max_yield, &mut out)?;
        }
        // next {I,Z} pattern
        let mut q = n;
        loop {
            if q == 0 {
                return Ok(out);
            }
            q -= 1;
            if s0[q] == 0 {
                s0[q] = 3;
                break;
            }
            s0[q] = 0;
        }
    }
}

/// Per-cut decay factors of a unital Pauli-diagonal channel.
#[derive(Clone, Copy)]
enum Decay {
    Uniform(f64),          // (1-gamma) per non-identity factor
    PerAxis([f64; 3]),     // lambda_X, lambda_Y, lambda_Z
}

impl Decay {
    fn factor(&self, cut: &[u8]) -> f64 {
        match self {
            Decay::Uniform(r) => r.powi(cut_weight(cut) as i32),
            Decay::PerAxis(l) => cut
                .iter()
                .filter(|&&c| c != 0)
                .map(|&c| l[(c - 1) as usize])
                .product(),
        }
    }
}

fn state_expansion(circuit: &Circuit, decay: Decay, l: usize) -> Result<PathExpansion> {
    let n = circuit.n;
    let layers = layer_transitions(circuit);
    // Level-by-level accumulation keyed by (cut, weight used so far).
    let mut level: BTreeMap<(Cut, usize), f64> = BTreeMap::new();
    let mut s0 = vec![0u8; n];
    'outer: loop {
        let w0 = cut_weight(&s0);
        if w0 <= l {
            level.insert((s0.clone(), w0), 1.0);
        }
        let mut q = n;
        loop {
            if q == 0 {
                break 'outer;
            }
            q -= 1;
            if s0[q] == 0 {
                s0[q] = 3;
                break;
            }
            s0[q] = 0;
        }
    }

    for (li, layer) in layers.iter().enumerate() {
        let remaining = layers.len() - li; // cuts still to assign, incl. this one
        let mut next: BTreeMap<(Cut, usize), f64> = BTreeMap::new();
        for ((cut, used), val) in level {
            if val == 0.0 {
                continue;
            }
            // A live path must pay >= 1 per remaining cut.
            if cut_weight(&cut) > 0 && used + remaining > l {
                continue;
            }
            for_each_transition(layer, &cut, true, |out, w, product| {
                if used + w > l || product == 0.0 {
                    return;
                }
                let contribution = val * product * decay.factor(out);
                if contribution != 0.0 {
                    *next.entry((out.clone(), used + w)).or_insert(0.0) += contribution;
                }
            });
        }
        level = next;
    }

    let scale = 2.0f64.powi(-(n as i32));
    let mut terms: BTreeMap<PauliString, f64> = BTreeMap::new();
    for ((cut, _), val) in level {
        if val != 0.0 {
            *terms.entry(string_from_cut(&cut)).or_insert(0.0) += val * scale;
        }
    }
    terms.retain(|_, v| *v != 0.0);
    Ok(PathExpansion {
        n,
        truncation_weight: l,
        terms,
    })
}

/// Truncated state reconstruction under a uniform unital decay rate:
/// terminal-string buckets of `(1-gamma)^{|s|} Phi(C, s)` over legal paths of
/// total weight at most `l`. With `l = n(d+1)` this is exact for
/// depolarizing noise of strength `gamma`.
pub fn truncated_state_coeffs(circuit: &Circuit, gamma: f64, l: usize) -> Result<PathExpansion> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidNoise(format!("gamma {gamma} outside [0, 1]")));
    }
    state_expansion(circuit, Decay::Uniform(1.0 - gamma), l)
}

/// Truncated state reconstruction with the exact per-axis decay of a
/// Pauli-diagonal unital channel (depolarizing, Pauli, compositions
/// thereof). Rejects non-unital channels; the adjoint/process side handles
/// those through the depolarizing factorization.
pub fn truncated_state_coeffs_channel(
    circuit: &Circuit,
    noise: &NoiseChannel,
    l: usize,
) -> Result<PathExpansion> {
    noise.validate()?;
    let t = transfer_matrix(noise);
    if !t.is_unital_diagonal(1e-12) {
        return Err(Error::NonUnitalUnsupported(noise.kind_tag()));
    }
    let lambda = [t.0[1][1], t.0[2][2], t.0[3][3]];
    state_expansion(circuit, Decay::PerAxis(lambda), l)
}

/// Truncated Heisenberg reconstruction of `C^dag(O)` through the
/// depolarizing factorization: initial-string (`s_0`) buckets of the adjoint
/// path integral with the non-physical remainder inserted at every cut.
/// Works for unital and non-unital channels alike; with `l = n(d+1)` it
/// matches the dense adjoint oracle.
pub fn truncated_adjoint_coeffs(
    circuit: &Circuit,
    noise: &NoiseChannel,
    obs: &crate::pauli::PauliObservable,
    l: usize,
) -> Result<PathExpansion> {
    if obs.n() != circuit.n {
        return Err(Error::DimensionMismatch {
            left: circuit.n,
            right: obs.n(),
        });
    }
    let decomposition = decompose_non_unital(noise)?;
    let shrink = 1.0 - decomposition.gamma_eff;
    // A[i][j] = component i of E'^dag(P_j): transpose of the E' PTM.
    let mut a = [[0.0f64; 4]; 4];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = decomposition.e_prime.0[j][i];
        }
    }
    let _ = adjoint_transfer_matrix; // adjoint PTM = transpose, inlined above

    let n = circuit.n;
    let layers = layer_transitions(circuit);

    // Level d: the observable's own terms.
    let mut level: BTreeMap<(Cut, usize), f64> = BTreeMap::new();
    for (coeff, p) in obs.terms() {
        if p.weight() <= l {
            *level
                .entry((cut_from_string(p), p.weight()))
                .or_insert(0.0) += *coeff;
        }
    }

    for layer in layers.iter().rev() {
        let mut next: BTreeMap<(Cut, usize), f64> = BTreeMap::new();
        for ((cut, used), val) in level {
            if val == 0.0 {
                continue;
            }
            let pre = val * shrink.powi(cut_weight(&cut) as i32);
            // E'^dag branches each supported qubit; identity stays identity.
            let support: Vec<usize> = (0..n).filter(|&q| cut[q] != 0).collect();
            let mut w_vec = cut.clone();
            branch_e_prime(
                &a,
                &support,
                0,
                &mut w_vec,
                pre,
                &mut |w_cut: &Cut, amplitude: f64| {
                    for_each_transition(layer, w_cut, false, |prev, w, product| {
                        if used + w > l || product == 0.0 {
                            return;
                        }
                        let contribution = amplitude * product;
                        if contribution != 0.0 {
                            *next.entry((prev.clone(), used + w)).or_insert(0.0) += contribution;
                        }
                    });
                },
            );
        }
        level = next;
    }

    let mut terms: BTreeMap<PauliString, f64> = BTreeMap::new();
    for ((cut, _), val) in level {
        if val != 0.0 {
            *terms.entry(string_from_cut(&cut)).or_insert(0.0) += val;
        }
    }
    terms.retain(|_, v| *v != 0.0);
    Ok(PathExpansion {
        n,
        truncation_weight: l,
        terms,
    })
}

/// Expand `E'^dag` over the supported qubits of a cut: each non-identity
/// factor maps to a weighted combination over (I, X, Y, Z).
fn branch_e_prime(
    a: &[[f64; 4]; 4],
    support: &[usize],
    si: usize,
    w: &mut Cut,
    amplitude: f64,
    visit: &mut impl FnMut(&Cut, f64),
) {
    if amplitude == 0.0 {
        return;
    }
    if si == support.len() {
        visit(w, amplitude);
        return;
    }
    let q = support[si];
    let in_code = w[q] as usize;
    for out_code in 0..4usize {
        let weight = a[out_code][in_code];
        if weight == 0.0 {
            continue;
        }
        w[q] = out_code as u8;
        branch_e_prime(a, support, si + 1, w, amplitude * weight, visit);
    }
    w[q] = in_code as u8;
}
