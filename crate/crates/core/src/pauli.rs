//! Sparse Pauli strings, Pauli observables and stabilizer-product states.
//!
//! A [`PauliString`] stores only its non-identity single-qubit factors, so
//! weight-bounded sets scale with the weight rather than the register size.
//! Strings are totally ordered (weight first, then lexicographically on the
//! `(index, axis)` support sequence); that order is part of the public
//! contract so map iteration, enumeration and serialized output are stable
//! across runs.
//!
//! Coefficient convention: everything stored anywhere in this crate is a
//! coefficient over *standard* (unnormalized) Pauli matrices,
//! `rho = sum_P alpha_P P` with `alpha_P = 2^-n Tr[P rho]`. The normalized
//! convention `P/sqrt(2)` per qubit differs by `2^{n/2}` and is confined to
//! the interior of the path-integral evaluation in [`crate::paths`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Non-identity single-qubit Pauli axis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_index(i: u8) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        }
    }
}

/// Sparse n-qubit Pauli word; identity factors are not stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliString {
    n: usize,
    support: BTreeMap<usize, Axis>,
}

impl PauliString {
    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            support: BTreeMap::new(),
        }
    }

    /// Build from `(qubit, axis)` pairs. Rejects out-of-range and duplicate
    /// indices.
    pub fn new(n: usize, factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut support = BTreeMap::new();
        for (q, a) in factors {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            if support.insert(q, a).is_some() {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(PauliString { n, support })
    }

    /// Single non-identity factor.
    pub fn single(n: usize, q: usize, axis: Axis) -> Result<Self> {
        Self::new(n, [(q, axis)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hamming weight: the number of non-trivially acted qubits.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    pub fn axis_at(&self, q: usize) -> Option<Axis> {
        self.support.get(&q).copied()
    }

    /// Support in ascending qubit order.
    pub fn support(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.support.iter().map(|(&q, &a)| (q, a))
    }

    /// Dense one-character-per-qubit form, e.g. `"IXZY"`.
    pub fn to_compact(&self) -> String {
        let mut s = vec!['I'; self.n];
        for (&q, &a) in &self.support {
            s[q] = a.as_char();
        }
        s.into_iter().collect()
    }

    /// Parse the dense form produced by [`PauliString::to_compact`].
    pub fn from_compact(s: &str) -> Result<Self> {
        let mut support = BTreeMap::new();
        let mut n = 0;
        for (q, c) in s.chars().enumerate() {
            n += 1;
            match c {
                'I' | 'i' => {}
                'X' | 'x' => {
                    support.insert(q, Axis::X);
                }
                'Y' | 'y' => {
                    support.insert(q, Axis::Y);
                }
                'Z' | 'z' => {
                    support.insert(q, Axis::Z);
                }
                other => return Err(Error::Parse(format!("invalid Pauli character {other:?}"))),
            }
        }
        if n == 0 {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(PauliString { n, support })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

/// Canonical total order: by weight, then lexicographic on the
/// `(index, axis)` support sequence.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.support.iter().cmp(other.support.iter()))
            .then_with(|| self.n.cmp(&other.n))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_compact())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        PauliString::from_compact(&s).map_err(serde::de::Error::custom)
    }
}

/// Real linear combination of Pauli strings; Hermitian by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliObservable {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliObservable {
    /// Merge duplicate strings and drop exact-zero coefficients.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (c, p) in terms {
            if p.n() != n {
                return Err(Error::DimensionMismatch { left: n, right: p.n() });
            }
            *merged.entry(p).or_insert(0.0) += c;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(p, c)| (c, p))
            .collect();
        Ok(PauliObservable { n, terms })
    }

    /// Unit-coefficient single Pauli factor, e.g. `Z` on qubit 0.
    pub fn single(n: usize, q: usize, axis: Axis) -> Result<Self> {
        Ok(PauliObservable {
            n,
            terms: vec![(1.0, PauliString::single(n, q, axis)?)],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Squared normalized Frobenius norm, `2^-n Tr[O O^dag] = sum_k c_k^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c * c).sum()
    }

    /// Sum of absolute coefficients; upper bound on the spectral norm.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}

/// Single-qubit stabilizer label: an eigenstate of one Pauli axis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum StabilizerLabel {
    #[serde(rename = "Z+")]
    ZPlus,
    #[serde(rename = "Z-")]
    ZMinus,
    #[serde(rename = "X+")]
    XPlus,
    #[serde(rename = "X-")]
    XMinus,
    #[serde(rename = "Y+")]
    YPlus,
    #[serde(rename = "Y-")]
    YMinus,
}

impl StabilizerLabel {
    pub const ALL: [StabilizerLabel; 6] = [
        StabilizerLabel::ZPlus,
        StabilizerLabel::ZMinus,
        StabilizerLabel::XPlus,
        StabilizerLabel::XMinus,
        StabilizerLabel::YPlus,
        StabilizerLabel::YMinus,
    ];

    pub fn axis(self) -> Axis {
        match self {
            StabilizerLabel::ZPlus | StabilizerLabel::ZMinus => Axis::Z,
            StabilizerLabel::XPlus | StabilizerLabel::XMinus => Axis::X,
            StabilizerLabel::YPlus | StabilizerLabel::YMinus => Axis::Y,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            StabilizerLabel::ZPlus | StabilizerLabel::XPlus | StabilizerLabel::YPlus => 1,
            _ => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilizerLabel::ZPlus => "Z+",
            StabilizerLabel::ZMinus => "Z-",
            StabilizerLabel::XPlus => "X+",
            StabilizerLabel::XMinus => "X-",
            StabilizerLabel::YPlus => "Y+",
            StabilizerLabel::YMinus => "Y-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        StabilizerLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("invalid stabilizer label {s:?}")))
    }
}

/// Tensor product of six-state single-qubit stabilizers, one per qubit.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct StabilizerProductState {
    labels: Vec<StabilizerLabel>,
}

impl StabilizerProductState {
    pub fn new(labels: Vec<StabilizerLabel>) -> Self {
        StabilizerProductState { labels }
    }

    /// `|0...0>`.
    pub fn all_z_plus(n: usize) -> Self {
        StabilizerProductState {
            labels: vec![StabilizerLabel::ZPlus; n],
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[StabilizerLabel] {
        &self.labels
    }
}

impl fmt::Display for StabilizerProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

/// `<psi|P|psi>` for a stabilizer product state: the product of per-qubit
/// factors, each +1/-1 when the label's axis matches the Pauli factor and 0
/// when the axes differ (identity factors contribute 1).
pub fn stab_expectation(psi: &StabilizerProductState, p: &PauliString) -> Result<i32> {
    if psi.n() != p.n() {
        return Err(Error::DimensionMismatch {
            left: psi.n(),
            right: p.n(),
        });
    }
    let mut value = 1;
    for (q, axis) in p.support() {
        let label = psi.labels[q];
        if label.axis() == axis {
            value *= label.sign();
        } else {
            return Ok(0);
        }
    }
    Ok(value)
}

/// Draw each qubit label i.i.d. uniformly over the six stabilizers.
pub fn sample_stabilizer_product<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StabilizerProductState {
    let labels = (0..n)
        .map(|_| StabilizerLabel::ALL[rng.random_range(0..6)])
        .collect();
    StabilizerProductState::new(labels)
}

/// The complete 6^n stabilizer-product ensemble, in a fixed order. Small `n`
/// only; used where exact ensemble averages replace sampling.
pub fn all_stabilizer_products(n: usize) -> Vec<StabilizerProductState> {
    let total = 6usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(StabilizerLabel::ALL[code % 6]);
            code /= 6;
        }
        out.push(StabilizerProductState::new(labels));
    }
    out
}

/// Number of n-qubit Pauli strings of weight at most `l_prime`:
/// `sum_{k<=l'} C(n,k) 3^k`.
pub fn low_weight_count(n: usize, l_prime: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1; // C(n, 0)
    let mut pow3: u128 = 1;
    for k in 0..=l_prime.min(n) {
        if k > 0 {
            binom = binom * (n - k + 1) as u128 / k as u128;
            pow3 *= 3;
        }
        total += binom * pow3;
    }
    total
}

/// Streaming enumeration of all Pauli strings with weight at most `l_prime`,
/// in canonical order. Never materializes the full set.
pub fn enumerate_low_weight(n: usize, l_prime: usize) -> Result<LowWeightIter> {
    if l_prime > n {
        return Err(Error::TruncationTooLarge { l_prime, n });
    }
    Ok(LowWeightIter {
        n,
        l_prime,
        weight: 0,
        stack: Vec::new(),
        emitted_identity: false,
    })
}

/// Iterator state: an odometer over `(index, axis)` selections of the
/// current weight. Axis advances fastest, then the index, then earlier
/// slots; weights ascend.
pub struct LowWeightIter {
    n: usize,
    l_prime: usize,
    weight: usize,
    stack: Vec<(usize, u8)>,
    emitted_identity: bool,
}

impl LowWeightIter {
    fn first_combination(&mut self) -> bool {
        // Lexicographically smallest weight-k selection: indices 0..k, all X.
        if self.weight > self.n {
            return false;
        }
        self.stack = (0..self.weight).map(|i| (i, 0u8)).collect();
        true
    }

    fn advance(&mut self) -> bool {
        // Bump the last slot's axis, then its index, backtracking as needed;
        // any bump resets the slots after it to consecutive indices.
        while let Some((idx, axis)) = self.stack.pop() {
            let slot = self.stack.len();
            let bumped = if axis < 2 {
                Some((idx, axis + 1))
            } else {
                // Slot must leave room for the remaining slots after it.
                let max_idx = self.n - (self.weight - slot);
                (idx < max_idx).then_some((idx + 1, 0))
            };
            if let Some(entry) = bumped {
                self.stack.push(entry);
                for _ in slot + 1..self.weight {
                    let prev = self.stack.last().unwrap().0;
                    self.stack.push((prev + 1, 0));
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> PauliString {
        let support = self
            .stack
            .iter()
            .map(|&(q, a)| (q, Axis::from_index(a)))
            .collect();
        PauliString {
            n: self.n,
            support,
        }
    }
}

impl Iterator for LowWeightIter {
    type Item = PauliString;

    fn next(&mut self) -> Option<PauliString> {
        if self.weight == 0 {
            if self.emitted_identity {
                self.weight = 1;
                if self.weight > self.l_prime || !self.first_combination() {
                    return None;
                }
                return Some(self.current());
            }
            self.emitted_identity = true;
            return Some(PauliString::identity(self.n));
        }
        if self.advance() {
            return Some(self.current());
        }
        loop {
            self.weight += 1;
            if self.weight > self.l_prime {
                return None;
            }
            if self.first_combination() {
                return Some(self.current());
            }
        }
    }
}
