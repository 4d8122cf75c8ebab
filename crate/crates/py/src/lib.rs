//! Python bindings: the main types (Pauli strings, stabilizer states, noise
//! channels, circuits, density matrices, learned models) and the operations
//! that tie them together, including full experiment runs from JSON configs.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use paulilearn::circuits as pl_circuits;
use paulilearn::experiments as pl_experiments;
use paulilearn::learn as pl_learn;
use paulilearn::noise as pl_noise;
use paulilearn::oracle as pl_oracle;
use paulilearn::pauli as pl_pauli;
use paulilearn::paths as pl_paths;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: paulilearn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "PauliString", skip_from_py_object)]
#[derive(Clone)]
struct PyPauliString {
    inner: pl_pauli::PauliString,
}

#[pymethods]
impl PyPauliString {
    /// Parse a dense one-character-per-qubit string, e.g. "IXZY".
    #[new]
    fn new(compact: &str) -> PyResult<Self> {
        Ok(PyPauliString {
            inner: pl_pauli::PauliString::from_compact(compact).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyPauliString {
            inner: pl_pauli::PauliString::identity(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn weight(&self) -> usize {
        self.inner.weight()
    }

    fn __str__(&self) -> String {
        self.inner.to_compact()
    }

    fn __repr__(&self) -> String {
        format!("PauliString(\"{}\")", self.inner.to_compact())
    }

    fn __richcmp__(&self, other: &Self, op: pyo3::basic::CompareOp) -> bool {
        op.matches(self.inner.cmp(&other.inner))
    }
}

#[pyclass(name = "StabilizerProductState", skip_from_py_object)]
#[derive(Clone)]
struct PyStabilizerState {
    inner: pl_pauli::StabilizerProductState,
}

#[pymethods]
impl PyStabilizerState {
    /// Parse label pairs, e.g. "Z+X-Y+".
    #[new]
    fn new(labels: &str) -> PyResult<Self> {
        let chars: Vec<char> = labels.chars().collect();
        if chars.len() % 2 != 0 {
            return Err(PyValueError::new_err("labels must be pairs like Z+X-"));
        }
        let parsed = chars
            .chunks(2)
            .map(|p| pl_pauli::StabilizerLabel::parse(&p.iter().collect::<String>()))
            .collect::<paulilearn::Result<Vec<_>>>()
            .map_err(err)?;
        Ok(PyStabilizerState {
            inner: pl_pauli::StabilizerProductState::new(parsed),
        })
    }

    /// Uniform sample over the 6^n stabilizer products.
    #[staticmethod]
    fn sample(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PyStabilizerState {
            inner: pl_pauli::sample_stabilizer_product(n, &mut rng),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("StabilizerProductState(\"{}\")", self.inner)
    }
}

/// `<psi|P|psi>` in {-1, 0, +1}.
#[pyfunction]
fn stab_expectation(psi: &PyStabilizerState, p: &PyPauliString) -> PyResult<i32> {
    pl_pauli::stab_expectation(&psi.inner, &p.inner).map_err(err)
}

/// All Pauli strings of weight at most `l_prime`, in canonical order.
#[pyfunction]
fn enumerate_low_weight(n: usize, l_prime: usize) -> PyResult<Vec<PyPauliString>> {
    Ok(pl_pauli::enumerate_low_weight(n, l_prime)
        .map_err(err)?
        .map(|inner| PyPauliString { inner })
        .collect())
}

#[pyclass(name = "NoiseChannel", skip_from_py_object)]
#[derive(Clone)]
struct PyNoiseChannel {
    inner: pl_noise::NoiseChannel,
}

#[pymethods]
impl PyNoiseChannel {
    /// Channel from its JSON spec, e.g. `{"type":"depolarizing","gamma":0.02}`.
    #[new]
    fn new(spec_json: &str) -> PyResult<Self> {
        let inner: pl_noise::NoiseChannel =
            serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(PyNoiseChannel { inner })
    }

    #[staticmethod]
    fn depolarizing(gamma: f64) -> PyResult<Self> {
        let inner = pl_noise::NoiseChannel::Depolarizing { gamma };
        inner.validate().map_err(err)?;
        Ok(PyNoiseChannel { inner })
    }

    #[staticmethod]
    fn amplitude_damping(gamma: f64) -> PyResult<Self> {
        let inner = pl_noise::NoiseChannel::AmplitudeDamping { gamma };
        inner.validate().map_err(err)?;
        Ok(PyNoiseChannel { inner })
    }

    /// Depolarizing followed by amplitude damping, per qubit per layer.
    #[staticmethod]
    fn mixture(gamma_depolarizing: f64, gamma_damping: f64) -> PyResult<Self> {
        let inner = pl_noise::NoiseChannel::mixture(gamma_depolarizing, gamma_damping);
        inner.validate().map_err(err)?;
        Ok(PyNoiseChannel { inner })
    }

    /// 4x4 Pauli-transfer matrix, rows/columns ordered (I, X, Y, Z).
    fn transfer_matrix(&self) -> [[f64; 4]; 4] {
        pl_noise::transfer_matrix(&self.inner).0
    }

    fn effective_depolarizing_rate(&self) -> PyResult<f64> {
        pl_noise::effective_depolarizing_rate(&self.inner).map_err(err)
    }

    /// `(gamma_eff, PTM of E')` of the depolarizing factorization.
    fn decompose_non_unital(&self) -> PyResult<(f64, [[f64; 4]; 4])> {
        let d = pl_noise::decompose_non_unital(&self.inner).map_err(err)?;
        Ok((d.gamma_eff, d.e_prime.0))
    }

    fn __repr__(&self) -> String {
        format!("NoiseChannel({})", self.inner.kind_tag())
    }
}

#[pyclass(name = "Circuit", skip_from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: pl_circuits::Circuit,
}

#[pymethods]
impl PyCircuit {
    /// Trotterized 2D transverse-field Ising circuit.
    #[staticmethod]
    fn tfim(rows: usize, cols: usize, steps: usize, theta_h: f64) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: pl_circuits::build_tfim_circuit(rows, cols, steps, theta_h).map_err(err)?,
        })
    }

    /// Random 2-design circuit; `architecture` is "brickwork" or
    /// "staircase", `ensemble` is "haar" or "clifford".
    #[staticmethod]
    fn random(n: usize, d: usize, architecture: &str, ensemble: &str, seed: u64) -> PyResult<Self> {
        let arch = match architecture {
            "brickwork" => pl_circuits::Architecture::Brickwork,
            "staircase" => pl_circuits::Architecture::Staircase,
            other => return Err(PyValueError::new_err(format!("unknown architecture {other}"))),
        };
        let ens = match ensemble {
            "haar" => pl_circuits::GateEnsemble::HaarSu4,
            "clifford" => pl_circuits::GateEnsemble::Clifford2,
            other => return Err(PyValueError::new_err(format!("unknown ensemble {other}"))),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inner = pl_circuits::build_random_circuit(n, d, arch, ens, &mut rng).map_err(err)?;
        inner.seed = Some(seed);
        Ok(PyCircuit { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn gate_count(&self) -> usize {
        self.inner.gate_count()
    }

    fn trotter_steps(&self) -> Option<usize> {
        self.inner.trotter_steps()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(n={}, depth={}, gates={})",
            self.inner.n,
            self.inner.depth(),
            self.inner.gate_count()
        )
    }
}

#[pyclass(name = "DensityMatrix", skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: pl_oracle::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// `|0^n><0^n|`.
    #[staticmethod]
    fn zero_state(n: usize) -> PyResult<Self> {
        Ok(PyDensityMatrix {
            inner: pl_oracle::DensityMatrix::zero_state(n).map_err(err)?,
        })
    }

    /// Evolve through a noisy circuit (gates, then per-qubit noise, layer by
    /// layer).
    fn evolve(&self, circuit: &PyCircuit, noise: &PyNoiseChannel) -> PyResult<Self> {
        Ok(PyDensityMatrix {
            inner: pl_oracle::evolve_density(&circuit.inner, &noise.inner, &self.inner)
                .map_err(err)?,
        })
    }

    fn overlap(&self, psi: &PyStabilizerState) -> PyResult<f64> {
        pl_oracle::overlap(&self.inner, &psi.inner).map_err(err)
    }

    /// `alpha_P = 2^-n Tr[P rho]`.
    fn pauli_coeff(&self, p: &PyPauliString) -> PyResult<f64> {
        pl_oracle::exact_pauli_coeff(&self.inner, &p.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(n={})", self.inner.n())
    }
}

/// Untruncated/truncated Pauli-path reconstruction of a state under uniform
/// unital decay; returns `{compact_string: coefficient}`.
#[pyfunction]
fn truncated_state_coeffs(
    circuit: &PyCircuit,
    gamma: f64,
    l: usize,
) -> PyResult<BTreeMap<String, f64>> {
    let expansion = pl_paths::truncated_state_coeffs(&circuit.inner, gamma, l).map_err(err)?;
    Ok(expansion
        .terms
        .into_iter()
        .map(|(p, v)| (p.to_compact(), v))
        .collect())
}

/// Pauli-path reconstruction of the Heisenberg image `C^dag(O)` through the
/// depolarizing factorization (works for non-unital channels).
#[pyfunction]
fn truncated_adjoint_coeffs(
    circuit: &PyCircuit,
    noise: &PyNoiseChannel,
    observable: Vec<(f64, String)>,
    l: usize,
) -> PyResult<BTreeMap<String, f64>> {
    let n = circuit.inner.n;
    let terms = observable
        .into_iter()
        .map(|(c, s)| Ok((c, pl_pauli::PauliString::from_compact(&s).map_err(err)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let obs = pl_pauli::PauliObservable::new(n, terms).map_err(err)?;
    let expansion =
        pl_paths::truncated_adjoint_coeffs(&circuit.inner, &noise.inner, &obs, l).map_err(err)?;
    Ok(expansion
        .terms
        .into_iter()
        .map(|(p, v)| (p.to_compact(), v))
        .collect())
}

#[pyclass(name = "LearnedProcess")]
struct PyLearnedProcess {
    inner: pl_learn::LearnedProcess,
}

#[pymethods]
impl PyLearnedProcess {
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(PyLearnedProcess {
            inner: serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn l_prime(&self) -> usize {
        self.inner.l_prime
    }

    fn coeffs(&self) -> BTreeMap<String, f64> {
        self.inner
            .coeffs
            .iter()
            .map(|(p, v)| (p.to_compact(), *v))
            .collect()
    }

    fn predict_stab(&self, psi: &PyStabilizerState) -> PyResult<f64> {
        self.inner.predict_stab(&psi.inner).map_err(err)
    }

    fn predict_bloch(&self, bloch: Vec<[f64; 3]>) -> PyResult<f64> {
        self.inner.predict_bloch(&bloch).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "LearnedProcess(n={}, l_prime={}, terms={})",
            self.inner.n,
            self.inner.l_prime,
            self.inner.coeffs.len()
        )
    }
}

/// Train a process model from a JSON experiment config; returns the model.
#[pyfunction]
fn learn_process(config_json: &str) -> PyResult<PyLearnedProcess> {
    let config = pl_experiments::ExperimentConfig::from_json(config_json).map_err(err)?;
    Ok(PyLearnedProcess {
        inner: pl_experiments::train_process_model(&config).map_err(err)?,
    })
}

/// Run any configured experiment; returns `(csv, report_json_or_None)`.
#[pyfunction]
#[pyo3(signature = (config_json, record_timing = false))]
fn run_experiment(config_json: &str, record_timing: bool) -> PyResult<(String, Option<String>)> {
    let config = pl_experiments::ExperimentConfig::from_json(config_json).map_err(err)?;
    let out = pl_experiments::run_experiment(&config, pl_experiments::RunOptions { record_timing })
        .map_err(err)?;
    let report = out
        .report
        .map(|r| serde_json::to_string(&r))
        .transpose()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((pl_experiments::rows_to_csv(&out.rows), report))
}

/// Worst-case sample lower bound `(1-gamma)^{-2cd} (1-eta)^2 / (2n)`.
#[pyfunction]
fn lower_bound_samples(gamma: f64, d: u32, n: u32, eta: f64) -> PyResult<f64> {
    pl_experiments::lower_bound_samples(gamma, d, n, eta).map_err(err)
}

#[pymodule]
fn paulilearn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPauliString>()?;
    m.add_class::<PyStabilizerState>()?;
    m.add_class::<PyNoiseChannel>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyLearnedProcess>()?;
    m.add_function(wrap_pyfunction!(stab_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_low_weight, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_state_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_adjoint_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(learn_process, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_samples, m)?)?;
    Ok(())
}
