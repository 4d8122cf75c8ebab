//! JSON experiment configuration. One document drives a whole run; no
//! environment variables are consulted anywhere.

use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_random_circuit, build_tfim_circuit, Architecture, Circuit, GateEnsemble,
};
use crate::learn::Acquisition;
use crate::noise::NoiseChannel;
use crate::pauli::{PauliObservable, PauliString};
use crate::rng::{derived_rng, streams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    QstSweep,
    QptSweep,
    Zne,
    EntangledQpt,
    MomentChecks,
    LowerBound,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::QstSweep => "qst_sweep",
            ExperimentKind::QptSweep => "qpt_sweep",
            ExperimentKind::Zne => "zne",
            ExperimentKind::EntangledQpt => "entangled_qpt",
            ExperimentKind::MomentChecks => "moment_checks",
            ExperimentKind::LowerBound => "lower_bound",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSpec {
    /// "tfim", "brickwork" or "staircase".
    pub architecture: String,
    /// Grid shape for TFIM; `rows * cols` is the register size.
    #[serde(default)]
    pub rows: usize,
    #[serde(default)]
    pub cols: usize,
    /// Register size for random architectures.
    #[serde(default)]
    pub n: usize,
    /// Trotter steps (TFIM) or depth parameter (random architectures).
    pub layers: usize,
    #[serde(default = "default_theta_h")]
    pub theta_h: f64,
    /// Optional transverse-angle sweep; each value reruns the experiment.
    #[serde(default)]
    pub theta_h_sweep: Option<Vec<f64>>,
    #[serde(default = "default_ensemble")]
    pub ensemble: GateEnsemble,
}

fn default_theta_h() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn default_ensemble() -> GateEnsemble {
    GateEnsemble::HaarSu4
}

impl CircuitSpec {
    pub fn register_size(&self) -> usize {
        if self.architecture == "tfim" {
            self.rows * self.cols
        } else {
            self.n
        }
    }

    pub fn grid(&self) -> (usize, usize) {
        if self.architecture == "tfim" {
            (self.rows, self.cols)
        } else {
            (0, 0)
        }
    }

    /// Build the circuit for one sweep point. TFIM circuits are
    /// deterministic; random architectures draw gates from the seed stream
    /// of `(master_seed, trial)`.
    pub fn build(&self, theta_h: f64, layers: usize, master_seed: u64, trial: u64) -> Result<Circuit> {
        match self.architecture.as_str() {
            "tfim" => {
                let mut circuit = build_tfim_circuit(self.rows, self.cols, layers, theta_h)?;
                circuit.seed = Some(master_seed);
                Ok(circuit)
            }
            "brickwork" | "staircase" => {
                let arch = if self.architecture == "brickwork" {
                    Architecture::Brickwork
                } else {
                    Architecture::Staircase
                };
                let seed = crate::rng::derive_seed(master_seed, streams::CIRCUIT, trial);
                let mut rng = derived_rng(master_seed, streams::CIRCUIT, trial);
                let mut circuit = build_random_circuit(self.n, layers, arch, self.ensemble, &mut rng)?;
                circuit.seed = Some(seed);
                Ok(circuit)
            }
            other => Err(Error::Config(format!("unknown architecture {other:?}"))),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.architecture.as_str() {
            "tfim" => {
                if self.rows == 0 || self.cols == 0 {
                    return Err(Error::Config("tfim circuits need rows and cols".into()));
                }
            }
            "brickwork" | "staircase" => {
                if self.n < 2 {
                    return Err(Error::Config("random circuits need n >= 2".into()));
                }
            }
            other => return Err(Error::Config(format!("unknown architecture {other:?}"))),
        }
        if self.layers == 0 {
            return Err(Error::Config("layers must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub l_prime: Vec<usize>,
    pub n_data: usize,
    #[serde(default = "default_acquisition")]
    pub acquisition: Acquisition,
    /// Replace i.i.d. sampling by one pass over the complete 6^n stabilizer
    /// ensemble with exact values (small registers only): the estimators
    /// become exact ensemble averages.
    #[serde(default)]
    pub complete_ensemble: bool,
}

fn default_acquisition() -> Acquisition {
    Acquisition::Exact
}

impl Default for LearnerSpec {
    fn default() -> Self {
        LearnerSpec {
            l_prime: vec![1, 2],
            n_data: 10_000,
            acquisition: Acquisition::Exact,
            complete_ensemble: false,
        }
    }
}

/// Held-out evaluation and Monte-Carlo sizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalSpec {
    #[serde(default = "default_product_inputs")]
    pub product_inputs: usize,
    #[serde(default = "default_entangled_inputs")]
    pub entangled_inputs: usize,
    #[serde(default = "default_prep_layers")]
    pub prep_layers: usize,
    /// Trajectory count for past-the-cap registers.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Draw count for the moment checks.
    #[serde(default = "default_moment_draws")]
    pub moment_draws: usize,
}

fn default_product_inputs() -> usize {
    100
}
fn default_entangled_inputs() -> usize {
    20
}
fn default_prep_layers() -> usize {
    2
}
fn default_trajectories() -> usize {
    2000
}
fn default_moment_draws() -> usize {
    100_000
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec {
            product_inputs: default_product_inputs(),
            entangled_inputs: default_entangled_inputs(),
            prep_layers: default_prep_layers(),
            trajectories: default_trajectories(),
            moment_draws: default_moment_draws(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZneSpec {
    #[serde(default = "default_scales")]
    pub scales: Vec<usize>,
}

fn default_scales() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}

impl Default for ZneSpec {
    fn default() -> Self {
        ZneSpec {
            scales: default_scales(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundSpec {
    pub gamma: f64,
    pub d: u32,
    pub n: u32,
    pub eta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub circuit: Option<CircuitSpec>,
    #[serde(default = "NoiseChannel::identity")]
    pub noise: NoiseChannel,
    #[serde(default)]
    pub learner: LearnerSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Compact Pauli string of the target observable (default: Z on qubit 0).
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub eval: EvalSpec,
    #[serde(default)]
    pub zne: ZneSpec,
    #[serde(default)]
    pub lower_bound: Option<LowerBoundSpec>,
    /// Force the trajectory fallback even under the dense-oracle cap.
    #[serde(default)]
    pub force_trajectory: bool,
    #[serde(default)]
    pub out: Option<std::path::PathBuf>,
}

fn default_trials() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let needs_circuit = !matches!(
            self.experiment,
            ExperimentKind::LowerBound | ExperimentKind::MomentChecks
        );
        match (&self.circuit, needs_circuit) {
            (None, true) => {
                return Err(Error::Config(format!(
                    "experiment {:?} needs a circuit spec",
                    self.experiment
                )))
            }
            (Some(spec), _) => spec.validate()?,
            (None, false) => {}
        }
        self.noise
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.learner.l_prime.is_empty() {
            return Err(Error::Config("learner.l_prime must be non-empty".into()));
        }
        if self.learner.n_data == 0 {
            return Err(Error::Config("learner.n_data must be >= 1".into()));
        }
        if self.learner.complete_ensemble {
            if matches!(self.learner.acquisition, Acquisition::Shots(_)) {
                return Err(Error::Config(
                    "complete_ensemble implies exact acquisition".into(),
                ));
            }
            if let Some(spec) = &self.circuit {
                if spec.register_size() > 8 {
                    return Err(Error::Config(
                        "complete_ensemble is limited to n <= 8 (6^n states)".into(),
                    ));
                }
            }
        }
        if matches!(self.experiment, ExperimentKind::Zne) {
            if self.zne.scales.is_empty() || self.zne.scales.iter().any(|&s| s == 0) {
                return Err(Error::Config("zne.scales must be positive".into()));
            }
        }
        if matches!(self.experiment, ExperimentKind::LowerBound) && self.lower_bound.is_none() {
            return Err(Error::Config("lower_bound parameters missing".into()));
        }
        if let Some(obs) = &self.observable {
            let n = self.circuit.as_ref().map(|c| c.register_size()).unwrap_or(0);
            let p = PauliString::from_compact(obs).map_err(|e| Error::Config(e.to_string()))?;
            if n > 0 && p.n() != n {
                return Err(Error::Config(format!(
                    "observable acts on {} qubits but the register has {n}",
                    p.n()
                )));
            }
        }
        Ok(())
    }

    /// Target observable: the configured Pauli string, or `Z` on qubit 0.
    pub fn observable(&self, n: usize) -> Result<PauliObservable> {
        match &self.observable {
            Some(s) => {
                let p = PauliString::from_compact(s)?;
                PauliObservable::new(n, [(1.0, p)])
            }
            None => PauliObservable::single(n, 0, crate::pauli::Axis::Z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_qst_config() {
        let json = r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 3, "layers": 10},
            "noise": {"type": "depolarizing", "gamma": 0.02},
            "learner": {"l_prime": [1, 2, 3], "n_data": 50000, "acquisition": "exact"},
            "trials": 10,
            "seed": 7
        }"#;
        let config = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(config.experiment, ExperimentKind::QstSweep);
        assert_eq!(config.circuit.as_ref().unwrap().register_size(), 6);
        assert_eq!(config.learner.l_prime, vec![1, 2, 3]);
        assert_eq!(config.learner.acquisition, Acquisition::Exact);
    }

    #[test]
    fn parses_shots_and_composed_noise() {
        let json = r#"{
            "experiment": "qpt_sweep",
            "circuit": {"architecture": "brickwork", "n": 4, "layers": 3},
            "noise": {"type": "composed", "parts": [
                {"type": "depolarizing", "gamma": 0.01},
                {"type": "amplitude_damping", "gamma": 0.02}
            ]},
            "learner": {"l_prime": [2], "n_data": 100, "acquisition": {"shots": 64}}
        }"#;
        let config = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(config.learner.acquisition, Acquisition::Shots(64));
        assert_eq!(config.noise.kind_tag(), "composed(depolarizing+amplitude_damping)");
    }

    #[test]
    fn rejects_bad_configs() {
        // zero trials
        let json = r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 1},
            "trials": 0
        }"#;
        assert!(ExperimentConfig::from_json(json).is_err());

        // missing circuit
        let json = r#"{"experiment": "qst_sweep"}"#;
        assert!(ExperimentConfig::from_json(json).is_err());

        // bad architecture
        let json = r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "ring", "n": 4, "layers": 2}
        }"#;
        assert!(ExperimentConfig::from_json(json).is_err());

        // observable size mismatch
        let json = r#"{
            "experiment": "qpt_sweep",
            "circuit": {"architecture": "brickwork", "n": 4, "layers": 2},
            "observable": "ZII"
        }"#;
        assert!(ExperimentConfig::from_json(json).is_err());
    }
}
