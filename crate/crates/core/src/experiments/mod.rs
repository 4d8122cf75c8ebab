//! Reproduction harness: configured sweeps over circuit families, learners
//! and noise, with CSV rows (fixed column order) and JSON reports.
//!
//! Every run is a pure function of its configuration and master seed: trial
//! circuits, datasets and held-out inputs all draw from seeds derived per
//! index, and reductions are order-fixed, so output bytes do not depend on
//! the worker count. Wall-clock columns are the one exception; runs that
//! need byte-identical output disable timing capture.

pub mod checks;
mod config;
pub mod zne;

pub use config::{
    CircuitSpec, EvalSpec, ExperimentConfig, ExperimentKind, LearnerSpec, LowerBoundSpec, ZneSpec,
};

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuits::build_entangled_prep;
use crate::learn::{
    estimate_process_coeffs, estimate_state_coeffs, Acquisition, LearnedProcess, LearnerMeta,
    SampleRecord,
};
use crate::oracle::{
    adjoint_evolve_observable, evolve_density, overlap, prepare_statevector,
    stabilizer_statevector, statevector_pauli_expectation, DensityMatrix, OperatorMatrix,
    TrajectorySim, DENSE_ORACLE_CAP,
};
use crate::pauli::{enumerate_low_weight, sample_stabilizer_product, PauliString};
use crate::rng::{derive_seed, derived_rng, streams};
use crate::{Error, KahanSum, Result};

/// One measurement in a sweep. CSV columns are fixed:
/// `experiment,n,rows,cols,depth,l_prime,gamma,noise_type,trial,seed,metric,value,wall_ms`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub depth: usize,
    pub l_prime: usize,
    pub gamma: f64,
    pub noise_type: String,
    pub trial: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub wall_ms: u64,
}

pub const CSV_HEADER: &str =
    "experiment,n,rows,cols,depth,l_prime,gamma,noise_type,trial,seed,metric,value,wall_ms";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.rows,
            self.cols,
            self.depth,
            self.l_prime,
            self.gamma,
            self.noise_type,
            self.trial,
            self.seed,
            self.metric,
            self.value,
            self.wall_ms
        )
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Record wall-clock times per row. Disable for byte-identical output.
    pub record_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_timing: true }
    }
}

pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// Experiment-specific report (ZNE fits, check summaries).
    pub report: Option<serde_json::Value>,
}

/// Worst-case sample lower bound `m = (1-gamma)^(-2cd) (1-eta)^2 / (2n)`
/// with `c = 1/(2 ln 2)`.
pub fn lower_bound_samples(gamma: f64, d: u32, n: u32, eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be in [0,1), got {gamma}"
        )));
    }
    if !(0.0 < eta && eta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be in (0,1), got {eta}"
        )));
    }
    if d < 1 || n < 1 {
        return Err(Error::InvalidParameter("need d >= 1 and n >= 1".into()));
    }
    let c = 1.0 / (2.0 * std::f64::consts::LN_2);
    Ok((1.0 - gamma).powf(-2.0 * c * d as f64) * (1.0 - eta).powi(2) / (2.0 * n as f64))
}

pub fn run_experiment(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::QstSweep => run_qst_sweep(config, opts),
        ExperimentKind::QptSweep => run_qpt_sweep(config, opts),
        ExperimentKind::EntangledQpt => run_entangled_qpt(config, opts),
        ExperimentKind::Zne => run_zne(config, opts),
        ExperimentKind::MomentChecks => run_moment_checks(config, opts),
        ExperimentKind::LowerBound => run_lower_bound(config, opts),
    }
}

// --- shared helpers -----------------------------------------------------------

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

/// `<v|A|v>` for a dense Hermitian operator.
fn quad_form(a: &OperatorMatrix, v: &[Complex64]) -> f64 {
    let dim = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            row += a.data()[i * dim + j] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

/// Uniform point on the Bloch sphere.
fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Statevector of a product of single-qubit pure states given Bloch vectors.
fn bloch_statevector(bloch: &[[f64; 3]]) -> Vec<Complex64> {
    let n = bloch.len();
    let dim = 1usize << n;
    let factors: Vec<[Complex64; 2]> = bloch
        .iter()
        .map(|b| {
            let theta = b[2].clamp(-1.0, 1.0).acos();
            let phi = b[1].atan2(b[0]);
            [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ]
        })
        .collect();
    let mut out = vec![Complex64::new(1.0, 0.0); dim];
    for (i, v) in out.iter_mut().enumerate() {
        for (q, f) in factors.iter().enumerate() {
            *v *= f[(i >> (n - 1 - q)) & 1];
        }
    }
    out
}

fn zero_statevector(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

struct RowContext {
    experiment: String,
    n: usize,
    rows: usize,
    cols: usize,
    depth: usize,
    gamma: f64,
    noise_type: String,
    seed: u64,
}

impl RowContext {
    fn row(&self, l_prime: usize, trial: usize, metric: &str, value: f64, wall_ms: u64) -> ResultRow {
        ResultRow {
            experiment: self.experiment.clone(),
            n: self.n,
            rows: self.rows,
            cols: self.cols,
            depth: self.depth,
            l_prime,
            gamma: self.gamma,
            noise_type: self.noise_type.clone(),
            trial,
            seed: self.seed,
            metric: metric.into(),
            value,
            wall_ms,
        }
    }
}

fn clock(opts: RunOptions, start: Instant) -> u64 {
    if opts.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

fn learner_meta(config: &ExperimentConfig, seed: u64, n_data: usize) -> LearnerMeta {
    LearnerMeta {
        n_data,
        acquisition: if config.learner.complete_ensemble {
            "complete_ensemble".into()
        } else {
            config.learner.acquisition.label()
        },
        seed,
    }
}

/// QST dataset per the learner spec: i.i.d. stabilizer sampling, or one
/// exact pass over the complete 6^n ensemble.
fn build_qst_dataset(
    config: &ExperimentConfig,
    n: usize,
    rho: &DensityMatrix,
    master: u64,
) -> Result<Vec<SampleRecord>> {
    if config.learner.complete_ensemble {
        return crate::pauli::all_stabilizer_products(n)
            .into_par_iter()
            .map(|state| {
                let value = overlap(rho, &state)?;
                Ok(SampleRecord { state, value })
            })
            .collect();
    }
    crate::learn::generate_qst_dataset(
        |psi| overlap(rho, psi),
        n,
        config.learner.n_data,
        config.learner.acquisition,
        master,
    )
}

/// QPT dataset against a fixed Heisenberg image `C^dag(O)`.
fn build_qpt_dataset(
    config: &ExperimentConfig,
    n: usize,
    heis: &OperatorMatrix,
    bound: f64,
    master: u64,
) -> Result<Vec<SampleRecord>> {
    if config.learner.complete_ensemble {
        return Ok(crate::pauli::all_stabilizer_products(n)
            .into_par_iter()
            .map(|state| {
                let value = quad_form(heis, &stabilizer_statevector(&state));
                SampleRecord { state, value }
            })
            .collect());
    }
    crate::learn::generate_qpt_dataset(
        |psi| Ok(quad_form(heis, &stabilizer_statevector(psi))),
        n,
        config.learner.n_data,
        config.learner.acquisition,
        master,
        bound,
    )
}

/// Trajectory-backed dataset: each record's value is the mean over
/// `runs_per_record` stochastic circuit runs.
fn trajectory_dataset<F>(
    n: usize,
    n_data: usize,
    master_seed: u64,
    estimate: F,
) -> Result<Vec<SampleRecord>>
where
    F: Fn(&crate::pauli::StabilizerProductState, &mut rand_chacha::ChaCha8Rng) -> Result<f64>
        + Sync,
{
    (0..n_data)
        .into_par_iter()
        .map(|j| {
            let mut rng = derived_rng(master_seed, streams::DATASET, j as u64);
            let state = sample_stabilizer_product(n, &mut rng);
            let value = estimate(&state, &mut rng)?;
            Ok(SampleRecord { state, value })
        })
        .collect()
}

// --- QST sweep ------------------------------------------------------------------

fn run_qst_sweep(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let spec = config.circuit.as_ref().expect("validated");
    let n = spec.register_size();
    let use_trajectory = config.force_trajectory || n > DENSE_ORACLE_CAP;
    let thetas: Vec<(bool, f64)> = match &spec.theta_h_sweep {
        Some(v) => v.iter().map(|&t| (true, t)).collect(),
        None => vec![(false, spec.theta_h)],
    };

    let mut rows = Vec::new();
    for (theta_idx, &(labelled, theta)) in thetas.iter().enumerate() {
        for trial in 0..config.trials {
            let point_index = (theta_idx * config.trials + trial) as u64;
            let circuit = spec.build(theta, spec.layers, config.seed, trial as u64)?;
            let ctx = RowContext {
                experiment: config.experiment.tag().into(),
                n,
                rows: spec.grid().0,
                cols: spec.grid().1,
                depth: circuit.depth(),
                gamma: config.noise.representative_gamma(),
                noise_type: config.noise.kind_tag(),
                seed: config.seed,
            };
            let metric_name = |base: &str| {
                if labelled {
                    format!("{base}@theta_h={theta:.6}")
                } else {
                    base.to_string()
                }
            };
            let dataset_master = derive_seed(config.seed, streams::DATASET, point_index);

            if !use_trajectory {
                let rho = evolve_density(&circuit, &config.noise, &DensityMatrix::zero_state(n)?)?;
                let dataset = build_qst_dataset(config, n, &rho, dataset_master)?;
                for &l_prime in &config.learner.l_prime {
                    let start = Instant::now();
                    let learned = estimate_state_coeffs(
                        &dataset,
                        n,
                        l_prime,
                        learner_meta(config, dataset_master, dataset.len()),
                    )?;
                    let score = learned.reconstruct_and_score(&rho)?;
                    rows.push(ctx.row(
                        l_prime,
                        trial,
                        &metric_name("trace_norm_error"),
                        score,
                        clock(opts, start),
                    ));
                }
            } else {
                let runs_per_record = match config.learner.acquisition {
                    Acquisition::Shots(m) => m as usize,
                    Acquisition::Exact => {
                        return Err(Error::Config(
                            "trajectory fallback needs shots acquisition (runs per record)"
                                .into(),
                        ))
                    }
                };
                let sim = TrajectorySim::new(&circuit, &config.noise)?;
                let input = zero_statevector(n);
                let dataset =
                    trajectory_dataset(n, config.learner.n_data, dataset_master, |psi, rng| {
                        Ok(sim.estimate_overlap(psi, &input, runs_per_record, rng)?.0)
                    })?;
                rows.extend(score_qst_trajectory(
                    config, opts, &ctx, &sim, &dataset, trial, point_index, &metric_name,
                )?);
            }
        }
    }
    Ok(RunOutput { rows, report: None })
}

/// Frobenius-distance scoring without a dense oracle:
/// `||rho - rho_hat||_F^2 = 2^-n Tr[rho^2] - 2 sum_P a_hat_P a_P + sum_P a_hat_P^2`,
/// with the first two moments estimated from trajectories.
#[allow(clippy::too_many_arguments)]
fn score_qst_trajectory(
    config: &ExperimentConfig,
    opts: RunOptions,
    ctx: &RowContext,
    sim: &TrajectorySim,
    dataset: &[SampleRecord],
    trial: usize,
    point_index: u64,
    metric_name: &dyn Fn(&str) -> String,
) -> Result<Vec<ResultRow>> {
    let n = ctx.n;
    let start = Instant::now();
    let learned: Vec<_> = config
        .learner
        .l_prime
        .iter()
        .map(|&l| {
            estimate_state_coeffs(dataset, n, l, learner_meta(config, config.seed, dataset.len()))
                .map(|m| (l, m))
        })
        .collect::<Result<_>>()?;

    let largest = config.learner.l_prime.iter().copied().max().unwrap();
    let p_union: Vec<PauliString> = enumerate_low_weight(n, largest)?.collect();
    let input = zero_statevector(n);
    let runs = config.eval.trajectories.max(2);
    let mut rng = derived_rng(config.seed, streams::EVAL_INPUTS, point_index);

    // one pass: cross-terms per model and paired purities
    let scale = 1.0 / (1u64 << n) as f64;
    let mut cross = vec![KahanSum::new(); learned.len()];
    let mut purity = KahanSum::new();
    let mut purity_sq = KahanSum::new();
    let mut previous: Option<Vec<Complex64>> = None;
    let mut pair_count = 0usize;
    for _ in 0..runs {
        let state = sim.run_once(&input, &mut rng);
        let expectations: Vec<f64> = p_union
            .iter()
            .map(|p| statevector_pauli_expectation(n, &state, p))
            .collect();
        for (k, (_, model)) in learned.iter().enumerate() {
            let mut acc = 0.0;
            for (p, e) in p_union.iter().zip(&expectations) {
                if let Some(a) = model.coeffs.get(p) {
                    acc += a * e;
                }
            }
            cross[k].add(scale * acc);
        }
        match previous.take() {
            Some(other) => {
                let ip: Complex64 = other
                    .iter()
                    .zip(&state)
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let v = ip.norm_sqr();
                purity.add(v);
                purity_sq.add(v * v);
                pair_count += 1;
            }
            None => previous = Some(state),
        }
    }
    let t1 = scale * purity.value() / pair_count.max(1) as f64;
    let t1_var = (scale * scale
        * (purity_sq.value() / pair_count.max(1) as f64
            - (purity.value() / pair_count.max(1) as f64).powi(2)))
    .max(0.0)
        / pair_count.max(1) as f64;

    let mut rows = Vec::new();
    for (k, (l_prime, model)) in learned.iter().enumerate() {
        let t2 = cross[k].value() / runs as f64;
        let t3: f64 = model.coeffs.values().map(|a| a * a).sum();
        let frob_sq = (t1 - 2.0 * t2 + t3).max(0.0);
        let value = frob_sq.sqrt();
        rows.push(ctx.row(
            *l_prime,
            trial,
            &metric_name("frobenius_error_traj"),
            value,
            clock(opts, start),
        ));
        // crude first-order error bar from the purity estimate alone
        let stderr = if value > 1e-12 {
            t1_var.sqrt() / (2.0 * value)
        } else {
            t1_var.sqrt().sqrt()
        };
        rows.push(ctx.row(
            *l_prime,
            trial,
            &metric_name("frobenius_error_traj_stderr"),
            stderr,
            clock(opts, start),
        ));
    }
    Ok(rows)
}

// --- QPT sweep ---------------------------------------------------------------

fn run_qpt_sweep(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let spec = config.circuit.as_ref().expect("validated");
    let n = spec.register_size();
    let obs = config.observable(n)?;
    let use_trajectory = config.force_trajectory || n > DENSE_ORACLE_CAP;

    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let circuit = spec.build(spec.theta_h, spec.layers, config.seed, trial as u64)?;
        let ctx = RowContext {
            experiment: config.experiment.tag().into(),
            n,
            rows: spec.grid().0,
            cols: spec.grid().1,
            depth: circuit.depth(),
            gamma: config.noise.representative_gamma(),
            noise_type: config.noise.kind_tag(),
            seed: config.seed,
        };
        let dataset_master = derive_seed(config.seed, streams::DATASET, trial as u64);

        // held-out product inputs, shared across l'
        let eval_inputs: Vec<Vec<[f64; 3]>> = (0..config.eval.product_inputs)
            .map(|k| {
                let mut rng = derived_rng(config.seed, streams::EVAL_INPUTS, k as u64);
                (0..n).map(|_| random_bloch(&mut rng)).collect()
            })
            .collect();

        if !use_trajectory {
            let heis = adjoint_evolve_observable(&circuit, &config.noise, &obs)?;
            let dataset = build_qpt_dataset(config, n, &heis, obs.coeff_l1(), dataset_master)?;
            let truths: Vec<f64> = eval_inputs
                .par_iter()
                .map(|bloch| quad_form(&heis, &bloch_statevector(bloch)))
                .collect();
            for &l_prime in &config.learner.l_prime {
                let start = Instant::now();
                let learned = estimate_process_coeffs(
                    &dataset,
                    n,
                    l_prime,
                    Some(obs.clone()),
                    learner_meta(config, dataset_master, dataset.len()),
                )?;
                let errs: Vec<f64> = eval_inputs
                    .iter()
                    .zip(&truths)
                    .map(|(bloch, truth)| {
                        learned.predict_bloch(bloch).map(|p| (p - truth).abs())
                    })
                    .collect::<Result<_>>()?;
                let max = errs.iter().cloned().fold(0.0f64, f64::max);
                let mean = errs.iter().sum::<f64>() / errs.len() as f64;
                let wall = clock(opts, start);
                rows.push(ctx.row(l_prime, trial, "max_abs_error", max, wall));
                rows.push(ctx.row(l_prime, trial, "mean_abs_error", mean, wall));
            }
        } else {
            let runs_per_record = match config.learner.acquisition {
                Acquisition::Shots(m) => m as usize,
                Acquisition::Exact => {
                    return Err(Error::Config(
                        "trajectory fallback needs shots acquisition (runs per record)".into(),
                    ))
                }
            };
            let sim = TrajectorySim::new(&circuit, &config.noise)?;
            let dataset =
                trajectory_dataset(n, config.learner.n_data, dataset_master, |psi, rng| {
                    Ok(sim
                        .estimate_expectation(&obs, &stabilizer_statevector(psi), runs_per_record, rng)?
                        .0)
                })?;
            let eval_runs = config.eval.trajectories.max(2);
            let truths: Vec<(f64, f64)> = eval_inputs
                .par_iter()
                .enumerate()
                .map(|(k, bloch)| {
                    let mut rng =
                        derived_rng(config.seed, streams::EVAL_INPUTS, 10_000 + k as u64);
                    sim.estimate_expectation(&obs, &bloch_statevector(bloch), eval_runs, &mut rng)
                })
                .collect::<Result<_>>()?;
            for &l_prime in &config.learner.l_prime {
                let start = Instant::now();
                let learned = estimate_process_coeffs(
                    &dataset,
                    n,
                    l_prime,
                    Some(obs.clone()),
                    learner_meta(config, dataset_master, dataset.len()),
                )?;
                let mut max = 0.0f64;
                let mut mean = 0.0;
                let mut max_stderr = 0.0f64;
                for (bloch, (truth, stderr)) in eval_inputs.iter().zip(&truths) {
                    let err = (learned.predict_bloch(bloch)? - truth).abs();
                    max = max.max(err);
                    mean += err / eval_inputs.len() as f64;
                    max_stderr = max_stderr.max(*stderr);
                }
                let wall = clock(opts, start);
                rows.push(ctx.row(l_prime, trial, "max_abs_error_traj", max, wall));
                rows.push(ctx.row(l_prime, trial, "mean_abs_error_traj", mean, wall));
                rows.push(ctx.row(l_prime, trial, "oracle_stderr_traj", max_stderr, wall));
            }
        }
    }
    Ok(RunOutput { rows, report: None })
}

// --- entangled-input QPT -------------------------------------------------------

fn run_entangled_qpt(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let spec = config.circuit.as_ref().expect("validated");
    let n = spec.register_size();
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeOverCap {
            n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    let obs = config.observable(n)?;
    // One process model per (trial, l'), trained exactly as in the QPT sweep.
    let mut rows = Vec::new();
    for trial in 0..config.trials {
        let circuit = spec.build(spec.theta_h, spec.layers, config.seed, trial as u64)?;
        let ctx = RowContext {
            experiment: config.experiment.tag().into(),
            n,
            rows: spec.grid().0,
            cols: spec.grid().1,
            depth: circuit.depth(),
            gamma: config.noise.representative_gamma(),
            noise_type: config.noise.kind_tag(),
            seed: config.seed,
        };
        let heis = adjoint_evolve_observable(&circuit, &config.noise, &obs)?;
        let dataset_master = derive_seed(config.seed, streams::DATASET, trial as u64);
        let dataset = build_qpt_dataset(config, n, &heis, obs.coeff_l1(), dataset_master)?;

        // entangled held-out inputs from the cyclic-CNOT prep circuit
        let prep_states: Vec<Vec<Complex64>> = (0..config.eval.entangled_inputs)
            .map(|k| {
                let mut rng = derived_rng(
                    derive_seed(config.seed, streams::PREP_ANGLES, trial as u64),
                    streams::PREP_ANGLES,
                    k as u64,
                );
                let angles: Vec<(Vec<f64>, Vec<f64>)> = (0..config.eval.prep_layers)
                    .map(|_| {
                        (
                            (0..n)
                                .map(|_| rng.random_range(0.0..std::f64::consts::PI))
                                .collect(),
                            (0..n)
                                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                                .collect(),
                        )
                    })
                    .collect();
                build_entangled_prep(n, &angles).map(|c| prepare_statevector(&c))
            })
            .collect::<Result<_>>()?;

        let product_inputs: Vec<Vec<[f64; 3]>> = (0..config.eval.product_inputs)
            .map(|k| {
                let mut rng = derived_rng(config.seed, streams::EVAL_INPUTS, k as u64);
                (0..n).map(|_| random_bloch(&mut rng)).collect()
            })
            .collect();

        for &l_prime in &config.learner.l_prime {
            let start = Instant::now();
            let learned = estimate_process_coeffs(
                &dataset,
                n,
                l_prime,
                Some(obs.clone()),
                learner_meta(config, dataset_master, dataset.len()),
            )?;

            let mut entangled_errs = Vec::with_capacity(prep_states.len());
            for (k, state) in prep_states.iter().enumerate() {
                let truth = quad_form(&heis, state);
                let err = (learned.predict_statevector(state)? - truth).abs();
                rows.push(ctx.row(
                    l_prime,
                    trial,
                    &format!("entangled_abs_error_{k:02}"),
                    err,
                    0,
                ));
                entangled_errs.push(err);
            }
            let mut product_errs: Vec<f64> = product_inputs
                .iter()
                .map(|bloch| {
                    let truth = quad_form(&heis, &bloch_statevector(bloch));
                    learned.predict_bloch(bloch).map(|p| (p - truth).abs())
                })
                .collect::<Result<_>>()?;

            let wall = clock(opts, start);
            let ent_max = entangled_errs.iter().cloned().fold(0.0f64, f64::max);
            rows.push(ctx.row(l_prime, trial, "entangled_max_abs_error", ent_max, wall));
            rows.push(ctx.row(
                l_prime,
                trial,
                "entangled_median_abs_error",
                median(&mut entangled_errs),
                wall,
            ));
            rows.push(ctx.row(
                l_prime,
                trial,
                "product_median_abs_error",
                median(&mut product_errs),
                wall,
            ));
        }
    }
    Ok(RunOutput { rows, report: None })
}

// --- ZNE -----------------------------------------------------------------------

#[derive(Serialize)]
struct ZneTrialReport {
    trial: usize,
    scales: Vec<usize>,
    f_values: Vec<f64>,
    noiseless_truth: f64,
    exponential: Option<zne::ExpFit>,
    exponential_abs_error: Option<f64>,
    spline_extrapolated: Option<f64>,
    spline_abs_error: Option<f64>,
}

fn run_zne(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let spec = config.circuit.as_ref().expect("validated");
    let n = spec.register_size();
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeOverCap {
            n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    let obs = config.observable(n)?;
    let mut scales = config.zne.scales.clone();
    scales.sort_unstable();
    scales.dedup();

    // Noiseless truth at the base depth: pure statevector evolution.
    let base = spec.build(spec.theta_h, spec.layers, config.seed, 0)?;
    let noiseless = prepare_statevector(&base);
    let truth: f64 = obs
        .terms()
        .iter()
        .map(|(coeff, p)| coeff * statevector_pauli_expectation(n, &noiseless, p))
        .sum();

    let l_prime = config.learner.l_prime[0];
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for trial in 0..config.trials {
        let start = Instant::now();
        let mut f_values = Vec::with_capacity(scales.len());
        let mut depth_of_base = 0;
        for (si, &scale) in scales.iter().enumerate() {
            // noise accumulates with depth: scale r runs r-times the steps
            let circuit = spec.build(spec.theta_h, spec.layers * scale, config.seed, trial as u64)?;
            if scale == 1 {
                depth_of_base = circuit.depth();
            }
            let heis = adjoint_evolve_observable(&circuit, &config.noise, &obs)?;
            let dataset_master = derive_seed(
                config.seed,
                streams::DATASET,
                (trial * scales.len() + si) as u64,
            );
            let dataset = build_qpt_dataset(config, n, &heis, obs.coeff_l1(), dataset_master)?;
            let learned = estimate_process_coeffs(
                &dataset,
                n,
                l_prime,
                Some(obs.clone()),
                learner_meta(config, dataset_master, dataset.len()),
            )?;
            // the learned characterization evaluated on the fixed input |0^n>
            let bloch = vec![[0.0, 0.0, 1.0]; n];
            f_values.push(learned.predict_bloch(&bloch)?);
        }

        let xs: Vec<f64> = scales.iter().map(|&s| s as f64).collect();
        let ctx = RowContext {
            experiment: config.experiment.tag().into(),
            n,
            rows: spec.grid().0,
            cols: spec.grid().1,
            depth: depth_of_base,
            gamma: config.noise.representative_gamma(),
            noise_type: config.noise.kind_tag(),
            seed: config.seed,
        };
        let wall = clock(opts, start);
        for (&scale, &f) in scales.iter().zip(&f_values) {
            rows.push(ctx.row(l_prime, trial, &format!("f_scale_{scale}"), f, wall));
        }
        rows.push(ctx.row(l_prime, trial, "noiseless_truth", truth, wall));

        let exp_fit = zne::fit_exponential(&xs, &f_values);
        let spline = zne::natural_cubic_spline_eval(&xs, &f_values, 0.0);
        let mut report = ZneTrialReport {
            trial,
            scales: scales.clone(),
            f_values: f_values.clone(),
            noiseless_truth: truth,
            exponential: None,
            exponential_abs_error: None,
            spline_extrapolated: None,
            spline_abs_error: None,
        };
        match exp_fit {
            Ok(fit) => {
                let err = (fit.extrapolated - truth).abs();
                rows.push(ctx.row(l_prime, trial, "zne_exp_extrapolated", fit.extrapolated, wall));
                rows.push(ctx.row(l_prime, trial, "zne_exp_abs_error", err, wall));
                report.exponential = Some(fit);
                report.exponential_abs_error = Some(err);
            }
            Err(e) => {
                rows.push(ctx.row(l_prime, trial, "zne_exp_fit_failed", 1.0, wall));
                report.exponential_abs_error = None;
                let _ = e;
            }
        }
        match spline {
            Ok(v) => {
                let err = (v - truth).abs();
                rows.push(ctx.row(l_prime, trial, "zne_spline_extrapolated", v, wall));
                rows.push(ctx.row(l_prime, trial, "zne_spline_abs_error", err, wall));
                report.spline_extrapolated = Some(v);
                report.spline_abs_error = Some(err);
            }
            Err(_) => {
                rows.push(ctx.row(l_prime, trial, "zne_spline_fit_failed", 1.0, wall));
            }
        }
        reports.push(report);
    }
    Ok(RunOutput {
        rows,
        report: Some(serde_json::to_value(&reports)?),
    })
}

// --- moment checks / lower bound -------------------------------------------------

fn run_moment_checks(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    use crate::circuits::GateEnsemble;
    let start = Instant::now();
    let mut outcomes = vec![checks::stabilizer_moment_identity()];
    outcomes.extend(checks::two_design_moment(
        GateEnsemble::Clifford2,
        config.eval.moment_draws,
        config.seed,
    ));
    outcomes.extend(checks::two_design_moment(
        GateEnsemble::HaarSu4,
        config.eval.moment_draws,
        config.seed,
    ));
    outcomes.push(checks::path_orthogonality(
        (config.eval.moment_draws / 20).max(500),
        10,
        config.seed,
    )?);
    outcomes.push(checks::weight_gap(config.seed)?);
    outcomes.push(checks::negative_control());

    let wall = clock(opts, start);
    let ctx = RowContext {
        experiment: config.experiment.tag().into(),
        n: 2,
        rows: 0,
        cols: 0,
        depth: 0,
        gamma: 0.0,
        noise_type: "none".into(),
        seed: config.seed,
    };
    let mut rows = Vec::new();
    let mut all_passed = true;
    for outcome in &outcomes {
        all_passed &= outcome.passed;
        rows.push(ctx.row(0, 0, &outcome.name, outcome.value, wall));
        rows.push(ctx.row(
            0,
            0,
            &format!("{}_pass", outcome.name),
            if outcome.passed { 1.0 } else { 0.0 },
            wall,
        ));
    }
    let report = serde_json::json!({
        "all_passed": all_passed,
        "checks": outcomes
            .iter()
            .map(|o| serde_json::json!({"name": o.name, "value": o.value, "passed": o.passed}))
            .collect::<Vec<_>>(),
    });
    Ok(RunOutput {
        rows,
        report: Some(report),
    })
}

fn run_lower_bound(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let params = config.lower_bound.as_ref().expect("validated");
    let start = Instant::now();
    let m = lower_bound_samples(params.gamma, params.d, params.n, params.eta)?;
    let ctx = RowContext {
        experiment: config.experiment.tag().into(),
        n: params.n as usize,
        rows: 0,
        cols: 0,
        depth: params.d as usize,
        gamma: params.gamma,
        noise_type: "pauli".into(),
        seed: config.seed,
    };
    let rows = vec![ctx.row(0, 0, "lower_bound_samples", m, clock(opts, start))];
    let report = serde_json::json!({
        "gamma": params.gamma, "d": params.d, "n": params.n, "eta": params.eta,
        "lower_bound_samples": m,
    });
    Ok(RunOutput {
        rows,
        report: Some(report),
    })
}

// --- model training entry points (CLI `learn` / `predict`) -----------------------

/// Train a process model from a config (used by the CLI `learn` subcommand).
pub fn train_process_model(config: &ExperimentConfig) -> Result<LearnedProcess> {
    let spec = config
        .circuit
        .as_ref()
        .ok_or_else(|| Error::Config("learn needs a circuit".into()))?;
    let n = spec.register_size();
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeOverCap {
            n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    let obs = config.observable(n)?;
    let circuit = spec.build(spec.theta_h, spec.layers, config.seed, 0)?;
    let heis = adjoint_evolve_observable(&circuit, &config.noise, &obs)?;
    let dataset_master = derive_seed(config.seed, streams::DATASET, 0);
    let dataset = build_qpt_dataset(config, n, &heis, obs.coeff_l1(), dataset_master)?;
    estimate_process_coeffs(
        &dataset,
        n,
        config.learner.l_prime[0],
        Some(obs),
        learner_meta(config, dataset_master, dataset.len()),
    )
}

/// Train a state model from a config (used by the CLI `learn` subcommand).
pub fn train_state_model(config: &ExperimentConfig) -> Result<crate::learn::LearnedState> {
    let spec = config
        .circuit
        .as_ref()
        .ok_or_else(|| Error::Config("learn needs a circuit".into()))?;
    let n = spec.register_size();
    if n > DENSE_ORACLE_CAP {
        return Err(Error::SizeOverCap {
            n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    let circuit = spec.build(spec.theta_h, spec.layers, config.seed, 0)?;
    let rho = evolve_density(&circuit, &config.noise, &DensityMatrix::zero_state(n)?)?;
    let dataset_master = derive_seed(config.seed, streams::DATASET, 0);
    let dataset = build_qst_dataset(config, n, &rho, dataset_master)?;
    estimate_state_coeffs(
        &dataset,
        n,
        config.learner.l_prime[0],
        learner_meta(config, dataset_master, dataset.len()),
    )
}

/// Serialized size guard used by the compression claim: a learned state's
/// JSON for n=14, l'=2 stays small because only low-weight strings appear.
pub fn serialized_model_bytes(model: &crate::learn::LearnedState) -> Result<usize> {
    Ok(serde_json::to_vec(model)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qst_config(n_data: usize, trials: usize) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{
                "experiment": "qst_sweep",
                "circuit": {{"architecture": "tfim", "rows": 2, "cols": 2, "layers": 2}},
                "noise": {{"type": "depolarizing", "gamma": 0.05}},
                "learner": {{"l_prime": [1, 2], "n_data": {n_data}}},
                "trials": {trials},
                "seed": 11
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn qst_sweep_produces_expected_rows_and_is_deterministic() {
        let config = qst_config(400, 2);
        let opts = RunOptions {
            record_timing: false,
        };
        let a = run_experiment(&config, opts).unwrap();
        assert_eq!(a.rows.len(), 2 * 2); // trials x l'
        let b = run_experiment(&config, opts).unwrap();
        assert_eq!(rows_to_csv(&a.rows), rows_to_csv(&b.rows));
        // deterministic across thread counts
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| run_experiment(&config, opts)).unwrap();
        assert_eq!(rows_to_csv(&a.rows), rows_to_csv(&c.rows));
    }

    #[test]
    fn noiseless_shallow_qst_is_nearly_exact() {
        // gamma = 0, d = 1, l' = n, full 6^n enumeration: exact regime.
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "qst_sweep",
                "circuit": {"architecture": "brickwork", "n": 4, "layers": 1},
                "noise": {"type": "depolarizing", "gamma": 0.0},
                "learner": {"l_prime": [4], "n_data": 1, "complete_ensemble": true},
                "trials": 1,
                "seed": 3
            }"#,
        )
        .unwrap();
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(
            out.rows[0].value < 1e-6,
            "exact-regime reconstruction error {} too large",
            out.rows[0].value
        );
    }

    #[test]
    fn qst_trajectory_fallback_matches_dense_frobenius() {
        // Force the fallback at a size where the dense answer is available.
        let mut config = qst_config(500, 1);
        config.force_trajectory = true;
        config.learner.acquisition = Acquisition::Shots(256);
        config.eval.trajectories = 1500;
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        let traj_err = out
            .rows
            .iter()
            .find(|r| r.metric == "frobenius_error_traj" && r.l_prime == 2)
            .unwrap()
            .value;

        // dense reference: same dataset regime but exact scoring in Frobenius
        let spec = config.circuit.as_ref().unwrap();
        let circuit = spec.build(spec.theta_h, spec.layers, config.seed, 0).unwrap();
        let rho = evolve_density(
            &circuit,
            &config.noise,
            &DensityMatrix::zero_state(4).unwrap(),
        )
        .unwrap();
        let dataset_master = derive_seed(config.seed, streams::DATASET, 0);
        let sim = TrajectorySim::new(&circuit, &config.noise).unwrap();
        let input = zero_statevector(4);
        let dataset = trajectory_dataset(4, 500, dataset_master, |psi, rng| {
            Ok(sim.estimate_overlap(psi, &input, 256, rng)?.0)
        })
        .unwrap();
        let learned = estimate_state_coeffs(
            &dataset,
            4,
            2,
            LearnerMeta {
                n_data: 500,
                acquisition: "shots(256)".into(),
                seed: dataset_master,
            },
        )
        .unwrap();
        let mut frob_sq = 0.0;
        for p in enumerate_low_weight(4, 4).unwrap() {
            let exact = crate::oracle::exact_pauli_coeff(&rho, &p).unwrap();
            let approx = learned.coeffs.get(&p).copied().unwrap_or(0.0);
            frob_sq += (exact - approx).powi(2);
        }
        let dense_frob = frob_sq.sqrt();
        assert!(
            (traj_err - dense_frob).abs() < 0.1 + 0.5 * dense_frob,
            "trajectory Frobenius {traj_err} vs dense {dense_frob}"
        );
    }

    #[test]
    fn lower_bound_examples() {
        // gamma = 0: m = (1-eta)^2 / (2n)
        let m = lower_bound_samples(0.0, 5, 4, 0.5).unwrap();
        assert!((m - 0.25 / 8.0).abs() < 1e-15);

        // worked value: gamma=0.1, d=10, n=4, eta=0.5
        let m = lower_bound_samples(0.1, 10, 4, 0.5).unwrap();
        assert!((m - 0.14288).abs() < 5e-4, "m = {m}");

        // strictly increasing in d for gamma > 0
        let mut last = 0.0;
        for d in 1..10 {
            let m = lower_bound_samples(0.2, d, 4, 0.5).unwrap();
            assert!(m > last);
            last = m;
        }

        assert!(lower_bound_samples(1.0, 1, 1, 0.5).is_err());
        assert!(lower_bound_samples(0.1, 1, 1, 1.0).is_err());
    }

    #[test]
    fn moment_checks_all_pass() {
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "moment_checks",
                "eval": {"moment_draws": 20000},
                "seed": 5
            }"#,
        )
        .unwrap();
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        let report = out.report.unwrap();
        assert_eq!(report["all_passed"], serde_json::json!(true), "{report}");
    }

    #[test]
    fn zne_report_structure() {
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "zne",
                "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 1},
                "noise": {"type": "depolarizing", "gamma": 0.02},
                "learner": {"l_prime": [2], "n_data": 4000},
                "zne": {"scales": [1, 2, 3, 4, 5]},
                "trials": 1,
                "seed": 9
            }"#,
        )
        .unwrap();
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        assert!(out
            .rows
            .iter()
            .any(|r| r.metric == "zne_exp_abs_error"));
        assert!(out
            .rows
            .iter()
            .any(|r| r.metric == "zne_spline_abs_error"));
        let report = out.report.unwrap();
        assert!(report.as_array().unwrap().len() == 1);
    }

    #[test]
    fn zne_noiseless_extrapolation_is_exact() {
        // Depth scaling changes the dynamics in general, so the flat-data
        // case needs dynamics that fix the observable: theta_h = 0 leaves
        // Z_0 invariant at every depth. With gamma = 0 and exact ensemble
        // averaging every f_r equals the truth and the extrapolation is it.
        let config = ExperimentConfig::from_json(
            r#"{
                "experiment": "zne",
                "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 1, "theta_h": 0.0},
                "noise": {"type": "depolarizing", "gamma": 0.0},
                "learner": {"l_prime": [2], "n_data": 1, "complete_ensemble": true},
                "zne": {"scales": [1, 2, 3]},
                "trials": 1,
                "seed": 13
            }"#,
        )
        .unwrap();
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        let err = out
            .rows
            .iter()
            .find(|r| r.metric == "zne_exp_abs_error")
            .unwrap()
            .value;
        assert!(err < 1e-8, "noiseless ZNE error {err}");
    }

    #[test]
    fn entangled_qpt_zero_angles_reduce_to_product_case() {
        let mut config = ExperimentConfig::from_json(
            r#"{
                "experiment": "entangled_qpt",
                "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 2},
                "noise": {"type": "depolarizing", "gamma": 0.02},
                "learner": {"l_prime": [2], "n_data": 3000},
                "eval": {"entangled_inputs": 3, "product_inputs": 5},
                "trials": 1,
                "seed": 17
            }"#,
        )
        .unwrap();
        let out = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        assert!(out
            .rows
            .iter()
            .any(|r| r.metric.starts_with("entangled_abs_error_")));
        assert!(out
            .rows
            .iter()
            .any(|r| r.metric == "product_median_abs_error"));
        config.eval.entangled_inputs = 2;
        let again = run_experiment(&config, RunOptions { record_timing: false }).unwrap();
        assert!(again.rows.len() < out.rows.len());
    }

    #[test]
    fn csv_header_matches_contract() {
        assert_eq!(
            CSV_HEADER,
            "experiment,n,rows,cols,depth,l_prime,gamma,noise_type,trial,seed,metric,value,wall_ms"
        );
    }
}
