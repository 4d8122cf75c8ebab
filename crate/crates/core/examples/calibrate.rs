//! Reference-seed calibration runs for the acceptance thresholds.
//!
//! Runs the acceptance-suite workloads at their pinned settings and prints
//! the summary statistics that `tests/expectations.toml` freezes. Regenerate
//! with:
//!
//!     cargo run --release -p paulilearn --example calibrate
//!
//! and update the expectations file by hand if a deliberate change shifts
//! the reference numbers.

use paulilearn::experiments::{run_experiment, ExperimentConfig, RunOptions};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn metric_values(rows: &[paulilearn::experiments::ResultRow], metric: &str, l: usize) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.metric == metric && r.l_prime == l)
        .map(|r| r.value)
        .collect()
}

fn main() {
    let opts = RunOptions {
        record_timing: false,
    };

    // --- QST end-to-end: 2x3 TFIM, 10 Trotter steps, gamma = 0.02 ---
    let qst = ExperimentConfig::from_json(
        r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 3, "layers": 10},
            "noise": {"type": "depolarizing", "gamma": 0.02},
            "learner": {"l_prime": [1, 2, 3], "n_data": 50000},
            "trials": 10,
            "seed": 20240001
        }"#,
    )
    .unwrap();
    let t0 = std::time::Instant::now();
    let out = run_experiment(&qst, opts).unwrap();
    println!("# qst sweep ({}s)", t0.elapsed().as_secs());
    for l in [1usize, 2, 3] {
        let vals = metric_values(&out.rows, "trace_norm_error", l);
        println!(
            "qst l'={l}: median {:.6}  min {:.6}  max {:.6}",
            median(vals.clone()),
            vals.iter().cloned().fold(f64::INFINITY, f64::min),
            vals.iter().cloned().fold(0.0f64, f64::max),
        );
    }

    // --- QPT end-to-end: 2x3, 5 steps, gamma = 0.01, unital & mixture ---
    for noise in [
        r#"{"type": "depolarizing", "gamma": 0.01}"#,
        r#"{"type": "composed", "parts": [
            {"type": "depolarizing", "gamma": 0.01},
            {"type": "amplitude_damping", "gamma": 0.01}
        ]}"#,
    ] {
        let qpt = ExperimentConfig::from_json(&format!(
            r#"{{
                "experiment": "qpt_sweep",
                "circuit": {{"architecture": "tfim", "rows": 2, "cols": 3, "layers": 5}},
                "noise": {noise},
                "learner": {{"l_prime": [1, 2], "n_data": 50000}},
                "trials": 10,
                "seed": 20240002
            }}"#
        ))
        .unwrap();
        let t0 = std::time::Instant::now();
        let out = run_experiment(&qpt, opts).unwrap();
        println!("# qpt sweep {} ({}s)", qpt.noise.kind_tag(), t0.elapsed().as_secs());
        for l in [1usize, 2] {
            let vals = metric_values(&out.rows, "max_abs_error", l);
            println!(
                "qpt {} l'={l}: median-max {:.6}  worst {:.6}",
                qpt.noise.kind_tag(),
                median(vals.clone()),
                vals.iter().cloned().fold(0.0f64, f64::max),
            );
        }
    }

    // --- entangled-input QPT: 6 qubits, d=5, gamma=0.01, l'=2 ---
    let ent = ExperimentConfig::from_json(
        r#"{
            "experiment": "entangled_qpt",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 3, "layers": 5},
            "noise": {"type": "depolarizing", "gamma": 0.01},
            "learner": {"l_prime": [2], "n_data": 50000},
            "eval": {"entangled_inputs": 20, "product_inputs": 100, "prep_layers": 2},
            "trials": 10,
            "seed": 20240003
        }"#,
    )
    .unwrap();
    let t0 = std::time::Instant::now();
    let out = run_experiment(&ent, opts).unwrap();
    println!("# entangled qpt ({}s)", t0.elapsed().as_secs());
    let ent_med = metric_values(&out.rows, "entangled_median_abs_error", 2);
    let prod_med = metric_values(&out.rows, "product_median_abs_error", 2);
    let ratios: Vec<f64> = ent_med
        .iter()
        .zip(&prod_med)
        .map(|(e, p)| e / p.max(1e-12))
        .collect();
    println!(
        "entangled: median-of-medians {:.6}  product {:.6}  median ratio {:.4}  max ratio {:.4}",
        median(ent_med.clone()),
        median(prod_med.clone()),
        median(ratios.clone()),
        ratios.iter().cloned().fold(0.0f64, f64::max),
    );
    let ent_max = metric_values(&out.rows, "entangled_max_abs_error", 2);
    println!("entangled: median of max errors {:.6}", median(ent_max));

    // --- QST with complete-ensemble averaging (the exact-regime reading) ---
    let qst_exact = ExperimentConfig::from_json(
        r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 3, "layers": 10},
            "noise": {"type": "depolarizing", "gamma": 0.02},
            "learner": {"l_prime": [1, 2, 3], "n_data": 1, "complete_ensemble": true},
            "trials": 1,
            "seed": 20240001
        }"#,
    )
    .unwrap();
    let out = run_experiment(&qst_exact, opts).unwrap();
    println!("# qst complete-ensemble reference values");
    for l in [1usize, 2, 3] {
        let vals = metric_values(&out.rows, "trace_norm_error", l);
        println!("qst exact l'={l}: {:.10}", vals[0]);
    }

    // --- ZNE: 2x3 TFIM, 5 steps, gamma=0.01, scales 1..5, 10 seeds ---
    for (theta, l, n_data) in [("0.08", 1usize, 50_000usize), ("0.1", 1, 100_000), ("0.09", 1, 100_000)] {
        let mut exp_errs = Vec::new();
        let mut spline_wins = 0;
        let t0 = std::time::Instant::now();
        for seed in 0..10u64 {
            let zne = ExperimentConfig::from_json(&format!(
                r#"{{
                    "experiment": "zne",
                    "circuit": {{"architecture": "tfim", "rows": 2, "cols": 3, "layers": 5, "theta_h": {theta}}},
                    "noise": {{"type": "depolarizing", "gamma": 0.01}},
                    "learner": {{"l_prime": [{l}], "n_data": {n_data}}},
                    "zne": {{"scales": [1, 2, 3, 4, 5]}},
                    "trials": 1,
                    "seed": {}
                }}"#,
                20240100 + seed
            ))
            .unwrap();
            let out = run_experiment(&zne, opts).unwrap();
            let exp_err = metric_values(&out.rows, "zne_exp_abs_error", l)[0];
            let spline_err = metric_values(&out.rows, "zne_spline_abs_error", l)[0];
            println!("zne theta {theta} l'={l} N={n_data} seed {seed}: exp {exp_err:.6}  spline {spline_err:.6}");
            if spline_err <= exp_err {
                spline_wins += 1;
            }
            exp_errs.push(exp_err);
        }
        println!(
            "# zne theta {theta} l'={l} N={n_data} ({}s): median exp error {:.6}, spline wins {spline_wins}/10",
            t0.elapsed().as_secs(),
            median(exp_errs),
        );
    }
}
