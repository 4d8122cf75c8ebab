//! Executable statistical checks behind the `checks` experiment: the
//! stabilizer second-moment identity, the 2-design 1/15 moment for both gate
//! ensembles, path orthogonality, the weight-gap law, and a negative control
//! that must fail.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;

use crate::circuits::{
    build_random_circuit, kron2, sample_haar_su4, sample_two_qubit_clifford, Architecture,
    GateEnsemble,
};
use crate::noise::pauli_mat2;
use crate::pauli::{stab_expectation, Axis, PauliString, StabilizerLabel, StabilizerProductState};
use crate::paths::{enumerate_legal_paths, path_coefficient};
use crate::rng::{derived_rng, streams};
use crate::Result;

pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

fn pauli16(i: usize) -> Matrix4<Complex64> {
    kron2(&pauli_mat2(i / 4), &pauli_mat2(i % 4))
}

fn squared_moment(u: &Matrix4<Complex64>, a: usize, b: usize) -> f64 {
    let t = (pauli16(a) * u * pauli16(b) * u.adjoint()).trace() / Complex64::new(4.0, 0.0);
    t.norm_sqr()
}

/// Exhaustive single-qubit second moment: `avg <P><Q> = delta_PQ / 3` over
/// the six stabilizer labels, exactly.
pub fn stabilizer_moment_identity() -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for p in Axis::ALL {
        for q in Axis::ALL {
            let mut sum = 0i64;
            for label in StabilizerLabel::ALL {
                let psi = StabilizerProductState::new(vec![label]);
                let ep = stab_expectation(&psi, &PauliString::single(1, 0, p).unwrap()).unwrap();
                let eq = stab_expectation(&psi, &PauliString::single(1, 0, q).unwrap()).unwrap();
                sum += (ep * eq) as i64;
            }
            let avg = sum as f64 / 6.0;
            let want = if p == q { 1.0 / 3.0 } else { 0.0 };
            worst = worst.max((avg - want).abs());
        }
    }
    // identity factors: <I><Q> averages to 0 for Q != I and 1 for Q = I
    for q in Axis::ALL {
        let mut sum = 0i64;
        for label in StabilizerLabel::ALL {
            let psi = StabilizerProductState::new(vec![label]);
            sum += stab_expectation(&psi, &PauliString::single(1, 0, q).unwrap()).unwrap() as i64;
        }
        worst = worst.max((sum as f64 / 6.0).abs());
    }
    CheckOutcome {
        name: "stabilizer_moment_identity_max_dev".into(),
        value: worst,
        passed: worst < 1e-12,
    }
}

/// Monte-Carlo 1/15 second moment for a gate ensemble (3-sigma band), with
/// the exact double-identity and mixed-identity cases along the way.
pub fn two_design_moment(
    ensemble: GateEnsemble,
    draws: usize,
    seed: u64,
) -> Vec<CheckOutcome> {
    let tag = match ensemble {
        GateEnsemble::HaarSu4 => "haar",
        GateEnsemble::Clifford2 => "clifford",
    };
    let mut rng = derived_rng(seed, streams::CHECKS, ensemble as u64);
    let (mut sum, mut sumsq) = (0.0, 0.0);
    let mut mixed_worst: f64 = 0.0;
    let mut double_identity_worst: f64 = 0.0;
    for k in 0..draws {
        let u = match ensemble {
            GateEnsemble::HaarSu4 => sample_haar_su4(&mut rng),
            GateEnsemble::Clifford2 => sample_two_qubit_clifford(&mut rng),
        };
        let m = squared_moment(&u, 4, 4); // X(x)I on both sides
        sum += m;
        sumsq += m * m;
        if k < 200 {
            mixed_worst = mixed_worst.max(squared_moment(&u, 0, 4));
            double_identity_worst =
                double_identity_worst.max((squared_moment(&u, 0, 0) - 1.0).abs());
        }
    }
    let mean = sum / draws as f64;
    let var = (sumsq / draws as f64 - mean * mean).max(0.0);
    let sigma = (var / draws as f64).sqrt();
    vec![
        CheckOutcome {
            name: format!("{tag}_second_moment_mean"),
            value: mean,
            passed: (mean - 1.0 / 15.0).abs() <= 3.0 * sigma + 1e-4,
        },
        CheckOutcome {
            name: format!("{tag}_mixed_identity_max"),
            value: mixed_worst,
            passed: mixed_worst < 1e-10,
        },
        CheckOutcome {
            name: format!("{tag}_double_identity_dev"),
            value: double_identity_worst,
            passed: double_identity_worst < 1e-10,
        },
    ]
}

/// Negative control: an identity-only "ensemble" is not a 2-design, so the
/// 1/15 check must fail on it; passing means the harness can detect bias.
pub fn negative_control() -> CheckOutcome {
    let u = Matrix4::<Complex64>::identity();
    let m = squared_moment(&u, 4, 4); // equals 1, far from 1/15
    let detects = (m - 1.0 / 15.0).abs() > 0.1;
    CheckOutcome {
        name: "negative_control_detects_non_design".into(),
        value: m,
        passed: detects,
    }
}

/// `E[Phi(C,s) Phi(C,s')] = 0` over random circuits for random pairs of
/// distinct legal paths (3-sigma).
pub fn path_orthogonality(circuits: usize, pairs: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = derived_rng(seed, streams::CHECKS, 101);
    let probe = build_random_circuit(4, 3, Architecture::Brickwork, GateEnsemble::HaarSu4, &mut rng)?;
    let legal = enumerate_legal_paths(&probe, probe.depth() + 2, 1_000_000)?;
    let live: Vec<_> = legal.into_iter().filter(|p| p.total_weight() > 0).collect();
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..pairs {
        let i = rng.random_range(0..live.len());
        let j = loop {
            let j = rng.random_range(0..live.len());
            if j != i {
                break j;
            }
        };
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..circuits {
            let circ = build_random_circuit(
                4,
                3,
                Architecture::Brickwork,
                GateEnsemble::HaarSu4,
                &mut rng,
            )?;
            let v = path_coefficient(&circ, &live[i])? * path_coefficient(&circ, &live[j])?;
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / circuits as f64;
        let var = (sumsq / circuits as f64 - mean * mean).max(0.0);
        let sigma = (var / circuits as f64).sqrt().max(1e-15);
        worst_ratio = worst_ratio.max(mean.abs() / sigma);
    }
    Ok(CheckOutcome {
        name: "path_orthogonality_max_mean_over_sigma".into(),
        value: worst_ratio,
        passed: worst_ratio <= 3.0,
    })
}

/// Structural weight gap: no legal path has total weight in (0, depth].
pub fn weight_gap(seed: u64) -> Result<CheckOutcome> {
    let mut rng = derived_rng(seed, streams::CHECKS, 102);
    let mut offenders = 0usize;
    for d in 1..=3 {
        let circ =
            build_random_circuit(3, d, Architecture::Brickwork, GateEnsemble::HaarSu4, &mut rng)?;
        let paths = enumerate_legal_paths(&circ, circ.depth(), 1_000_000)?;
        offenders += paths
            .iter()
            .filter(|p| {
                let w = p.total_weight();
                w > 0 && w <= circ.depth()
            })
            .count();
    }
    Ok(CheckOutcome {
        name: "weight_gap_offending_paths".into(),
        value: offenders as f64,
        passed: offenders == 0,
    })
}
