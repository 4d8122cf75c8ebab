#!/usr/bin/env python3
"""Smoke test for the paulilearn_py extension module.

Builds the cdylib with cargo (release), loads it, and exercises the main
types and operations end to end. Run from the repository root:

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "paulilearn-py"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "release" / "libpaulilearn_py.so"
    if not built.exists():  # e.g. macOS
        built = REPO / "target" / "release" / "libpaulilearn_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="paulilearn_py_"))
    shutil.copy(built, stage / "paulilearn_py.so")
    sys.path.insert(0, str(stage))
    import paulilearn_py

    return paulilearn_py


def main():
    pl = build_and_import()

    # Pauli strings and stabilizer states
    p = pl.PauliString("IZXI")
    assert p.weight() == 2 and p.n == 4
    assert str(pl.PauliString.identity(3)) == "III"
    psi = pl.StabilizerProductState("Z-Y-")
    zy = pl.PauliString("ZY")
    assert pl.stab_expectation(psi, zy) == 1  # (-1) * (-1)

    # low-weight enumeration count: sum_k C(n,k) 3^k
    strings = pl.enumerate_low_weight(10, 2)
    assert len(strings) == 1 + 30 + 405

    # noise channels and the non-unital factorization
    damping = pl.NoiseChannel.amplitude_damping(0.1)
    t = damping.transfer_matrix()
    assert abs(t[3][0] - 0.1) < 1e-12 and abs(t[3][3] - 0.9) < 1e-12
    gamma_eff, e_prime = damping.decompose_non_unital()
    assert 0.0 < gamma_eff < 1.0
    assert abs(e_prime[0][0] - 1.0) < 1e-12  # adjoint unitality

    dep = pl.NoiseChannel("{\"type\": \"depolarizing\", \"gamma\": 0.02}")
    assert abs(dep.effective_depolarizing_rate() - 0.02) < 1e-12

    # circuits: TFIM layer bookkeeping and JSON round trip
    circ = pl.Circuit.tfim(2, 3, 4, math.pi / 4)
    assert circ.n == 6 and circ.trotter_steps() == 4
    replay = pl.Circuit.from_json(circ.to_json())
    assert replay.depth() == circ.depth()

    # dense oracle vs. the Pauli-path reconstruction at full weight
    small = pl.Circuit.random(2, 2, "brickwork", "haar", seed=7)
    rho = pl.DensityMatrix.zero_state(2).evolve(small, pl.NoiseChannel.depolarizing(0.1))
    coeffs = pl.truncated_state_coeffs(small, 0.1, 2 * (small.depth() + 1))
    for compact, value in coeffs.items():
        exact = rho.pauli_coeff(pl.PauliString(compact))
        assert abs(exact - value) < 1e-8, (compact, exact, value)

    # adjoint path reconstruction under non-unital noise
    adj = pl.truncated_adjoint_coeffs(small, pl.NoiseChannel.mixture(0.02, 0.05),
                                      [(1.0, "ZI")], 2 * (small.depth() + 1))
    assert abs(sum(adj.values())) < 10.0 and len(adj) > 0

    # process learning end to end from a config
    config = {
        "experiment": "qpt_sweep",
        "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 2},
        "noise": {"type": "depolarizing", "gamma": 0.02},
        "learner": {"l_prime": [2], "n_data": 1, "complete_ensemble": True},
        "seed": 5,
    }
    model = pl.learn_process(json.dumps(config))
    assert model.n == 4 and model.l_prime == 2
    v = model.predict_stab(pl.StabilizerProductState("Z+Z+Z+Z+"))
    assert abs(v) <= 1.0 + 1e-9
    roundtrip = pl.LearnedProcess.from_json(model.to_json())
    assert roundtrip.predict_bloch([[0, 0, 1]] * 4) == model.predict_bloch([[0, 0, 1]] * 4)

    # a full experiment run returns plot-ready CSV
    sweep = dict(config)
    sweep["learner"] = {"l_prime": [1, 2], "n_data": 500}
    sweep["trials"] = 1
    csv, _report = pl.run_experiment(json.dumps(sweep))
    lines = csv.strip().splitlines()
    assert lines[0].startswith("experiment,n,rows,cols,depth,l_prime,gamma")
    assert len(lines) == 1 + 2 * 2  # header + l' x metrics

    # closed-form lower bound
    m = pl.lower_bound_samples(0.1, 10, 4, 0.5)
    assert abs(m - 0.14288) < 5e-4

    print("smoke test passed")


if __name__ == "__main__":
    main()
