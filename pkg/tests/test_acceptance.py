"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The verdict lines are printed in the "acceptance criteria" section of the
pytest terminal summary.
"""

import time

import numpy as np
import pytest

from ccrkit.cli import main
from ccrkit.correlations import OptimizerConfig, entanglement_of_formation, wootters_eof
from ccrkit.dynamics import measurement_model, pointer_basis_detect, rate_check
from ccrkit.qstate import (
    bell_state,
    maximally_mixed,
    partial_trace,
    plus_state,
    purify_quantum_classical,
    quantum_classical_state,
    random_basis,
    random_mixed,
    random_probabilities,
    random_pure,
    tensor,
)
from ccrkit.relations import (
    ccr_conditional,
    ccr_koashi,
    ccr_mutual_info,
    ccr_pure,
    ccr_quantum_classical,
    ccr_reality,
    ccr_tessier,
    trial_seed,
)
from ccrkit.measures import von_neumann_entropy

pytestmark = pytest.mark.acceptance


def rng_for(seed, index):
    return np.random.default_rng(trial_seed(seed, index))


def test_criterion_01_pure_state_ccr(record_criterion):
    start = time.perf_counter()
    worst = {}
    for dims in [(2, 2), (2, 3), (3, 3), (4, 4)]:
        rng = np.random.default_rng(101)
        worst[dims] = max(ccr_pure(random_pure(dims, rng)).residual for _ in range(1000))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-10 and elapsed < 10
    detail = f"4x1000 Haar states, max residual {max(worst.values()):.2e} (tol 1e-10), {elapsed:.1f} s (< 10 s)"
    assert record_criterion(1, ok, detail)


def test_criterion_02_reality_identity(record_criterion):
    rng = np.random.default_rng(202)
    res, c_vs_i = 0.0, 0.0
    for d in (2, 3, 4, 5):
        for _ in range(1000):
            rho = random_mixed(d, int(rng.integers(1, d + 1)), rng)
            rep = ccr_reality(rho, random_basis(d, rng))
            res = max(res, rep.residual, rep.checks["reality_split"])
            c_vs_i = max(c_vs_i, rep.checks["irreality_equals_coherence"])
    ok = res <= 1e-10 and c_vs_i <= 1e-12
    detail = f"4000 qudits d=2..5, max residual {res:.2e} (tol 1e-10), |C_re - irreality| {c_vs_i:.2e} (tol 1e-12)"
    assert record_criterion(2, ok, detail)


def test_criterion_03_koashi_winter(record_criterion):
    cfg = OptimizerConfig(restarts=20)
    start = time.perf_counter()
    reports = [ccr_koashi(random_pure((2, 2, 2), rng_for(303, i)), cfg) for i in range(100)]
    elapsed = time.perf_counter() - start
    kw = np.array([r.checks["koashi_winter"] for r in reports])
    residual = np.array([r.residual for r in reports])
    modes = {r.info["j_mode"] for r in reports}
    failing = np.flatnonzero(residual > 1e-3)
    shrinks = True
    for i in failing:
        povm = ccr_koashi(random_pure((2, 2, 2), rng_for(303, i)), cfg, mode="povm")
        shrinks &= povm.residual < residual[i] and povm.info["j_mode"] == "povm"
    ok = (
        np.sum(residual <= 1e-3) >= 99
        and np.median(residual) <= 1e-5
        and elapsed < 300
        and shrinks
        and modes == {"projective"}
        and all(r.info["ef_method"] == "wootters" for r in reports)
    )
    detail = (
        f"{np.sum(residual <= 1e-3)}/100 within 1e-3, median {np.median(residual):.2e} (<= 1e-5), "
        f"max {residual.max():.2e}, KW identity max {kw.max():.2e}, mode {sorted(modes)}, "
        f"{len(failing)} needing POVM, {elapsed:.0f} s (< 300 s)"
    )
    assert record_criterion(3, ok, detail)


def test_criterion_04_variational_eof(record_criterion):
    cfg = OptimizerConfig()
    diffs = []
    for i in range(200):
        rng = rng_for(404, i)
        rho = random_mixed((2, 2), int(rng.integers(1, 5)), rng)
        diffs.append(abs(entanglement_of_formation(rho, cfg=cfg).value - wootters_eof(rho)))
    diffs = np.array(diffs)
    frac = np.mean(diffs <= 2e-3)
    ok = frac >= 0.95
    detail = f"200 two-qubit states ranks 1-4, {frac:.1%} within 2e-3 (>= 95%), max gap {diffs.max():.2e}"
    assert record_criterion(4, ok, detail)


def test_criterion_05_tessier(record_criterion):
    rng = np.random.default_rng(505)
    res = max(ccr_tessier(random_mixed((2, 2), int(rng.integers(1, 5)), rng)).residual for _ in range(1000))
    bell = np.array(list(ccr_tessier(bell_state()).terms.values()))
    mm = np.array(list(ccr_tessier(maximally_mixed((2, 2))).terms.values()))
    bell_err = np.max(np.abs(bell - [1, 0, 0, 0]))
    mm_err = np.max(np.abs(mm - [0.25, 0.75, 0, 0]))
    ok = res <= 1e-12 and bell_err <= 1e-12 and mm_err <= 1e-12
    detail = f"1000 states, max residual {res:.2e} (tol 1e-12), Bell terms err {bell_err:.1e}, I/4 terms err {mm_err:.1e}"
    assert record_criterion(5, ok, detail)


def test_criterion_06_quantum_classical(record_criterion):
    worst, trip = 0.0, 0.0
    n = 0
    for d_a in (2, 3):
        for d_b in (2, 3):
            rng = np.random.default_rng(600 + 10 * d_a + d_b)
            for _ in range(200):
                w = random_probabilities(d_b, rng)
                conds = [random_mixed(d_a, int(rng.integers(1, d_a + 1)), rng) for _ in range(d_b)]
                reports = ccr_quantum_classical(w, conds)
                worst = max(worst, max(r.max_residual for r in reports))
                psi = purify_quantum_classical(w, conds)
                rho = quantum_classical_state(w, conds)
                trip = max(trip, np.max(np.abs(partial_trace(psi, (0, 1)).mat - rho.mat)))
                n += 1
    ok = worst <= 1e-10 and trip <= 1e-9
    detail = f"{n} states dA,dB in {{2,3}}, max residual (global+members) {worst:.2e} (tol 1e-10), Tr_E round trip {trip:.2e} (tol 1e-9)"
    assert record_criterion(6, ok, detail)


def test_criterion_07_informational_ccrs(record_criterion):
    worst = 0.0
    n = 0
    for d_a in (2, 3, 4):
        for d_b in (2, 3, 4):
            rng = np.random.default_rng(700 + 10 * d_a + d_b)
            for _ in range(1000):
                d = d_a * d_b
                rho = random_mixed((d_a, d_b), int(rng.integers(1, d + 1)), rng)
                worst = max(worst, ccr_mutual_info(rho).max_residual, ccr_conditional(rho).max_residual)
                n += 1
    rho_a = random_mixed(2, seed=7)
    examples = {
        "Bell": (ccr_conditional(bell_state()).terms["S_{A|B}"], -1.0),
        "product": (ccr_conditional(tensor(rho_a, random_mixed(3, seed=8))).terms["S_{A|B}"], von_neumann_entropy(rho_a)),
        "I/4": (ccr_conditional(maximally_mixed((2, 2))).terms["S_{A|B}"], 1.0),
    }
    ex_err = max(abs(a - b) for a, b in examples.values())
    ok = worst <= 1e-10 and ex_err <= 1e-12
    detail = f"{n} states up to 4x4, max residual {worst:.2e} (tol 1e-10), worked examples err {ex_err:.1e} (tol 1e-12)"
    assert record_criterion(7, ok, detail)


def test_criterion_08_dephasing_rate_law(record_criterion):
    h = 1e-3
    coarse = rate_check(plus_state(), 1.0, 0.1 + h * np.arange(round(1.9 / h) + 1))
    fine = rate_check(plus_state(), 1.0, 0.1 + (h / 2) * np.arange(round(1.9 / (h / 2)) + 1))
    # compare truncation errors at the shared interior times
    t_c, t_f = coarse.interior_times, fine.interior_times
    err_c = np.abs(coarse.coherence_rate - coarse.entanglement_rate_exact)
    err_f = np.abs(fine.coherence_rate - fine.entanglement_rate_exact)
    idx = np.searchsorted(t_f, t_c)
    shared = np.abs(t_f[np.clip(idx, 0, t_f.size - 1)] - t_c) < 1e-12
    ratio = err_c[shared].max() / err_f[idx[shared]].max()
    p_flat = np.ptp(coarse.trajectory["P_vn"])
    ok = coarse.max_rate_mismatch <= 1e-5 and 3 <= ratio <= 5 and p_flat <= 1e-12
    detail = (
        f"h=1e-3 on [0.1, 2]: max |-dC/dt - dE_f/dt| {coarse.max_rate_mismatch:.2e} (tol 1e-5), "
        f"FD error vs exact rate {coarse.truncation_error:.2e}, halving-h ratio {ratio:.2f} (in [3, 5]), "
        f"P_vn spread {p_flat:.1e}"
    )
    assert record_criterion(8, ok, detail)


def test_criterion_09_pointer_basis(record_criterion):
    times = np.linspace(0, 10, 201)
    traj = measurement_model(plus_state(), 1.0, times)
    when = pointer_basis_detect(traj, window=10, epsilon=1e-3)
    gap = np.min(traj["I_AA"] - traj["J_AA"])
    ccr = np.max(traj["ccr_residual"])
    ok = when is not None and gap >= -1e-9 and ccr <= 1e-10
    detail = f"detection time {when:.4g}, " if when is not None else "detection time none, "
    detail += f"min(I_A|M - J_A|M) {gap:.2e} (>= -1e-9), max ccr residual {ccr:.2e} (tol 1e-10)"
    assert record_criterion(9, ok, detail)


def test_criterion_10_cli_determinism(record_criterion, tmp_path):
    state = tmp_path / "bell.json"
    state.write_text('{"dims": [2, 2], "vector": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}')
    runs = {
        "verify": ["verify", "--relation", "ccr-mutual-info", "--dims", "3x3", "--trials", "50", "--seed", "11"],
        "koashi": ["koashi", "--trials", "5", "--restarts", "4", "--seed", "11"],
        "decohere": ["decohere", "--input", "plus", "--steps", "40", "--tmax", "4", "--seed", "11"],
        "quantifiers": ["quantifiers", str(state), "--seed", "11"],
    }
    mismatched = []
    for name, argv in runs.items():
        for fmt in ("csv", "json"):
            outputs = []
            for rep in range(2):
                out = tmp_path / f"{name}-{rep}.{fmt}"
                assert main(argv + ["--format", fmt, "--out", str(out)]) == 0
                files = [out] + ([tmp_path / f"{out.name}.json"] if fmt == "csv" else [])
                outputs.append([f.read_bytes() for f in files])
            if outputs[0] != outputs[1]:
                mismatched.append(f"{name}/{fmt}")
    ok = not mismatched
    detail = f"{len(runs) * 2} command/format pairs rerun, mismatches: {mismatched or 'none'}"
    assert record_criterion(10, ok, detail)
