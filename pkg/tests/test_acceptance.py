"""Acceptance criteria 1-9, one test each.

Every test records a one-line verdict; the lines are printed in the pytest
terminal summary (see conftest.py) and when this file is run as a script.
"""

import time

import numpy as np
import pytest

from nonholo.config import load_config
from nonholo.controllability import HamiltonianPair, kac_check
from nonholo.linalg import gate_fidelity, random_hermitian
from nonholo.rydberg import RydbergParams, bare_crossings, stark_diagram
from nonholo.synth import ControlProblem, build_identity_vector, find_identity_root, synthesize
from nonholo.synth.roots import RootOptions, default_timing_scale, single_shot
from nonholo.synth.sequence import durations_gradient, durations_unitary, sequence_unitary
from nonholo.units import AU_TIME_S, RYDBERG_LIFETIME_S, field_to_au, time_to_ns

RESULTS: dict[int, str] = {}


def record(number: int, ok: bool, text: str) -> None:
    RESULTS[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    print(RESULTS[number])
    assert ok, RESULTS[number]


def _pairs(count: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    return [HamiltonianPair(random_hermitian(n, rng), random_hermitian(n, rng)) for _ in range(count)]


@pytest.fixture(scope="module")
def roots():
    pairs = _pairs(20, 4, 2001)
    t0 = time.perf_counter()
    found = [find_identity_root(p, seed=k) for k, p in enumerate(pairs)]
    return pairs, found, time.perf_counter() - t0


def test_criterion_1_root_of_identity(roots):
    pairs, found, elapsed = roots
    worst = max(r.purity_achieved - 2 for r in found)
    restarts = max(r.restarts_used for r in found)
    ok = all(r.converged for r in found) and worst <= 1e-9 and restarts < 200 and elapsed <= 60
    record(1, ok, f"20/20 roots, max F_N - 2 = {worst:.2e}, max restarts {restarts}, {elapsed:.1f} s (limit 60 s)")


def test_criterion_2_single_shot_band():
    pairs = _pairs(50, 4, 2002)
    opts = RootOptions(timing_scale=1.0, tol_root=1e-6)
    hits = shots = 0
    for k, pair in enumerate(pairs):
        for r in range(4):
            _, f, _ = single_shot(pair, k, r, opts)
            hits += f - 2 <= 1e-6
            shots += 1
    frac = hits / shots
    record(2, 0.10 <= frac <= 0.60, f"single-shot success {hits}/{shots} = {frac:.3f} (band [0.10, 0.60])")


def test_criterion_3_identity_vector(roots):
    pairs, found, _ = roots
    fids = [gate_fidelity(sequence_unitary(build_identity_vector(r), p), np.eye(4)) for p, r in zip(pairs, found)]
    cfg = load_config()
    ryd = gate_fidelity(sequence_unitary(build_identity_vector(find_identity_root(cfg.pair, seed=0)), cfg.pair), np.eye(4))
    worst = min(fids + [ryd])
    record(3, worst >= 1 - 1e-8, f"min identity fidelity 1 - {1 - worst:.1e} over 20 random pairs and the Rydberg pair")


def test_criterion_4_gradient():
    pairs = _pairs(20, 4, 2004)
    rng = np.random.default_rng(2005)
    worst = 0.0
    for pair in pairs:
        scale = default_timing_scale(pair)
        tau = rng.uniform(0.2, 1.8, 16) * scale
        _, grads = durations_gradient(tau, pair)
        h = 1e-6 * scale
        for k in range(16):
            e = np.zeros(16)
            e[k] = h
            fd = (durations_unitary(tau + e, pair) - durations_unitary(tau - e, pair)) / (2 * h)
            worst = max(worst, np.linalg.norm(grads[k] - fd) / np.linalg.norm(grads[k]))
    record(4, worst <= 1e-6, f"max relative error {worst:.2e} on 20 length-16 sequences (limit 1e-6)")


@pytest.fixture(scope="module")
def cnot_run():
    cfg = load_config()
    t0 = time.perf_counter()
    res = synthesize(ControlProblem(cfg.pair, cfg.target, rng_seed=0))
    return res, time.perf_counter() - t0


def test_criterion_5_cnot(cnot_run):
    res, elapsed = cnot_run
    full = res.full_sequence
    ok = (
        res.achieved_fidelity >= 0.9999
        and res.n_star <= 32
        and min(full.durations) >= 0
        and len(res.elementary) == 16
        and len(full) == 16 * res.n_star
        and full.durations == res.elementary.durations * res.n_star
        and elapsed <= 600
    )
    record(5, ok, f"fidelity {res.achieved_fidelity:.12f}, n* = {res.n_star} (reference value 8), {len(full)} pulses, {elapsed:.1f} s (limit 600 s)")


def test_criterion_6_controllability():
    exceptions = positives = 0
    for n in (3, 4):
        for pair in _pairs(50, n, 2006 + n):
            rep = kac_check(pair)
            if rep.kac_offdiag_ok and rep.kac_spectrum_ok:
                positives += 1
                exceptions += rep.lie_rank != n * n
    commuting = kac_check(HamiltonianPair(np.diag([1.0, 2.0, 4.0]), np.diag([3.0, 5.0, 2.0])))
    fails_both = not (commuting.kac_offdiag_ok and commuting.kac_spectrum_ok) and commuting.lie_rank < 9
    record(6, exceptions == 0 and positives > 0 and fails_both,
           f"{positives}/100 Kac-positive, {exceptions} with lie_rank < N^2; commuting pair rank {commuting.lie_rank}")


def test_criterion_7_stark():
    p = RydbergParams(vdd=np.zeros((4, 4)))
    grid = np.linspace(78.0, 92.0, 1401)
    step = grid[1] - grid[0]
    cross = {j: e for i, j, e in bare_crossings(stark_diagram(p, grid)) if i == 0}
    dev = max(abs(cross[k] - e) for k, e in zip((1, 2, 3), p.resonances))
    conv = [f"{field_to_au(e):.2e}" for e in p.resonances]
    ok = dev <= step and conv == ["1.73e-08", "1.64e-08", "1.57e-08"]
    record(7, ok, f"crossings at {[round(cross[k], 4) for k in (1, 2, 3)]} V/cm (max deviation {dev:.1e}, grid {step:.2f}); a.u. {conv}")


def test_criterion_8_duration(cnot_run):
    res, _ = cnot_run
    total_s = res.full_sequence.total_duration() * AU_TIME_S
    record(8, total_s < RYDBERG_LIFETIME_S,
           f"total duration {time_to_ns(res.full_sequence.total_duration()):.1f} ns = {total_s / RYDBERG_LIFETIME_S:.2%} of 10 us "
           f"(order-of-magnitude reference 8 x 6.77 ns = 54 ns)")


def test_criterion_9_determinism(tmp_path):
    from nonholo.cli import main

    a, b = tmp_path / "a", tmp_path / "b"
    rc = [main(["synthesize", "--out", str(d), "--seed", "0"]) for d in (a, b)]
    same = (a / "sequence.txt").read_bytes() == (b / "sequence.txt").read_bytes()
    record(9, rc == [0, 0] and same, f"two synthesize runs, exit codes {rc}, sequence files byte-identical: {same}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
