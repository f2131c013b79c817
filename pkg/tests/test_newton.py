import numpy as np
import pytest

from nonholo.controllability import HamiltonianPair
from nonholo.linalg import expm_hermitian, gate_fidelity, random_hermitian
from nonholo.synth.newton import (
    NegativeTimingTrap,
    NewtonTrace,
    NonConvergence,
    align_phase,
    damped_update,
    newton_refine,
    newton_step,
    residual_generator,
)
from nonholo.synth.roots import build_identity_vector, find_identity_root
from nonholo.synth.sequence import sequence_unitary


def _setup(seed):
    rng = np.random.default_rng(seed)
    pair = HamiltonianPair(random_hermitian(4, rng), random_hermitian(4, rng))
    start = build_identity_vector(find_identity_root(pair, seed=0))
    gen = random_hermitian(4, rng)
    return pair, start, gen / np.linalg.norm(gen, 2)


def test_identity_target_returns_start():
    pair, start, _ = _setup(1000)
    trace = NewtonTrace()
    out = newton_refine(start, np.eye(4), pair, trace=trace)
    assert out == start
    assert trace.iterations == 0 and trace.status == "converged"


def test_small_perturbation_converges():
    # a few identity vectors have an ill-conditioned Jacobian; most converge
    converged = 0
    for seed in range(1000, 1010):
        pair, start, gen = _setup(seed)
        target = expm_hermitian(gen, 0.01)
        try:
            out = newton_refine(start, target, pair)
        except NonConvergence:
            continue
        converged += 1
        assert min(out.durations) >= 0
        assert gate_fidelity(sequence_unitary(out, pair), target) >= 1 - 1e-8
    assert converged >= 8


def test_large_perturbation_fails():
    failures = 0
    for seed in range(1000, 1005):
        pair, start, gen = _setup(seed)
        try:
            newton_refine(start, expm_hermitian(gen, 3.0), pair)
        except NonConvergence:
            failures += 1
    assert failures >= 3


def test_residual_generator_is_skew_and_phase_blind(random_pair, rng):
    u = expm_hermitian(random_pair.h_a, 0.3)
    w = expm_hermitian(random_pair.h_b, 0.2)
    lg = residual_generator(u, w)
    assert np.allclose(lg, -lg.conj().T, atol=1e-12)
    assert np.allclose(residual_generator(u, np.exp(1.1j) * w), lg, atol=1e-12)
    aligned = align_phase(u, w)
    assert abs(np.angle(np.vdot(u, aligned))) < 1e-12


def test_negative_timing_trap(random_pair):
    tau = np.zeros(4)
    with pytest.raises(NegativeTimingTrap):
        damped_update(tau, -np.ones(4), 1.0, np.eye(4), random_pair, max_halvings=5)


def test_no_descent_raises(random_pair):
    tau = np.ones(4)
    with pytest.raises(NonConvergence):
        damped_update(tau, np.zeros(4), 0.0, np.eye(4), random_pair, max_halvings=3)


def test_step_is_least_squares_solution():
    pair, start, gen = _setup(1001)
    tau = start.as_array()
    target = expm_hermitian(gen, 0.01)
    dtau, u, res = newton_step(tau, target, pair)
    assert res == pytest.approx(np.linalg.norm(residual_generator(u, target)))
    assert dtau.shape == tau.shape


def test_rejects_negative_start(random_pair):
    from nonholo.synth.newton import refine_durations

    with pytest.raises(ValueError):
        refine_durations(np.array([1.0, -1.0]), np.eye(4), random_pair)
