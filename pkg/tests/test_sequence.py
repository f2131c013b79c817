import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonholo.controllability import HamiltonianPair
from nonholo.linalg import expm_hermitian, random_hermitian
from nonholo.synth.sequence import PulseSequence, durations_gradient, sequence_gradient, sequence_unitary


def test_sequence_validation():
    with pytest.raises(ValueError):
        PulseSequence((1.0, -0.1))
    with pytest.raises(ValueError):
        PulseSequence((np.nan,))
    with pytest.raises(ValueError):
        PulseSequence.from_labeled([("A", 1.0), ("A", 2.0)])
    seq = PulseSequence.from_labeled([("A", 1.0), ("B", 2.0), ("A", 0.0)])
    assert seq.labels == ("A", "B", "A")
    assert seq.total_duration() == 3.0


def test_repeated_is_exact_concatenation():
    seq = PulseSequence((0.1, 0.2, 0.3, 0.4))
    rep = seq.repeated(3)
    assert rep.durations == seq.durations * 3
    with pytest.raises(ValueError):
        PulseSequence((0.1, 0.2, 0.3)).repeated(2)


def test_zero_durations_give_identity(random_pair):
    assert np.allclose(sequence_unitary(PulseSequence((0.0,) * 16), random_pair), np.eye(4))


def test_single_pulse(random_pair):
    assert np.allclose(sequence_unitary(PulseSequence((0.7,)), random_pair), expm_hermitian(random_pair.h_a, 0.7))


def test_first_pulse_acts_first(random_pair):
    u = sequence_unitary(PulseSequence((0.3, 0.5)), random_pair)
    expected = expm_hermitian(random_pair.h_b, 0.5) @ expm_hermitian(random_pair.h_a, 0.3)
    assert np.allclose(u, expected)


def test_gradient_trivial_cases(random_pair):
    g = sequence_gradient(PulseSequence((0.0,) * 4), random_pair)
    assert np.allclose(g[0], -1j * random_pair.h_a)
    assert np.allclose(g[1], -1j * random_pair.h_b)
    t = 0.9
    g = sequence_gradient(PulseSequence((t,)), random_pair)
    assert np.allclose(g[0], -1j * random_pair.h_a @ expm_hermitian(random_pair.h_a, t))


def _fd_relative_error(tau, pair, step):
    _, grads = durations_gradient(tau, pair)
    worst = 0.0
    for k in range(len(tau)):
        e = np.zeros_like(tau)
        e[k] = step
        from nonholo.synth.sequence import durations_unitary

        fd = (durations_unitary(tau + e, pair) - durations_unitary(tau - e, pair)) / (2 * step)
        worst = max(worst, np.linalg.norm(grads[k] - fd) / np.linalg.norm(grads[k]))
    return worst


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    pair = HamiltonianPair(random_hermitian(4, rng), random_hermitian(4, rng))
    tau = rng.uniform(0.0, 2.0, 16)
    assert _fd_relative_error(tau, pair, 1e-6) <= 1e-6
