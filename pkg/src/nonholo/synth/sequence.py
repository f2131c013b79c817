"""Pulse sequences, their propagators and timing gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nonholo.controllability import HamiltonianPair


@dataclass(frozen=True)
class PulseSequence:
    """Alternating A/B pulses; the first pulse (label ``A``) acts first.

    Durations are in atomic units of time and must be non-negative.
    """

    durations: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(x) for x in np.asarray(self.durations, dtype=float).reshape(-1))
        for k, x in enumerate(d):
            if not np.isfinite(x) or x < 0:
                raise ValueError(f"pulse {k} has invalid duration {x!r}; durations must be finite and >= 0")
        object.__setattr__(self, "durations", d)

    @classmethod
    def from_labeled(cls, pulses) -> "PulseSequence":
        """Build from ``(label, duration)`` pairs, checking strict A, B, A, ... alternation."""
        durations = []
        for k, (label, t) in enumerate(pulses):
            expected = "A" if k % 2 == 0 else "B"
            if label != expected:
                raise ValueError(f"pulse {k} has label {label!r}, expected {expected!r}")
            durations.append(t)
        return cls(tuple(durations))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple("A" if k % 2 == 0 else "B" for k in range(len(self.durations)))

    @property
    def pulses(self) -> list[tuple[str, float]]:
        return list(zip(self.labels, self.durations))

    def as_array(self) -> np.ndarray:
        return np.array(self.durations, dtype=float)

    def total_duration(self) -> float:
        return float(sum(self.durations))

    def repeated(self, n: int) -> "PulseSequence":
        if len(self.durations) % 2:
            raise ValueError("only even-length sequences can be repeated without breaking alternation")
        return PulseSequence(self.durations * int(n))

    def __len__(self):
        return len(self.durations)


def _propagators(durations, pair: HamiltonianPair) -> list[np.ndarray]:
    return [pair.propagator("A" if k % 2 == 0 else "B", t) for k, t in enumerate(durations)]


def sequence_unitary(seq: PulseSequence, pair: HamiltonianPair) -> np.ndarray:
    """Ordered product ``... exp(-i H_b tau_2) exp(-i H_a tau_1)``."""
    u = np.eye(pair.dim, dtype=complex)
    for p in _propagators(seq.durations, pair):
        u = p @ u
    return u


def durations_unitary(durations, pair: HamiltonianPair) -> np.ndarray:
    """Same as :func:`sequence_unitary` on a raw duration vector (no sign checks)."""
    u = np.eye(pair.dim, dtype=complex)
    for p in _propagators(durations, pair):
        u = p @ u
    return u


def durations_gradient(durations, pair: HamiltonianPair) -> tuple[np.ndarray, np.ndarray]:
    """Unitary and stacked ``dU/dtau_k`` for a raw duration vector.

    Uses prefix and suffix products so each pulse is exponentiated once.
    """
    props = _propagators(durations, pair)
    m = len(props)
    n = pair.dim
    eye = np.eye(n, dtype=complex)
    prefix = [eye]
    for p in props:
        prefix.append(p @ prefix[-1])
    suffix = [eye] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] @ props[k]
    grads = np.empty((m, n, n), dtype=complex)
    for k in range(m):
        h = pair.h_a if k % 2 == 0 else pair.h_b
        # suffix[k+1] = pulses after k, prefix[k] = pulses before k
        grads[k] = suffix[k + 1] @ (-1j * h) @ props[k] @ prefix[k]
    return prefix[m], grads


def sequence_gradient(seq: PulseSequence, pair: HamiltonianPair) -> list[np.ndarray]:
    """Derivatives ``dU/dtau_k`` for every pulse of ``seq``."""
    _, grads = durations_gradient(seq.durations, pair)
    return list(grads)
