"""Controllability of a pair of alternately applied Hamiltonians.

Two routes are offered: the brute-force dimension of the Lie algebra
generated by ``{i H_a, i H_b}`` and Kac's sufficient conditions (dense
cross-basis representation plus a non-degenerate spectrum of levels and
level gaps).

A pair is reported fully controllable when the generated algebra contains
su(N), i.e. every unitary is reachable up to a global phase. The full rank
N^2 additionally needs a generator with non-zero trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from nonholo.linalg import eigh_hermitian, hermitian

LIE_RESIDUAL_TOL = 1e-8
MAX_LIE_DIM = 12


@dataclass(frozen=True)
class HamiltonianPair:
    """The two generators ``h_a`` and ``h_b`` (atomic units) control alternates between."""

    h_a: np.ndarray
    h_b: np.ndarray

    def __post_init__(self):
        a = hermitian(self.h_a)
        b = hermitian(self.h_b)
        if a.shape != b.shape:
            raise ValueError(f"generator dimensions differ: {a.shape} vs {b.shape}")
        object.__setattr__(self, "h_a", a)
        object.__setattr__(self, "h_b", b)

    @property
    def dim(self) -> int:
        return self.h_a.shape[0]

    def swapped(self) -> "HamiltonianPair":
        return HamiltonianPair(self.h_b, self.h_a)

    def generator(self, label: str) -> np.ndarray:
        if label == "A":
            return self.h_a
        if label == "B":
            return self.h_b
        raise ValueError(f"unknown generator label {label!r}")

    @cached_property
    def eig(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Cached eigen-decompositions, keyed by label."""
        return {"A": eigh_hermitian(self.h_a), "B": eigh_hermitian(self.h_b)}

    def propagator(self, label: str, t: float) -> np.ndarray:
        """``exp(-i H_label t)`` from the cached decomposition."""
        w, v = self.eig[label]
        return (v * np.exp(-1j * w * t)) @ v.conj().T

    def __eq__(self, other):
        if not isinstance(other, HamiltonianPair):
            return NotImplemented
        return np.array_equal(self.h_a, other.h_a) and np.array_equal(self.h_b, other.h_b)

    __hash__ = None


@dataclass
class ControllabilityReport:
    lie_rank: int
    fully_controllable: bool
    kac_offdiag_ok: bool
    kac_spectrum_ok: bool
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lie_rank": self.lie_rank,
            "fully_controllable": self.fully_controllable,
            "kac_offdiag_ok": self.kac_offdiag_ok,
            "kac_spectrum_ok": self.kac_spectrum_ok,
            "details": self.details,
        }


def _as_real_vector(x: np.ndarray) -> np.ndarray:
    # Re tr(X^H Y) equals the Euclidean dot of these vectors
    flat = x.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def lie_closure_rank(pair: HamiltonianPair) -> int:
    """Real dimension of the Lie algebra generated by ``i h_a`` and ``i h_b``."""
    return len(lie_closure_basis(pair))


def su_rank(pair: HamiltonianPair) -> int:
    """Dimension of the traceless part of the generated algebra (``N^2 - 1`` iff it contains su(N))."""
    return _traceless_rank(lie_closure_basis(pair), pair.dim)


def _traceless_rank(basis: list[np.ndarray], n: int) -> int:
    rows = [_as_real_vector(x - np.trace(x) * np.eye(n) / n) for x in basis]
    return int(np.linalg.matrix_rank(np.array(rows), tol=LIE_RESIDUAL_TOL))


def lie_closure_basis(pair: HamiltonianPair) -> list[np.ndarray]:
    """Orthonormal (real Frobenius inner product) basis of the generated Lie algebra."""
    n = pair.dim
    if n > MAX_LIE_DIM:
        raise ValueError(f"Lie closure is limited to N <= {MAX_LIE_DIM} (got N = {n})")
    full = n * n
    gens = []
    for h in (pair.h_a, pair.h_b):
        g = 1j * np.asarray(h)
        nrm = np.linalg.norm(g)
        if nrm > 0:
            gens.append(g / nrm)

    basis_vecs: list[np.ndarray] = []
    basis_mats: list[np.ndarray] = []

    def admit(x: np.ndarray) -> bool:
        v = _as_real_vector(x)
        if basis_vecs:
            q = np.array(basis_vecs)
            # two Gram-Schmidt passes
            v = v - q.T @ (q @ v)
            v = v - q.T @ (q @ v)
        r = np.linalg.norm(v)
        if r <= LIE_RESIDUAL_TOL:
            return False
        v = v / r
        basis_vecs.append(v)
        half = v.size // 2
        basis_mats.append((v[:half] + 1j * v[half:]).reshape(n, n))
        return True

    for g in gens:
        admit(g)
    frontier = list(basis_mats)
    while frontier and len(basis_mats) < full:
        new = []
        for x in frontier:
            for g in gens:
                if len(basis_mats) >= full:
                    break
                if admit(g @ x - x @ g):
                    new.append(basis_mats[-1])
        frontier = new
    return basis_mats


def _phase_fixed_eigenbasis(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = eigh_hermitian(np.asarray(h, dtype=complex))
    v = v.copy()
    for j in range(v.shape[1]):
        k = int(np.argmax(np.abs(v[:, j])))
        v[:, j] *= np.abs(v[k, j]) / v[k, j]
    return w, v


def _spectrum_ok(w: np.ndarray, tol_gap: float) -> tuple[bool, list[str]]:
    problems = []
    n = len(w)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= tol_gap:
                problems.append(f"eigenvalues {i} and {j} collide ({w[i]:.6e} vs {w[j]:.6e})")
    gaps = [(i, j, w[i] - w[j]) for i in range(n) for j in range(i + 1, n)]
    for p in range(len(gaps)):
        for q in range(p + 1, len(gaps)):
            if abs(gaps[p][2] - gaps[q][2]) <= tol_gap:
                (i1, j1, _), (i2, j2, _) = gaps[p], gaps[q]
                problems.append(f"gaps ({i1},{j1}) and ({i2},{j2}) collide ({gaps[p][2]:.6e})")
    return not problems, problems


def _dense_ok(h_other: np.ndarray, v: np.ndarray, tol_zero: float, include_diagonal: bool) -> tuple[bool, list[str]]:
    rep = v.conj().T @ h_other @ v
    n = rep.shape[0]
    problems = []
    for i in range(n):
        for j in range(n):
            if i == j and not include_diagonal:
                continue
            if abs(rep[i, j]) <= tol_zero:
                problems.append(f"element ({i},{j}) vanishes (|.| = {abs(rep[i, j]):.3e})")
    return not problems, problems


def kac_check(pair: HamiltonianPair, include_diagonal: bool = True) -> ControllabilityReport:
    """Evaluate Kac's sufficient conditions, plus the Lie rank when ``N <= 12``.

    ``include_diagonal=False`` relaxes the "no zero elements" test to the
    off-diagonal entries of the cross-basis representation.
    """
    n = pair.dim
    w_a, v_a = _phase_fixed_eigenbasis(pair.h_a)
    w_b, v_b = _phase_fixed_eigenbasis(pair.h_b)
    tol_zero_b = 1e-10 * np.linalg.norm(pair.h_b) / n
    tol_zero_a = 1e-10 * np.linalg.norm(pair.h_a) / n
    ok_ba, prob_ba = _dense_ok(pair.h_b, v_a, tol_zero_b, include_diagonal)
    ok_ab, prob_ab = _dense_ok(pair.h_a, v_b, tol_zero_a, include_diagonal)

    def tol_gap(w):
        return 1e-8 * (w[-1] - w[0]) if n > 1 else 0.0

    spec_a, sprob_a = _spectrum_ok(w_a, tol_gap(w_a))
    spec_b, sprob_b = _spectrum_ok(w_b, tol_gap(w_b))

    basis = lie_closure_basis(pair) if n <= MAX_LIE_DIM else None
    rank = len(basis) if basis is not None else -1
    offdiag_ok = ok_ba and ok_ab
    spectrum_ok = spec_a and spec_b
    fully = basis is not None and _traceless_rank(basis, n) == n * n - 1
    if offdiag_ok and spectrum_ok and rank >= 0 and not fully:
        raise AssertionError(f"Kac conditions hold but the algebra misses su({n}) (rank {rank}); numerical breakdown")
    details = {
        "dim": n,
        "eigenvalues_a": w_a.tolist(),
        "eigenvalues_b": w_b.tolist(),
        "h_b_in_a_basis": prob_ba,
        "h_a_in_b_basis": prob_ab,
        "spectrum_a": sprob_a,
        "spectrum_b": sprob_b,
        "include_diagonal": include_diagonal,
    }
    if rank < 0:
        details["lie_rank"] = "skipped (N > 12)"
    return ControllabilityReport(
        lie_rank=rank,
        fully_controllable=fully if rank >= 0 else (offdiag_ok and spectrum_ok),
        kac_offdiag_ok=offdiag_ok,
        kac_spectrum_ok=spectrum_ok,
        details=details,
    )
