"""Timings whose alternating product is a non-degenerate N-th root of identity.

The objective is the char-poly purity ``F_N = sum_j |a_j|^2`` of the
N-pulse product, which reaches its global minimum 2 exactly on the
N-th roots of the identity (up to phase). Durations are kept
non-negative throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from nonholo.controllability import HamiltonianPair, MAX_LIE_DIM, su_rank
from nonholo.linalg import char_poly_derivative
from nonholo.synth.sequence import PulseSequence, durations_gradient, durations_unitary

log = logging.getLogger(__name__)

TOL_ROOT = 1e-9
ROOT_PHASE_TOL = 1e-4


class RootNotFound(RuntimeError):
    """Restart budget exhausted; ``best`` holds the lowest ``F_N`` seen."""

    def __init__(self, message: str, best: "RootSeed | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class RootOptions:
    tol_root: float = TOL_ROOT
    max_restarts: int = 200
    timing_scale: float | None = None
    max_steps: int = 100
    switch_tol: float = 1e-3
    polish_iters: int = 1000
    stagnation_window: int = 50
    stagnation_tol: float = 1e-12
    armijo_c: float = 1e-4
    init_low: float = 0.2
    init_high: float = 1.8


@dataclass(frozen=True)
class RootSeed:
    timings: tuple[float, ...]
    purity_achieved: float
    restarts_used: int
    converged: bool = True
    dim: int = field(default=0)

    def block(self) -> tuple[float, ...]:
        """One period of the identity vector; odd N gets a trailing zero-length B pulse."""
        t = tuple(self.timings)
        if len(t) % 2:
            t = t + (0.0,)
        return t


def default_timing_scale(pair: HamiltonianPair) -> float:
    """``pi / ||H_a||_2``, a characteristic precession period."""
    nrm = np.linalg.norm(pair.h_a, 2)
    if nrm == 0:
        nrm = np.linalg.norm(pair.h_b, 2)
    if nrm == 0:
        raise ValueError("both generators vanish")
    return float(np.pi / nrm)


def _block(x: np.ndarray) -> np.ndarray:
    return np.append(x, 0.0) if len(x) % 2 else x


def purity_and_grad(timings, pair: HamiltonianPair) -> tuple[float, np.ndarray]:
    """``F_N`` of the root block and its gradient with respect to the N timings."""
    t = np.asarray(timings, dtype=float)
    n = len(t)
    u, du = durations_gradient(_block(t), pair)
    a, da = char_poly_derivative(u, du[:n])
    f = float(np.sum(np.abs(a) ** 2))
    g = 2.0 * np.real(da @ a.conj())
    return f, g


def purity(timings, pair: HamiltonianPair) -> float:
    from nonholo.linalg import char_poly

    u = durations_unitary(_block(np.asarray(timings, dtype=float)), pair)
    return float(np.sum(np.abs(char_poly(u)) ** 2))


def root_phase_error(u: np.ndarray) -> float:
    """Largest distance of ``u``'s phase-corrected eigenvalues from distinct N-th roots of unity.

    Returns ``inf`` when two eigenvalues share the nearest root.
    """
    n = u.shape[0]
    lam = np.linalg.eigvals(u)
    c = np.mean(lam**n)
    lam = lam * np.exp(-1j * np.angle(c) / n)
    k = np.round(np.angle(lam) * n / (2 * np.pi)).astype(int) % n
    if len(set(k.tolist())) != n:
        return float("inf")
    roots = np.exp(2j * np.pi * k / n)
    return float(np.max(np.abs(lam - roots)))


def descend(x0, pair: HamiltonianPair, scale: float, opts: RootOptions | None = None) -> tuple[np.ndarray, float, int]:
    """Minimise ``F_N`` from timings ``x0 * scale``.

    Projected steepest descent with Armijo backtracking picks the basin;
    once ``F_N - 2`` drops below ``opts.switch_tol`` (or after
    ``opts.max_steps`` steps, or on stagnation) a bounded L-BFGS polish
    drives it to the bottom. Works in ``x = T / scale``. Returns the final
    timings (atomic units), their ``F_N`` and the steepest-descent step count.
    """
    opts = opts or RootOptions()
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)

    def fg(y):
        f, g = purity_and_grad(y * scale, pair)
        return f, g * scale

    f, g = fg(x)
    alpha = 1.0
    history = [f]
    steps = 0
    while steps < opts.max_steps and f - 2.0 > opts.switch_tol:
        accepted = False
        for _ in range(60):
            y = np.maximum(x - alpha * g, 0.0)
            fy, gy = fg(y)
            if fy <= f - opts.armijo_c * np.dot(g, x - y):
                accepted = True
                break
            alpha *= 0.5
        if not accepted or np.array_equal(y, x):
            break
        x, f, g = y, fy, gy
        steps += 1
        alpha *= 2.0
        history.append(f)
        w = opts.stagnation_window
        if len(history) > w and history[-w - 1] - f < opts.stagnation_tol:
            break
    if f - 2.0 > opts.tol_root:
        res = optimize.minimize(
            fg,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, None)] * len(x),
            options={"ftol": 0.0, "gtol": 1e-14, "maxiter": opts.polish_iters},
        )
        if res.fun < f:
            x, f = np.asarray(res.x, dtype=float), float(res.fun)
    return x * scale, f, steps


def _restart_rng(seed: int, restart: int) -> np.random.Generator:
    # one independent stream per restart, so restarts can be farmed out in any order
    return np.random.default_rng(np.random.SeedSequence([seed, restart]))


def single_shot(pair: HamiltonianPair, seed: int, restart: int, opts: RootOptions = RootOptions()):
    """One descent from random timings; returns ``(timings, F_N, ok)``."""
    n = pair.dim
    scale = opts.timing_scale if opts.timing_scale is not None else default_timing_scale(pair)
    rng = _restart_rng(seed, restart)
    x0 = rng.uniform(opts.init_low, opts.init_high, size=n)
    t, f, _ = descend(x0, pair, scale, opts)
    ok = f - 2.0 <= opts.tol_root
    if ok:
        ok = root_phase_error(durations_unitary(_block(t), pair)) <= ROOT_PHASE_TOL
    return t, f, ok


def find_identity_root(pair: HamiltonianPair, seed=0, opts: RootOptions | None = None, first_restart: int = 0) -> RootSeed:
    """Find ``T_1 ... T_N > 0`` whose alternating product is an N-th root of identity.

    Restarts from fresh random timings until ``F_N <= 2 + tol_root`` and the
    eigenphases sit on distinct N-th roots of unity. The lowest restart
    index that succeeds wins, independent of evaluation order.
    ``first_restart`` skips earlier restart indices (used to ask for
    another root from the same seed).
    """
    opts = opts or RootOptions()
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    seed = int(seed)
    n = pair.dim
    if n <= MAX_LIE_DIM and su_rank(pair) < n * n - 1:
        log.warning("generator pair is not fully controllable; root search may fail")
    best = None
    for restart in range(first_restart, first_restart + opts.max_restarts):
        t, f, ok = single_shot(pair, seed, restart, opts)
        if best is None or f < best.purity_achieved:
            best = RootSeed(tuple(t.tolist()), f, restart, converged=False, dim=n)
        if ok:
            log.debug("root found after %d restarts, F_N - 2 = %.3e", restart, f - 2.0)
            return RootSeed(tuple(t.tolist()), f, restart, converged=True, dim=n)
    raise RootNotFound(
        f"no N-th root of identity after {opts.max_restarts} restarts (best F_N = {best.purity_achieved:.12g})",
        best,
    )


def build_identity_vector(root: RootSeed) -> PulseSequence:
    """Repeat the root block N times: ``tau_{i + (j-1)N} = T_i``."""
    n = len(root.timings)
    return PulseSequence(root.block() * n)
