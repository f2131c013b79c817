"""Newton-type refinement of pulse timings towards a nearby target unitary.

Each iteration linearises ``U(tau + dtau) ~ U(tau) + sum_k dU/dtau_k dtau_k``
and asks it to match ``U(tau) L`` where ``L = log(U^dagger W)`` is the
residual generator (target ``W`` phase-aligned to ``U``). The real-embedded
linear system is solved in the least-squares sense with a column-pivoted
orthogonal factorisation; the step is halved until every duration stays
non-negative and the residual shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from nonholo.controllability import HamiltonianPair
from nonholo.linalg import gate_fidelity, logm_unitary
from nonholo.synth.sequence import PulseSequence, durations_gradient, durations_unitary

DEFAULT_FIDELITY_GOAL = 1 - 1e-8
LSTSQ_COND = 1e-10
MAX_HALVINGS = 30


class NonConvergence(RuntimeError):
    """The residual stopped shrinking or the iteration budget ran out."""


class NegativeTimingTrap(NonConvergence):
    """No step fraction kept all durations non-negative."""


@dataclass(frozen=True)
class NewtonOptions:
    fidelity_goal: float = DEFAULT_FIDELITY_GOAL
    max_newton_iters: int = 200
    max_halvings: int = MAX_HALVINGS
    stagnation_window: int = 10
    stagnation_ratio: float = 0.9


@dataclass
class NewtonTrace:
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)
    fidelities: list[float] = field(default_factory=list)
    status: str = "running"


def align_phase(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``w e^{i alpha}`` with ``alpha`` maximising ``Re tr(u^dagger w e^{i alpha})``."""
    tr = np.vdot(u, w)
    if tr == 0:
        return w
    return w * np.exp(-1j * np.angle(tr))


def residual_generator(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Skew-Hermitian ``L`` with ``w ~ u exp(L)`` up to global phase."""
    return logm_unitary(u.conj().T @ align_phase(u, w))


def _real_embed(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(m.shape[0], -1) if m.ndim == 3 else m.reshape(1, -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def newton_step(tau: np.ndarray, target: np.ndarray, pair: HamiltonianPair) -> tuple[np.ndarray, np.ndarray, float]:
    """Undamped increment ``dtau``, current unitary and residual norm."""
    u, du = durations_gradient(tau, pair)
    gen = residual_generator(u, target)
    jac = _real_embed(du).T
    rhs = _real_embed(u @ gen)[0]
    dtau, *_ = sla.lstsq(jac, rhs, cond=LSTSQ_COND, lapack_driver="gelsy")
    return dtau, u, float(np.linalg.norm(gen))


def damped_update(tau: np.ndarray, dtau: np.ndarray, res: float, target, pair: HamiltonianPair, max_halvings: int = MAX_HALVINGS) -> np.ndarray:
    """Largest ``tau + 2^-k dtau`` that is non-negative and lowers the residual."""
    step = 1.0
    feasible = False
    for _ in range(max_halvings + 1):
        cand = tau + step * dtau
        if np.all(cand >= 0):
            feasible = True
            if np.linalg.norm(residual_generator(durations_unitary(cand, pair), target)) < res:
                return cand
        step *= 0.5
    if not feasible:
        raise NegativeTimingTrap("every damped step drives a duration negative")
    raise NonConvergence(f"no damped step reduces the residual {res:.3e}")


def refine_durations(tau0, target, pair: HamiltonianPair, opts: NewtonOptions | None = None, trace: NewtonTrace | None = None) -> np.ndarray:
    """Raw-array version of :func:`newton_refine`; raises on failure."""
    opts = opts or NewtonOptions()
    trace = trace if trace is not None else NewtonTrace()
    target = np.asarray(target, dtype=complex)
    tau = np.array(tau0, dtype=float)
    if np.any(tau < 0):
        raise ValueError("starting durations must be non-negative")
    for it in range(opts.max_newton_iters + 1):
        dtau, u, res = newton_step(tau, target, pair)
        fid = gate_fidelity(u, target)
        trace.iterations = it
        trace.residuals.append(res)
        trace.fidelities.append(fid)
        if fid >= opts.fidelity_goal:
            trace.status = "converged"
            return tau
        if it == opts.max_newton_iters:
            break
        w = opts.stagnation_window
        if len(trace.residuals) > w and trace.residuals[-1] > opts.stagnation_ratio * trace.residuals[-1 - w]:
            trace.status = "stagnated"
            raise NonConvergence(f"residual stagnated at {res:.3e} after {it} iterations (fidelity {fid:.12f})")
        try:
            tau = damped_update(tau, dtau, res, target, pair, opts.max_halvings)
        except NonConvergence as exc:
            trace.status = "negative-timing" if isinstance(exc, NegativeTimingTrap) else "no-descent"
            raise type(exc)(f"{exc} (iteration {it})") from None
    trace.status = "max-iterations"
    raise NonConvergence(f"fidelity goal not met after {opts.max_newton_iters} iterations")


def newton_refine(start: PulseSequence, target, pair: HamiltonianPair, opts: NewtonOptions | None = None, trace: NewtonTrace | None = None) -> PulseSequence:
    """Iterate timing corrections from ``start`` until ``target`` is reached.

    Raises :class:`NonConvergence` (or its subclass
    :class:`NegativeTimingTrap`) when refinement fails; the caller is
    expected to subdivide the target further.
    """
    return PulseSequence(tuple(refine_durations(start.as_array(), target, pair, opts, trace)))
