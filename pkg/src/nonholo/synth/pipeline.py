"""End-to-end synthesis: identity root, identity vector, subdivided Newton descent."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from nonholo.controllability import HamiltonianPair
from nonholo.linalg import gate_fidelity, unitary, unitary_power
from nonholo.synth.newton import (
    DEFAULT_FIDELITY_GOAL,
    NewtonOptions,
    NewtonTrace,
    NonConvergence,
    damped_update,
    newton_step,
    refine_durations,
)
from nonholo.synth.roots import RootNotFound, RootOptions, RootSeed, build_identity_vector, default_timing_scale, find_identity_root
from nonholo.synth.sequence import PulseSequence, sequence_unitary

log = logging.getLogger(__name__)

POLISH_ITERS = 5


class SynthesisError(RuntimeError):
    def __init__(self, message: str, log_records: list[dict[str, Any]] | None = None):
        super().__init__(message)
        self.iterations_log = log_records or []


@dataclass(frozen=True)
class ControlProblem:
    """What to synthesise and with which budgets.

    ``schedule`` is ``"pow2"`` (n = 2^k, halving each stage) or
    ``"integer"`` (n, n-1, ..., 1). ``warm_start=False`` restarts every
    stage from the identity vector. The whole descent is run from
    ``root_attempts`` distinct identity vectors and the smallest ``n``
    reached wins.
    """

    pair: HamiltonianPair
    target: np.ndarray
    fidelity_goal: float = DEFAULT_FIDELITY_GOAL
    max_subdivision: int = 256
    max_newton_iters: int = 200
    rng_seed: int = 0
    timing_scale: float | None = None
    schedule: str = "pow2"
    warm_start: bool = True
    max_restarts: int = 200
    root_attempts: int = 8

    def __post_init__(self):
        t = unitary(self.target)
        if t.shape[0] != self.pair.dim:
            raise ValueError(f"target is {t.shape[0]}x{t.shape[0]} but the generators are {self.pair.dim}x{self.pair.dim}")
        object.__setattr__(self, "target", t)
        if self.max_subdivision < 1:
            raise ValueError("max_subdivision must be >= 1")
        if self.schedule not in ("pow2", "integer"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.timing_scale is not None and not self.timing_scale > 0:
            raise ValueError("timing_scale must be positive")

    def subdivisions(self) -> list[int]:
        if self.schedule == "integer":
            return list(range(self.max_subdivision, 0, -1))
        k = int(np.floor(np.log2(self.max_subdivision)))
        return [2**j for j in range(k, -1, -1)]


@dataclass
class SynthesisResult:
    elementary: PulseSequence
    n_star: int
    pair: HamiltonianPair = field(repr=False)
    target: np.ndarray = field(repr=False)
    root: RootSeed | None = None
    iterations_log: list[dict[str, Any]] = field(default_factory=list)
    full_sequence: PulseSequence = field(init=False)
    achieved_fidelity: float = field(init=False)

    def __post_init__(self):
        self.full_sequence = self.elementary.repeated(self.n_star)
        self.achieved_fidelity = gate_fidelity(sequence_unitary(self.full_sequence, self.pair), self.target)


def _stage_record(n: int, trace: NewtonTrace, ok: bool) -> dict[str, Any]:
    return {
        "n": n,
        "converged": ok,
        "status": trace.status,
        "newton_iterations": trace.iterations,
        "residuals": [float(r) for r in trace.residuals],
        "final_fidelity": trace.fidelities[-1] if trace.fidelities else None,
    }


def _polish(tau: np.ndarray, stage_target: np.ndarray, problem: ControlProblem, n: int) -> np.ndarray:
    """Squeeze out residual error so it does not grow across the n repeats."""
    best = tau
    best_fid = gate_fidelity(sequence_unitary(PulseSequence(tuple(best)).repeated(n), problem.pair), problem.target)
    for _ in range(POLISH_ITERS):
        dtau, _, res = newton_step(best, stage_target, problem.pair)
        try:
            cand = damped_update(best, dtau, res, stage_target, problem.pair)
        except NonConvergence:
            break
        fid = gate_fidelity(sequence_unitary(PulseSequence(tuple(cand)).repeated(n), problem.pair), problem.target)
        if fid <= best_fid:
            break
        best, best_fid = cand, fid
    return best


def _descend_subdivisions(problem: ControlProblem, identity: np.ndarray, newton_opts: NewtonOptions, records: list) -> tuple[int, np.ndarray, np.ndarray] | None:
    best = None
    current = identity
    for n in problem.subdivisions():
        stage_target = unitary_power(problem.target, 1.0 / n)
        start = current if problem.warm_start else identity
        trace = NewtonTrace()
        try:
            tau = refine_durations(start, stage_target, problem.pair, newton_opts, trace)
        except NonConvergence as exc:
            records.append(_stage_record(n, trace, False) | {"error": str(exc)})
            log.info("stage n=%d failed: %s", n, exc)
            break
        records.append(_stage_record(n, trace, True))
        log.info("stage n=%d converged in %d iterations", n, trace.iterations)
        best = (n, tau, stage_target)
        current = tau
    return best


def synthesize(problem: ControlProblem) -> SynthesisResult:
    """Compile ``problem.target`` into alternating pulses.

    Starting from the identity-realising vector, refine towards
    ``target^(1/n)`` for decreasing ``n``; the smallest ``n`` that still
    converges is ``n_star`` and its sequence is repeated ``n_star`` times.
    """
    if problem.fidelity_goal >= 1.0:
        raise SynthesisError(f"fidelity_goal {problem.fidelity_goal!r} is unreachable in floating point")
    pair = problem.pair
    scale = problem.timing_scale if problem.timing_scale is not None else default_timing_scale(pair)
    root_opts = RootOptions(timing_scale=scale, max_restarts=problem.max_restarts)
    newton_opts = NewtonOptions(fidelity_goal=problem.fidelity_goal, max_newton_iters=problem.max_newton_iters)
    records: list[dict[str, Any]] = []
    next_restart = 0
    best = None
    for attempt in range(problem.root_attempts):
        try:
            root = find_identity_root(pair, problem.rng_seed, root_opts, first_restart=next_restart)
        except RootNotFound as exc:
            records.append({"stage": "root", "attempt": attempt, "error": str(exc)})
            if best is None:
                raise SynthesisError(str(exc), records) from exc
            break
        next_restart = root.restarts_used + 1
        records.append(
            {
                "stage": "root",
                "attempt": attempt,
                "timings": list(root.timings),
                "purity": root.purity_achieved,
                "restarts": root.restarts_used,
            }
        )
        stage = _descend_subdivisions(problem, build_identity_vector(root).as_array(), newton_opts, records)
        # strict "<" keeps the earliest attempt on ties
        if stage is not None and (best is None or stage[0] < best[0][0]):
            best = (stage, root)
        if best is not None and best[0][0] == 1:
            break
    if best is None:
        raise SynthesisError(
            f"no subdivision n <= {problem.max_subdivision} converged from any of "
            f"{problem.root_attempts} identity vectors",
            records,
        )
    (n_star, tau, stage_target), root = best
    tau = _polish(tau, stage_target, problem, n_star)
    return SynthesisResult(
        elementary=PulseSequence(tuple(tau)),
        n_star=n_star,
        pair=pair,
        target=problem.target,
        root=root,
        iterations_log=records,
    )
