"""``nonholo-ctl``: controllability check, identity roots, synthesis and verification.

Exit codes: 0 success, 1 algorithmic failure (not controllable, no root,
synthesis or fidelity goal missed), 2 bad input (config, sequence file,
dimension mismatch).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from nonholo import __version__
from nonholo.config import ConfigError, RunConfig, load_config
from nonholo.controllability import kac_check
from nonholo.linalg import NumericError, gate_fidelity
from nonholo.rydberg import bare_crossings, stark_diagram
from nonholo.seqio import SequenceFormatError, read_sequence, step_profile, write_sequence, write_table
from nonholo.synth import ControlProblem, RootNotFound, RootOptions, SynthesisError, build_identity_vector, find_identity_root, synthesize
from nonholo.synth.newton import DEFAULT_FIDELITY_GOAL
from nonholo.synth.sequence import PulseSequence, sequence_unitary
from nonholo.units import time_to_ns
from nonholo.verification import verify

log = logging.getLogger("nonholo")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _seed(cfg: RunConfig, args) -> int:
    return int(args.seed) if args.seed is not None else int(cfg.problem.get("rng_seed", 0))


def _goal(cfg: RunConfig) -> float:
    return float(cfg.problem.get("fidelity_goal", DEFAULT_FIDELITY_GOAL))


def _levels(cfg: RunConfig) -> tuple[float, float, str]:
    if cfg.rydberg is not None:
        return cfg.rydberg.E_a, cfg.rydberg.E_b, "field_V_per_cm"
    return 1.0, 0.0, "control_level(A=1,B=0)"


def _plot_profile(path: Path, seq: PulseSequence, cfg: RunConfig, title: str) -> None:
    level_a, level_b, name = _levels(cfg)
    pts = step_profile(seq, level_a, level_b)
    write_table(path.with_suffix(".dat"), f"time_ns {name}", pts)
    if cfg.output.plots:
        _svg(path.with_suffix(".svg"), [(pts[:, 0], pts[:, 1], None)], "time (ns)", name, title)


def _svg(path: Path, curves, xlabel: str, ylabel: str, title: str) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        # fixed salt keeps svg element ids reproducible between runs
        matplotlib.rcParams["svg.hashsalt"] = "nonholo"
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping %s", path.name)
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    for x, y, label in curves:
        ax.plot(x, y, label=label, lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if any(c[2] for c in curves):
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_check(cfg: RunConfig, args, out: Path) -> int:
    report = kac_check(cfg.pair, include_diagonal=not args.offdiag_only)
    payload = {"mode": cfg.mode, **report.to_dict()}
    if cfg.rydberg is not None:
        grid = np.linspace(cfg.output.stark_min, cfg.output.stark_max, cfg.output.stark_points)
        table = stark_diagram(cfg.rydberg, grid)
        n = table.bare.shape[1]
        header = "field_V_per_cm " + " ".join(f"bare_{k}" for k in range(n)) + " " + " ".join(f"coupled_{k}" for k in range(n))
        write_table(out / "stark_diagram.dat", header + "  (energies in a.u.)", table.rows())
        payload["bare_crossings_V_per_cm"] = [{"levels": [i, j], "field": e} for i, j, e in bare_crossings(table)]
        payload["grid_step_V_per_cm"] = float(grid[1] - grid[0])
        if cfg.output.plots:
            curves = [(grid, table.bare[:, k], f"bare {k}") for k in range(n)]
            curves += [(grid, table.coupled[:, k], f"coupled {k}") for k in range(n)]
            _svg(out / "stark_diagram.svg", curves, "field (V/cm)", "energy (a.u.)", "Stark diagram")
    _dump_json(out / "controllability.json", payload)
    print(f"lie_rank={report.lie_rank} (full={cfg.pair.dim ** 2}) fully_controllable={report.fully_controllable} "
          f"kac_offdiag_ok={report.kac_offdiag_ok} kac_spectrum_ok={report.kac_spectrum_ok}")
    return EXIT_OK if report.fully_controllable else EXIT_FAIL


def cmd_identity(cfg: RunConfig, args, out: Path) -> int:
    seed = _seed(cfg, args)
    opts = RootOptions(max_restarts=int(cfg.problem.get("max_restarts", 200)), timing_scale=cfg.problem.get("timing_scale"))
    try:
        root = find_identity_root(cfg.pair, seed, opts)
    except RootNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    seq = build_identity_vector(root)
    fid = gate_fidelity(sequence_unitary(seq, cfg.pair), np.eye(cfg.pair.dim))
    write_sequence(out / "identity_sequence.txt", seq, cfg.pair.dim, {"kind": "identity", "seed": seed})
    _dump_json(
        out / "identity_root.json",
        {
            "seed": seed,
            "timings_au": list(root.timings),
            "timings_ns": [time_to_ns(t) for t in root.timings],
            "purity": root.purity_achieved,
            "restarts_used": root.restarts_used,
            "identity_fidelity": fid,
            "pulses": len(seq),
        },
    )
    print(f"root found after {root.restarts_used} restarts, F_N = {root.purity_achieved:.15f}, identity fidelity = {fid:.15f}")
    return EXIT_OK if fid >= _goal(cfg) else EXIT_FAIL


def _problem(cfg: RunConfig, seed: int) -> ControlProblem:
    kw = {k: v for k, v in cfg.problem.items() if k != "rng_seed"}
    return ControlProblem(cfg.pair, cfg.target, rng_seed=seed, **kw)


def cmd_synthesize(cfg: RunConfig, args, out: Path) -> int:
    seed = _seed(cfg, args)
    try:
        problem = _problem(cfg, seed)
    except ValueError as exc:
        raise InputError(f"{cfg.source}: problem: {exc}") from None
    t0 = time.perf_counter()
    try:
        result = synthesize(problem)
    except SynthesisError as exc:
        _dump_json(out / "synthesis_log.json", {"error": str(exc), "iterations_log": exc.iterations_log})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    log.info("synthesis took %.1f s", time.perf_counter() - t0)
    meta = {"kind": "synthesized", "seed": seed, "n_star": result.n_star, "elementary_pulses": len(result.elementary)}
    write_sequence(out / "sequence.txt", result.full_sequence, cfg.pair.dim, meta)
    write_sequence(out / "elementary.txt", result.elementary, cfg.pair.dim, meta)
    _plot_profile(out / "control_profile", result.elementary, cfg, f"elementary sequence (repeat x{result.n_star})")
    total = result.full_sequence.total_duration()
    _dump_json(
        out / "synthesis.json",
        {
            "seed": seed,
            "n_star": result.n_star,
            "elementary_pulses": len(result.elementary),
            "total_pulses": len(result.full_sequence),
            "achieved_fidelity": result.achieved_fidelity,
            "fidelity_goal": problem.fidelity_goal,
            "elementary_durations_ns": [time_to_ns(t) for t in result.elementary.durations],
            "total_duration_ns": time_to_ns(total),
            "iterations_log": result.iterations_log,
        },
    )
    print(f"n* = {result.n_star}, {len(result.full_sequence)} pulses, fidelity = {result.achieved_fidelity:.15f}, "
          f"total duration = {time_to_ns(total):.3f} ns")
    return EXIT_OK if result.achieved_fidelity >= problem.fidelity_goal else EXIT_FAIL


def cmd_verify(cfg: RunConfig, args, out: Path) -> int:
    if args.sequence is None:
        raise InputError("verify needs --sequence FILE")
    try:
        sf = read_sequence(args.sequence)
    except SequenceFormatError as exc:
        raise InputError(str(exc)) from None
    if sf.dim != cfg.pair.dim:
        raise InputError(f"{args.sequence}: sequence is for dimension {sf.dim} but the configured system has {cfg.pair.dim}")
    seed = _seed(cfg, args)
    try:
        report = verify(sf.sequence, cfg.pair, cfg.target, cfg.verify.jitter_sigmas_ps, cfg.verify.jitter_trials, seed)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _dump_json(out / "verification.json", {"sequence": str(sf.meta.get("kind", "")), "pulses": len(sf.sequence), **report.to_dict()})
    if report.jitter_curve:
        write_table(out / "jitter.dat", "sigma_ps mean_fidelity std_fidelity", report.jitter_curve)
        if cfg.output.plots:
            c = np.array(report.jitter_curve)
            _svg(out / "jitter.svg", [(c[:, 0], c[:, 1], None)], "timing jitter sigma (ps)", "mean fidelity", "jitter sensitivity")
    life = "below" if report.duration_vs_lifetime < 1 else "ABOVE"
    print(f"fidelity = {report.fidelity:.15f}, total duration = {report.total_duration_ns:.3f} ns "
          f"({report.duration_vs_lifetime:.3%} of the 10 us lifetime, {life})")
    return EXIT_OK if report.fidelity >= _goal(cfg) else EXIT_FAIL


COMMANDS = {"check": cmd_check, "identity": cmd_identity, "synthesize": cmd_synthesize, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonholo-ctl", description="Quantum gates from two alternating Hamiltonians.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration (default: packaged Rydberg CNOT config)")
    common.add_argument("--out", default="nonholo-out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help="overrides problem.rng_seed")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="Lie rank and Kac conditions (plus Stark diagram data)")
    p.add_argument("--offdiag-only", action="store_true", help="ignore diagonal entries in the density test")
    sub.add_parser("identity", parents=[common], help="find an N-th root of identity and its identity vector")
    sub.add_parser("synthesize", parents=[common], help="compile the target gate into a pulse sequence")
    p = sub.add_parser("verify", parents=[common], help="re-simulate a sequence file and scan timing jitter")
    p.add_argument("--sequence", help="sequence file written by synthesize or identity")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)], format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
