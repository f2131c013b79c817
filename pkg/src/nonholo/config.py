"""TOML run configuration: one system block, one problem block, optional verify/output blocks.

Two mutually exclusive system tables are accepted::

    [system.rydberg]      # RydbergParams fields; vdd_real/vdd_imag or d_a/d_b
    [system.explicit]     # h_a_real, h_a_imag, h_b_real, h_b_imag (atomic units)

``problem.target`` is ``"cnot"``, ``"identity"`` or a table
``{real = [[...]], imag = [[...]]}``. Complex matrices are always given as
separate real and imaginary nested arrays; a missing ``*_imag`` means zero.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from nonholo.controllability import HamiltonianPair
from nonholo.rydberg import ConfigurationError, RydbergParams, cnot_target, hamiltonian_pair

_RYDBERG_SCALARS = ("R", "theta", "phi", "E_a", "E_b", "gamma", "E1", "E2", "E3", "d_a", "d_b")
_PROBLEM_KEYS = {
    "target": None,
    "fidelity_goal": float,
    "max_subdivision": int,
    "max_newton_iters": int,
    "schedule": str,
    "warm_start": bool,
    "root_attempts": int,
    "max_restarts": int,
    "rng_seed": int,
    "timing_scale": float,
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; the message names the file location."""


@dataclass
class OutputConfig:
    plots: bool = False
    stark_min: float = 78.0
    stark_max: float = 92.0
    stark_points: int = 1401


@dataclass
class VerifyConfig:
    jitter_sigmas_ps: list[float] = field(default_factory=lambda: [0.0, 1.0, 10.0, 50.0, 100.0])
    jitter_trials: int = 20


@dataclass
class RunConfig:
    mode: str
    pair: HamiltonianPair
    target: np.ndarray
    problem: dict[str, Any]
    rydberg: RydbergParams | None = None
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: str = "<string>"


def default_config_text() -> str:
    return resources.files("nonholo").joinpath("data/default.toml").read_text(encoding="utf-8")


class _Locator:
    """Maps ``table.key`` back to a line in the source for error messages."""

    _header = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]\s*(#.*)?$")
    _key = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")

    def __init__(self, text: str, source: str):
        self.source = source
        self.lines: dict[str, int] = {}
        table = ""
        for no, line in enumerate(text.splitlines(), start=1):
            m = self._header.match(line)
            if m:
                table = m.group(1)
                self.lines.setdefault(table, no)
                continue
            m = self._key.match(line)
            if m:
                self.lines.setdefault(f"{table}.{m.group(1)}" if table else m.group(1), no)

    def error(self, path: str, message: str) -> ConfigError:
        probe = path
        while probe and probe not in self.lines:
            probe = probe.rpartition(".")[0]
        where = f"{self.source}:{self.lines[probe]}" if probe else self.source
        return ConfigError(f"{where}: {path}: {message}")


def _number(value, kind, path, loc: _Locator):
    """Check a scalar against ``kind`` (float, int, bool or str)."""
    if kind is str:
        if not isinstance(value, str):
            raise loc.error(path, f"expected a string, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise loc.error(path, f"expected true/false, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise loc.error(path, f"expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise loc.error(path, f"expected an integer, got {value!r}")
        return int(value)
    if not np.isfinite(value):
        raise loc.error(path, f"must be finite, got {value!r}")
    return float(value)


def _matrix(table: dict, key: str, path: str, loc: _Locator, required: bool = True) -> np.ndarray | None:
    real = table.get(f"{key}_real", table.get("real") if key == "" else None)
    imag = table.get(f"{key}_imag", table.get("imag") if key == "" else None)
    name = f"{path}.{key}_real" if key else f"{path}.real"
    if real is None:
        if required:
            raise loc.error(name, "missing")
        return None
    try:
        re_part = np.array(real, dtype=float)
        im_part = np.zeros_like(re_part) if imag is None else np.array(imag, dtype=float)
    except (TypeError, ValueError) as exc:
        raise loc.error(name, f"not a numeric nested array ({exc})") from None
    if re_part.ndim != 2 or re_part.shape[0] != re_part.shape[1]:
        raise loc.error(name, f"expected a square matrix, got shape {re_part.shape}")
    if im_part.shape != re_part.shape:
        raise loc.error(name.replace("_real", "_imag").replace(".real", ".imag"), f"shape {im_part.shape} does not match real part {re_part.shape}")
    if not (np.all(np.isfinite(re_part)) and np.all(np.isfinite(im_part))):
        raise loc.error(name, "contains non-finite entries")
    return re_part + 1j * im_part


def _rydberg(table: dict, loc: _Locator) -> RydbergParams:
    known = set(_RYDBERG_SCALARS) | {"vdd_real", "vdd_imag"}
    for k in table:
        if k not in known:
            raise loc.error(f"system.rydberg.{k}", "unknown key")
    kw: dict[str, Any] = {k: _number(table[k], float, f"system.rydberg.{k}", loc) for k in _RYDBERG_SCALARS if k in table}
    vdd = _matrix(table, "vdd", "system.rydberg", loc, required=False)
    if vdd is not None:
        kw["vdd"] = vdd
    elif "d_a" not in kw or "d_b" not in kw:
        raise loc.error("system.rydberg", "no dipole data: give vdd_real/vdd_imag or both d_a and d_b")
    try:
        return RydbergParams(**kw)
    except ConfigurationError as exc:
        raise loc.error("system.rydberg", str(exc)) from None


def _explicit(table: dict, loc: _Locator) -> HamiltonianPair:
    for k in table:
        if k not in ("h_a_real", "h_a_imag", "h_b_real", "h_b_imag"):
            raise loc.error(f"system.explicit.{k}", "unknown key")
    h_a = _matrix(table, "h_a", "system.explicit", loc)
    h_b = _matrix(table, "h_b", "system.explicit", loc)
    try:
        return HamiltonianPair(h_a, h_b)
    except ValueError as exc:
        raise loc.error("system.explicit", str(exc)) from None


def _target(value, dim: int, loc: _Locator) -> np.ndarray:
    if isinstance(value, str):
        if value == "identity":
            return np.eye(dim, dtype=complex)
        if value == "cnot":
            if dim != 4:
                raise loc.error("problem.target", f"'cnot' needs a 4-level system, this one has {dim}")
            return cnot_target()
        raise loc.error("problem.target", f"unknown target {value!r} (use 'cnot', 'identity' or a matrix table)")
    if not isinstance(value, dict):
        raise loc.error("problem.target", "expected a string or a {real, imag} table")
    m = _matrix(value, "", "problem.target", loc)
    if m.shape != (dim, dim):
        raise loc.error("problem.target", f"target is {m.shape[0]}x{m.shape[0]} but the system is {dim}x{dim}")
    if not np.allclose(m.conj().T @ m, np.eye(dim), atol=1e-10):
        raise loc.error("problem.target", "target matrix is not unitary")
    return m


def _section(doc: dict, name: str, cls, loc: _Locator):
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise loc.error(name, "expected a table")
    kinds = {f.name: f.type for f in fields(cls)}
    out = cls()
    for k, v in raw.items():
        if k not in kinds:
            raise loc.error(f"{name}.{k}", "unknown key")
        current = getattr(out, k)
        if isinstance(current, list):
            if not isinstance(v, list):
                raise loc.error(f"{name}.{k}", "expected an array")
            v = [_number(x, float, f"{name}.{k}", loc) for x in v]
        else:
            v = _number(v, type(current), f"{name}.{k}", loc)
        setattr(out, k, v)
    return out


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    loc = _Locator(text, source)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: TOML syntax error: {exc}") from None
    for k in doc:
        if k not in ("system", "problem", "verify", "output"):
            raise loc.error(k, "unknown table")
    system = doc.get("system")
    if not isinstance(system, dict) or not system:
        raise loc.error("system", "missing [system.rydberg] or [system.explicit]")
    modes = [k for k in system if k in ("rydberg", "explicit")]
    extra = [k for k in system if k not in ("rydberg", "explicit")]
    if extra:
        raise loc.error(f"system.{extra[0]}", "unknown system mode")
    if len(modes) != 1:
        raise loc.error("system", f"exactly one of [system.rydberg] / [system.explicit] is required, found {len(modes)}")
    mode = modes[0]
    params = None
    if mode == "rydberg":
        params = _rydberg(system["rydberg"], loc)
        try:
            pair = hamiltonian_pair(params)
        except ValueError as exc:
            raise loc.error("system.rydberg", str(exc)) from None
    else:
        pair = _explicit(system["explicit"], loc)

    raw = doc.get("problem", {})
    if not isinstance(raw, dict):
        raise loc.error("problem", "expected a table")
    problem: dict[str, Any] = {}
    for k, v in raw.items():
        if k not in _PROBLEM_KEYS:
            raise loc.error(f"problem.{k}", "unknown key")
        if k != "target":
            problem[k] = _number(v, _PROBLEM_KEYS[k], f"problem.{k}", loc)
    if "schedule" in problem and problem["schedule"] not in ("pow2", "integer"):
        raise loc.error("problem.schedule", f"expected 'pow2' or 'integer', got {problem['schedule']!r}")
    if "fidelity_goal" in problem and not 0.0 < problem["fidelity_goal"] <= 1.0:
        raise loc.error("problem.fidelity_goal", "must lie in (0, 1]")
    for k in ("max_subdivision", "root_attempts", "max_restarts"):
        if k in problem and problem[k] < 1:
            raise loc.error(f"problem.{k}", "must be >= 1")
    target = _target(raw.get("target", "identity"), pair.dim, loc)

    verify_cfg = _section(doc, "verify", VerifyConfig, loc)
    if verify_cfg.jitter_trials < 1:
        raise loc.error("verify.jitter_trials", "must be >= 1")
    if any(s < 0 for s in verify_cfg.jitter_sigmas_ps):
        raise loc.error("verify.jitter_sigmas_ps", "sigmas must be non-negative")
    output_cfg = _section(doc, "output", OutputConfig, loc)
    if output_cfg.stark_points < 2 or not output_cfg.stark_max > output_cfg.stark_min:
        raise loc.error("output", "stark grid needs stark_max > stark_min and at least 2 points")
    return RunConfig(mode, pair, target, problem, params, verify_cfg, output_cfg, source)


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read ``path``, or the packaged default configuration when ``None``."""
    if path is None:
        return parse_config(default_config_text(), "<default config>")
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read ({exc.strerror})") from None
    return parse_config(text, str(p))
