"""Plain-text pulse-sequence files and plot data.

Sequence file layout::

    # nonholo-ctl v1
    # dim: 4
    # n_star: 16
    # elementary_pulses: 16
    # pulses: 256
    # columns: index,label,duration_ns,duration_au
    0,A,1.2345678901234567,51037.1...
    ...

Durations are written with 17 significant digits so that reading a file
back reproduces the doubles exactly; ``duration_au`` is authoritative and
``duration_ns`` is informational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nonholo.synth.sequence import PulseSequence
from nonholo.units import time_to_ns

MAGIC = "# nonholo-ctl v1"
COLUMNS = "index,label,duration_ns,duration_au"


class SequenceFormatError(ValueError):
    pass


@dataclass
class SequenceFile:
    sequence: PulseSequence
    dim: int
    meta: dict[str, str] = field(default_factory=dict)


def format_sequence(seq: PulseSequence, dim: int, meta: dict[str, object] | None = None) -> str:
    head = {"dim": dim, **(meta or {}), "pulses": len(seq)}
    lines = [MAGIC]
    lines += [f"# {k}: {v}" for k, v in head.items()]
    lines.append(f"# columns: {COLUMNS}")
    for k, (label, t) in enumerate(seq.pulses):
        lines.append(f"{k},{label},{time_to_ns(t):.17g},{t:.17g}")
    return "\n".join(lines) + "\n"


def write_sequence(path: str | Path, seq: PulseSequence, dim: int, meta: dict[str, object] | None = None) -> None:
    Path(path).write_text(format_sequence(seq, dim, meta), encoding="utf-8")


def parse_sequence(text: str, source: str = "<string>") -> SequenceFile:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise SequenceFormatError(f"{source}:1: missing header line {MAGIC!r}")
    meta: dict[str, str] = {}
    rows = []
    for no, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            key, sep, value = s[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        parts = s.split(",")
        if len(parts) != 4:
            raise SequenceFormatError(f"{source}:{no}: expected 4 comma-separated fields, got {len(parts)}")
        try:
            idx, label, t_au = int(parts[0]), parts[1].strip(), float(parts[3])
        except ValueError:
            raise SequenceFormatError(f"{source}:{no}: malformed row {s!r}") from None
        if idx != len(rows):
            raise SequenceFormatError(f"{source}:{no}: pulse index {idx}, expected {len(rows)}")
        rows.append((label, t_au))
    for key in ("dim", "pulses"):
        if key not in meta:
            raise SequenceFormatError(f"{source}: header has no '{key}' entry")
    try:
        dim, declared = int(meta["dim"]), int(meta["pulses"])
    except ValueError:
        raise SequenceFormatError(f"{source}: non-integer dim/pulses in header") from None
    if declared != len(rows):
        raise SequenceFormatError(f"{source}: header declares {declared} pulses but {len(rows)} rows were read (truncated file?)")
    try:
        seq = PulseSequence.from_labeled(rows)
    except ValueError as exc:
        raise SequenceFormatError(f"{source}: {exc}") from None
    return SequenceFile(seq, dim, meta)


def read_sequence(path: str | Path) -> SequenceFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SequenceFormatError(f"{p}: cannot read ({exc.strerror})") from None
    return parse_sequence(text, str(p))


def step_profile(seq: PulseSequence, level_a: float, level_b: float) -> np.ndarray:
    """Corner points ``(time_ns, level)`` of the piecewise-constant control."""
    pts = []
    t = 0.0
    for label, dt in seq.pulses:
        level = level_a if label == "A" else level_b
        t_ns = time_to_ns(t)
        t += dt
        pts.append((t_ns, level))
        pts.append((time_to_ns(t), level))
    return np.array(pts)


def write_table(path: str | Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        for r in rows:
            fh.write(" ".join(f"{x:.17g}" for x in r) + "\n")
