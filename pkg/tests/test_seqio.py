import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonholo.seqio import MAGIC, SequenceFormatError, format_sequence, parse_sequence, step_profile
from nonholo.synth import PulseSequence
from nonholo.units import time_to_ns


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e9, allow_nan=False, allow_infinity=False), max_size=40))
def test_roundtrip_is_lossless(durations):
    seq = PulseSequence(tuple(durations))
    back = parse_sequence(format_sequence(seq, 4, {"n_star": 2}))
    assert back.sequence.durations == seq.durations
    assert back.dim == 4 and back.meta["n_star"] == "2"


def test_layout():
    text = format_sequence(PulseSequence((1.0, 2.5)), 4)
    lines = text.splitlines()
    assert lines[0] == MAGIC
    assert lines[-2].startswith("0,A,") and lines[-1].startswith("1,B,")
    assert lines[-1].split(",")[3] == "2.5"


@pytest.mark.parametrize(
    "edit",
    [
        lambda t: t.replace(MAGIC, "# something else"),
        lambda t: "\n".join(t.splitlines()[:-1]) + "\n",
        lambda t: t.replace("1,B,", "1,A,"),
        lambda t: t.replace("1,B,", "5,B,"),
        lambda t: t.replace("# dim: 4\n", ""),
        lambda t: t + "2,A,1\n",
        lambda t: t.replace("1,B,", "1,B,x,"),
        lambda t: t.replace(",2.5", ",-2.5"),
    ],
)
def test_malformed(edit):
    with pytest.raises(SequenceFormatError):
        parse_sequence(edit(format_sequence(PulseSequence((1.0, 2.5, 3.0)), 4)))


def test_step_profile():
    pts = step_profile(PulseSequence((1e7, 2e7)), 87.42, 84.85)
    assert pts.shape == (4, 2)
    assert np.allclose(pts[:, 1], [87.42, 87.42, 84.85, 84.85])
    assert pts[1, 0] == pts[2, 0] == pytest.approx(time_to_ns(1e7))
