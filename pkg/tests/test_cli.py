import json
import shutil
import subprocess

import numpy as np
import pytest

from nonholo.cli import main
from nonholo.config import default_config_text
from nonholo.seqio import read_sequence

COMMUTING = """
[system.explicit]
h_a_real = [[1, 0], [0, 2]]
h_b_real = [[3, 0], [0, 5]]
[problem]
target = "identity"
"""


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synthesize", "--out", str(out), "--seed", "0"]) == 0
    return out


def test_check_default(tmp_path):
    assert main(["check", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "controllability.json").read_text())
    assert rep["fully_controllable"] and rep["lie_rank"] == 16
    fields = sorted(c["field"] for c in rep["bare_crossings_V_per_cm"])
    assert fields == pytest.approx([80.5, 84.4, 88.8], abs=rep["grid_step_V_per_cm"])
    assert (tmp_path / "stark_diagram.dat").exists()


def test_check_commuting_exit_1(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(COMMUTING)
    assert main(["check", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "controllability.json").read_text())["lie_rank"] < 4


def test_malformed_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[system.rydberg\nR = 1")
    assert main(["check", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "bad.toml" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["check", "--config", str(tmp_path / "none.toml"), "--out", str(tmp_path)]) == 2


def test_identity_command(tmp_path):
    assert main(["identity", "--out", str(tmp_path)]) == 0
    sf = read_sequence(tmp_path / "identity_sequence.txt")
    assert len(sf.sequence) == 16
    assert json.loads((tmp_path / "identity_root.json").read_text())["identity_fidelity"] >= 1 - 1e-8


def test_synthesize_output(synth_dir):
    summary = json.loads((synth_dir / "synthesis.json").read_text())
    sf = read_sequence(synth_dir / "sequence.txt")
    assert len(sf.sequence) == summary["n_star"] * 16
    assert min(sf.sequence.durations) >= 0
    assert summary["achieved_fidelity"] >= 0.9999
    prof = np.loadtxt(synth_dir / "control_profile.dat")
    assert set(np.unique(prof[:, 1])) == {84.85, 87.42}


def test_synthesize_identity_target(tmp_path):
    cfg = tmp_path / "id.toml"
    cfg.write_text(default_config_text().replace('target = "cnot"', 'target = "identity"'))
    assert main(["synthesize", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert len(read_sequence(tmp_path / "sequence.txt").sequence) == 16
    assert json.loads((tmp_path / "synthesis.json").read_text())["achieved_fidelity"] >= 1 - 1e-8


def test_unreachable_goal_exit_1(tmp_path):
    cfg = tmp_path / "goal.toml"
    cfg.write_text(default_config_text().replace("fidelity_goal = 0.99999999", "fidelity_goal = 1.0"))
    assert main(["synthesize", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_roundtrip_verify(synth_dir, tmp_path):
    assert main(["verify", "--sequence", str(synth_dir / "sequence.txt"), "--out", str(tmp_path)]) == 0
    ver = json.loads((tmp_path / "verification.json").read_text())
    syn = json.loads((synth_dir / "synthesis.json").read_text())
    assert abs(ver["fidelity"] - syn["achieved_fidelity"]) <= 1e-10
    assert ver["jitter_curve"][0]["mean_fidelity"] == ver["fidelity"]
    assert (tmp_path / "jitter.dat").exists()


def test_determinism(synth_dir, tmp_path):
    assert main(["synthesize", "--out", str(tmp_path), "--seed", "0"]) == 0
    for name in ("sequence.txt", "elementary.txt", "synthesis.json", "control_profile.dat"):
        assert (tmp_path / name).read_bytes() == (synth_dir / name).read_bytes()


def test_verify_input_errors(synth_dir, tmp_path):
    assert main(["verify", "--out", str(tmp_path)]) == 2
    truncated = tmp_path / "trunc.txt"
    truncated.write_text("\n".join((synth_dir / "sequence.txt").read_text().splitlines()[:-3]) + "\n")
    assert main(["verify", "--sequence", str(truncated), "--out", str(tmp_path)]) == 2
    wrong_dim = tmp_path / "dim.txt"
    wrong_dim.write_text((synth_dir / "sequence.txt").read_text().replace("# dim: 4", "# dim: 3"))
    assert main(["verify", "--sequence", str(wrong_dim), "--out", str(tmp_path)]) == 2


def test_verify_wrong_gate_exit_1(synth_dir, tmp_path):
    cfg = tmp_path / "id.toml"
    cfg.write_text(default_config_text().replace('target = "cnot"', 'target = "identity"'))
    assert main(["verify", "--config", str(cfg), "--sequence", str(synth_dir / "sequence.txt"), "--out", str(tmp_path)]) == 1


def test_plots(synth_dir, tmp_path):
    pytest.importorskip("matplotlib")
    cfg = tmp_path / "plots.toml"
    cfg.write_text(default_config_text().replace("plots = false", "plots = true"))
    assert main(["check", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert main(["verify", "--config", str(cfg), "--sequence", str(synth_dir / "sequence.txt"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "stark_diagram.svg").stat().st_size > 0
    assert (tmp_path / "jitter.svg").stat().st_size > 0


def test_argparse_errors():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


@pytest.mark.skipif(shutil.which("nonholo-ctl") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["nonholo-ctl", "check", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "fully_controllable=True" in proc.stdout
