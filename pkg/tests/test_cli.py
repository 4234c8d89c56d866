import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import make_rp2
from lmck import experiments, snf
from lmck.cli import main
from lmck.complex import write_complex


def run_dir(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    return Path(out[-1]), out


def results(path):
    name = "results.json" if (path / "results.json").exists() else "results.csv"
    return (path / name).read_bytes()


def test_sample_and_homology(tmp_path, capsys):
    f = tmp_path / "y.lmck"
    assert main(["sample", "--n", "7", "--d", "2", "--p", "0.5", "--seed", "4", "--out", str(f)]) == 0
    assert main(["homology", "--in", str(f), "--primes", "2,3", "--integer"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["cycle_dim"] == 15 and set(out["betti_mod"]) == {"2", "3"}


def test_rp2_homology(tmp_path, capsys):
    f = tmp_path / "rp2.lmck"
    f.write_text(write_complex(make_rp2()))
    assert main(["homology", "--in", str(f), "--primes", "2,3", "--integer"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["torsion"] == [2] and out["betti_mod"] == {"2": 1, "3": 0}
    assert out["is_zero_integer"] is False
    assert main(["reducing-set", "--in", str(f), "--q", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["size"] == 0


def test_exit_codes(tmp_path, capsys, monkeypatch):
    assert main(["sample", "--n", "3", "--d", "3", "--p", "0.5", "--seed", "1"]) == 2
    assert main(["certify-z", "--n", "6", "--d", "2", "--p", "0.7", "--seed", "1", "--out-dir", str(tmp_path)]) == 2
    bad = tmp_path / "bad.lmck"
    bad.write_text("garbage\n")
    assert main(["homology", "--in", str(bad)]) == 2
    f = tmp_path / "rp2.lmck"
    f.write_text(write_complex(make_rp2()))
    monkeypatch.setattr(snf, "DENSE_BUDGET", 5)
    assert main(["homology", "--in", str(f), "--integer"]) == 3
    monkeypatch.undo()
    monkeypatch.setattr(experiments, "hadamard_column_bound", lambda Y, rank=None: 0)
    assert main(["census", "--n", "6", "--d", "2", "--p", "0.6", "--trials", "1", "--seed", "1",
                 "--out-dir", str(tmp_path)]) == 4
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["process", "--n", "6", "--d", "2", "--q", "3", "--seed", "5"],
    ["mtilde", "--n", "7", "--d", "2", "--q", "2", "--trials", "30", "--seed", "5"],
    ["sweep", "--n", "9", "--d", "2", "--c-min", "1", "--c-max", "3", "--c-step", "1",
     "--coeff", "2,Q,Z", "--trials", "6", "--seed", "5"],
    ["census", "--n", "8", "--d", "2", "--c", "2", "--trials", "4", "--seed", "5"],
    ["certify-z", "--n", "10", "--d", "2", "--c", "1.5", "--trials", "4", "--seed", "5", "--check"],
    ["face-count", "--n", "12", "--d", "2", "--p", "0.3", "--trials", "5", "--seed", "5"],
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_replay_byte_identical(tmp_path, capsys, argv, fmt):
    assert main(argv + ["--threads", "1", "--format", fmt, "--out-dir", str(tmp_path / "a")]) == 0
    first, _ = run_dir(capsys)
    assert main(["replay", str(first / "manifest.json"), "--threads", "2", "--format", fmt,
                 "--out-dir", str(tmp_path / "b")]) == 0
    second, _ = run_dir(capsys)
    assert results(first) == results(second)
    assert json.loads((first / "timing.json").read_text())["wall_time"] >= 0
    if fmt == "json":
        json.loads(results(first))


def test_certify_caveat(tmp_path, capsys):
    assert main(["certify-z", "--n", "6", "--d", "2", "--p", "0", "--seed", "1", "--out-dir", str(tmp_path)]) == 0
    _, out = run_dir(capsys)
    assert any("not evidence" in line for line in out)


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "lmck.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "lmck" in out.stdout
