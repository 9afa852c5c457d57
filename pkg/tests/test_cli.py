"""CLI subcommands, exit codes, and byte-level output determinism."""
from __future__ import annotations

import subprocess
import sys

import pytest

from superldpc.cli import main

CFG = """
[scenario]
kind = sm
ell = 2
[code]
regular = 48 3 6 5
[signaling]
style = constant
ratios = method2(1.2)
[run]
algorithm = dc
snr_db = 2.0
max_trials = 64
min_frame_errors = 4
k_max = 4
i_max = 20
"""


@pytest.fixture()
def cfg_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = tmp_path / "quick.cfg"
    path.write_text(CFG)
    return path


def test_check_command(cfg_path, capsys):
    assert main(["check", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "sm" in out and "dc" in out


def test_check_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(CFG.replace("kind = sm", "kind = qam"))
    assert main(["check", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err


def test_missing_config_is_a_config_error(tmp_path, capsys):
    assert main(["check", str(tmp_path / "nope.cfg")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_simulate_writes_default_prefix(cfg_path, capsys):
    assert main(["simulate", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "snr_db=2" in out
    assert "wrote quick_dc.csv and quick_dc.dat" in out
    csv_text = (cfg_path.parent / "quick_dc.csv").read_text()
    assert csv_text.startswith("scenario,algorithm,")
    assert (cfg_path.parent / "quick_dc.dat").exists()


def test_simulate_repeats_byte_identical(cfg_path, capsys, monkeypatch):
    assert main(["simulate", str(cfg_path)]) == 0
    first = (cfg_path.parent / "quick_dc.csv").read_bytes()
    assert main(["simulate", str(cfg_path)]) == 0
    assert (cfg_path.parent / "quick_dc.csv").read_bytes() == first
    monkeypatch.setenv("SUPERLDPC_THREADS", "3")
    assert main(["simulate", str(cfg_path)]) == 0
    assert (cfg_path.parent / "quick_dc.csv").read_bytes() == first
    capsys.readouterr()


def test_simulate_honors_out_key(cfg_path, tmp_path, capsys):
    path = tmp_path / "named.cfg"
    path.write_text(CFG + f"out = {tmp_path}/results/run1\n")
    assert main(["simulate", str(path)]) == 0
    assert (tmp_path / "results" / "run1_dc.csv").exists()
    capsys.readouterr()


def test_oracle_command(cfg_path, capsys):
    assert main(["oracle", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("ok") == 3
    assert "FAIL" not in out
    assert "tree code" in out


def test_console_script_entry_point(cfg_path):
    proc = subprocess.run([sys.executable, "-m", "superldpc.cli", "check",
                           str(cfg_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sm" in proc.stdout
