import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from srkinetics.io import read_csv

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def run(name, tmp_path, *args):
    res = subprocess.run([sys.executable, str(SCRIPTS / name), "--out", str(tmp_path), *args],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0, res.stderr
    return res.stdout


def test_power_two_emitters(tmp_path):
    run("power_two_emitters.py", tmp_path, "--points", "101")
    _, cols, data = read_csv((tmp_path / "power_two_emitters_g0.csv").read_text())
    assert cols == ["t_gr", "power", "baseline", "addition"] and data.shape == (101, 4)
    assert data[0, 1] == 2


def test_rqe_curves(tmp_path):
    out = run("rqe_curves.py", tmp_path, "--points", "41")
    assert "N=2 max R=1.085786" in out
    _, _, data = read_csv((tmp_path / "rqe_n3.csv").read_text())
    assert np.all(data[:, 3] >= 1 - 1e-12)


def test_power_three_emitters(tmp_path):
    run("power_three_emitters.py", tmp_path, "--points", "51", "--ratio", "0.5")
    meta, cols, data = read_csv((tmp_path / "power_three_emitters.csv").read_text())
    assert meta["ratio"] == "0.5" and "Ws(3,2)" in cols and data.shape[0] == 51


def test_headline_numbers(tmp_path):
    run("headline_numbers.py", tmp_path, "--trajectories", "20000")
    doc = json.loads((tmp_path / "headline.json").read_text())
    assert doc["n2"]["r_star"] == pytest.approx(doc["closed_form_max_r2"], abs=1e-9)
    assert doc["pump_g1_gp1"]["efficiency"] == pytest.approx(0.52)


def test_plots(tmp_path):
    pytest.importorskip("matplotlib")
    run("rqe_curves.py", tmp_path, "--points", "21", "--plot")
    assert (tmp_path / "rqe.png").stat().st_size > 0
