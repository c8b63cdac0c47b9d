import json
import subprocess
import sys

import numpy as np
import pytest

from mgcdiff import MgcContext, gmm_load, select_truncation
from mgcdiff.cli import main
from mgcdiff.experiments import sample_two_squares
from mgcdiff.gmm import write_points


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_points("pts.csv", sample_two_squares(200, 1))
    assert main(["fit", "--data", "pts.csv", "--components", "10", "--tied", "--seed", "7",
                 "--out", "model.json"]) == 0
    return tmp_path


def test_fit_deterministic(workdir):
    assert main(["fit", "--data", "pts.csv", "--components", "10", "--tied", "--seed", "7",
                 "--out", "again.json"]) == 0
    assert (workdir / "again.json").read_bytes() == (workdir / "model.json").read_bytes()
    assert gmm_load("model.json").tied


def test_embed_rows(workdir):
    assert main(["embed", "--model", "model.json", "--epsilon", "1", "--l", "8",
                 "--data", "pts.csv", "--out", "emb.csv"]) == 0
    emb = np.loadtxt("emb.csv", delimiter=",", skiprows=1)
    assert emb.shape == (200, 511)
    assert json.loads((workdir / "emb.csv.json").read_text())["order"] == 8


def test_select_l_matches_library(workdir, capsys):
    assert main(["select-l", "--model", "model.json", "--epsilon", "1", "--zeta", "0.1",
                 "--nu-min", "1e-3", "--radius", "5.7"]) == 0
    doc = json.loads(capsys.readouterr().out)
    ref = select_truncation(MgcContext(gmm_load("model.json"), 1.0), 0.1, 1e-3, 5.7)
    assert doc["l_max"] == ref.l_max and doc["eta"] == ref.eta


def test_nu_dist_bound(workdir, capsys):
    write_points("few.csv", sample_two_squares(3, 2))
    assert main(["nu", "--model", "model.json", "--epsilon", "1", "--data", "few.csv"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "nu"
    assert main(["dist", "--model", "model.json", "--epsilon", "16", "--data", "few.csv"]) == 0
    closed = np.loadtxt(capsys.readouterr().out.splitlines(), delimiter=",")
    assert main(["dist", "--model", "model.json", "--epsilon", "16", "--data", "few.csv", "--l", "14"]) == 0
    emb = np.loadtxt(capsys.readouterr().out.splitlines(), delimiter=",")
    np.testing.assert_allclose(emb, closed, atol=1e-6)
    assert main(["bound", "--model", "model.json", "--epsilon", "1", "--l", "3", "--nu-min", "1e-3"]) == 0
    assert json.loads(capsys.readouterr().out)["eta"] > 0


def test_trp(tmp_path, capsys):
    np.savetxt(tmp_path / "a.csv", np.eye(2), delimiter=",")
    np.savetxt(tmp_path / "b.csv", [[1.0, 0.0]], delimiter=",")
    assert main(["trp", "--a", str(tmp_path / "a.csv"), "--b", str(tmp_path / "b.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(4.0)


def test_example1_env_out(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MGCDIFF_OUT", str(tmp_path / "env"))
    assert main(["example1", "--samples", "500", "--components", "4"]) == 0
    assert (tmp_path / "env" / "example1_error.csv").exists()
    assert "sup_rel_error" in json.loads(capsys.readouterr().out)


def test_example2_small(tmp_path):
    assert main(["example2", "--samples", "200", "--epsilons", "2,8", "--orders", "1,4",
                 "--pairs", "100", "--extreme", "5", "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "example2.csv").read_text().splitlines()) == 5


def test_exit_codes(workdir, capsys):
    assert main(["fit", "--bogus"]) == 64
    assert main(["fit", "--data", "missing.csv", "--components", "2", "--out", "m.json"]) == 66
    assert main(["embed", "--model", "model.json", "--epsilon", "-1", "--l", "2",
                 "--data", "pts.csv"]) == 2
    write_points("far.csv", [[500.0, 500.0]])
    assert main(["nu", "--model", "model.json", "--epsilon", "1", "--data", "far.csv"]) == 0
    assert main(["embed", "--model", "model.json", "--epsilon", "1", "--l", "2",
                 "--data", "far.csv", "--out", "x.csv"]) == 3
    assert main(["example2", "--samples", "0"]) == 2
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mgcdiff", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "example2" in out.stdout


def test_bound_violation_exit_code(tmp_path, monkeypatch):
    import mgcdiff.experiments as exp
    monkeypatch.setattr(exp, "bound_eta", lambda *a, **k: 0.0)
    assert main(["example2", "--samples", "200", "--epsilons", "1", "--orders", "1",
                 "--pairs", "50", "--extreme", "5", "--out", str(tmp_path)]) == 4
