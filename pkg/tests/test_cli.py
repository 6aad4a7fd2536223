import numpy as np
import pytest

from otacomp import cli, design
from otacomp.codec import Codec
from otacomp.field import stacked, tabulate_function
from otacomp.sdp import ConvergenceError
from otacomp.sim import read_csv

SCEN = """K = 2
Q = 4
L = 4
snr_db = 15
trials = 40
codec = qam-conv
seed = 5
"""


@pytest.fixture
def files(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_ENV, raising=False)
    (tmp_path / "s.cfg").write_text(SCEN)
    (tmp_path / "b.cfg").write_text("L = 2\nK = 2\nepsilon = 0.5\ndelta = 0.1\n")
    tab = tabulate_function(stacked(["product", "max"]), 2, 3, 2)
    (tmp_path / "t.txt").write_text(tab.to_text())
    return tmp_path


def test_design_writes_codec(files):
    out = files / "c.json"
    assert cli.main(["design", "-f", str(files / "t.txt"), "-m", "exact", "-o", str(out)]) == 0
    codec = Codec.load(out)
    S = tabulate_function(stacked(["product", "max"]), 2, 3, 2)
    assert np.array_equal(codec.decode(codec.symbols(S.inputs).sum(axis=1)), S.values)


def test_simulate_seed_override_in_header(files):
    out = files / "o.csv"
    assert cli.main(["simulate", "-c", str(files / "s.cfg"), "-o", str(out), "--seed", "77"]) == 0
    meta, rows = read_csv(out)
    assert meta["seed"] == "77" and len(rows) == 1 and rows[0][3] == 40


def test_simulate_threads_identical(files):
    a, b = files / "a.csv", files / "b.csv"
    cli.main(["simulate", "-c", str(files / "s.cfg"), "-o", str(a), "--threads", "1"])
    cli.main(["simulate", "-c", str(files / "s.cfg"), "-o", str(b), "--threads", "4"])
    assert a.read_bytes() == b.read_bytes()


def test_output_dir_env(files, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(files / "outdir"))
    assert cli.main(["sweep", "--preset", "fig6", "--trials", "5"]) == 0
    names = sorted(p.name for p in (files / "outdir").iterdir())
    assert names == ["fig6-QAM16.csv", "fig6-QAM256.csv", "fig6-QAM64.csv"]


def test_bound(files, capsys):
    assert cli.main(["bound", "-c", str(files / "b.cfg")]) == 0
    out = dict(ln.split() for ln in capsys.readouterr().out.strip().splitlines())
    assert out["min_N_r"] == "613" and out["min_N_t"] == "2"


def test_check_eigen(files, capsys):
    p = files / "e.cfg"
    p.write_text("N_r = 400\nN_t = 2\ntrials = 20\n")
    assert cli.main(["check", "eigen", "-c", str(p)]) == 0
    assert capsys.readouterr().out.startswith("N_r,N_t,trials")


def test_check_tail(files, capsys):
    p = files / "t.cfg"
    p.write_text("K = 2\nQ = 4\nL = 2\nsnr_db = 0\ntrials = 100\ncodec = raw-sum\nseed = 1\n"
                 "N_r = 613\nN_t = 2\nepsilon = 0.5\ndelta = 0.1\n")
    assert cli.main(["check", "tail", "-c", str(p)]) == 0
    assert "p_total" in capsys.readouterr().out


def test_config_error_exit(files, capsys):
    p = files / "bad.cfg"
    p.write_text(SCEN + "N_r = 64\n")
    assert cli.main(["simulate", "-c", str(p)]) == 2
    assert "missing: N_t" in capsys.readouterr().err


def test_missing_file_exit(files):
    assert cli.main(["simulate", "-c", str(files / "nope.cfg")]) == 2


def test_bad_seed_exit(files):
    assert cli.main(["simulate", "-c", str(files / "s.cfg"), "--seed", "-3"]) == 2


def test_solver_failure_exit(files, monkeypatch):
    def boom(*a, **k):
        raise ConvergenceError("budget exhausted", None)
    monkeypatch.setattr(design, "solve_maxmin", boom)
    assert cli.main(["design", "-f", str(files / "t.txt"), "-o", str(files / "c.json")]) == 3


def test_design_failure_exit(files, monkeypatch):
    def degenerate(*a, **k):
        raise design.RoundingError("no separating candidate")
    monkeypatch.setattr(design, "extract_constellation", degenerate)
    assert cli.main(["design", "-f", str(files / "t.txt"), "-o", str(files / "c.json")]) == 4


def test_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
