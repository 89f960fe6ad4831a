import math

import numpy as np
import pytest

from modbound import cli, csvio
from modbound.config import ConfigError, format_defaults, parse_config, parse_grid
from modbound.errors import EvaluationError
from modbound.scenarios import ZenerScenario


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_config_roundtrip():
    cfg = parse_config("""
        # comment
        scenario = zener
        lambda = 0.7   # trailing comment
        gamma = 2
        steps = 5000
        lambda_grid = 0:1:11
        out = -
    """)
    assert cfg.scenario == "zener"
    assert cfg.parameters["lambda"] == 0.7 and cfg.parameters["gamma"] == 2.0
    assert cfg.numerics["steps"] == 5000
    assert cfg.parameters["lambda_grid"].size == 11
    assert cfg.out == "-"


@pytest.mark.parametrize("text", [
    "colour = red", "scenario = other", "lambda = nan", "steps = 0", "steps = 1.5",
    "k1 = 1\nk1 = 2", "just text", "gamma = -1", "lambda = -0.1", "fd_h = 0",
    "format_version = 9", "s0 = 1\ns1 = 0", "psi_i = 0,0,0", "psi_p = 1,0", "eps = inf",
])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_parse_grid():
    np.testing.assert_array_equal(parse_grid("0:5:501"), np.linspace(0, 5, 501))
    np.testing.assert_array_equal(parse_grid("0.1, 0.2,0.5"), [0.1, 0.2, 0.5])
    for bad in ("1:0:3", "0.2,0.1", "0:1", "", "-1:1:3", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_csv_format(tmp_path):
    path = tmp_path / "r.csv"
    csvio.write("sweep", [(0.1, 1 / 3, -2.0, math.pi, 1e-300, 0.5)], str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# modbound schema=sweep version=1 units:")
    assert lines[1] == "lambda,T,dT_dlambda,bound,approx,ratio"
    assert lines[2].split(",")[1] == "0.33333333333333331"
    schema, header, rows = csvio.read(path)
    assert schema == "sweep" and header == csvio.columns("sweep")
    assert rows[0][1] == 1 / 3 and rows[0][3] == math.pi
    with pytest.raises(ValueError):
        csvio.render("report", [(1, 2)])


def test_show_defaults(capsys):
    for argv in (["--show-defaults"], ["sweep", "--show-defaults"]):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        assert out.strip() == format_defaults()
    assert "lambda_grid" in format_defaults() and "0:5:501" in format_defaults()


def test_simulate_zener(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "simulate", "--scenario", "zener", "--lambda", "5", "--out", str(path))
    assert code == 0
    _, header, rows = csvio.read(path)
    assert header == ["s", "p1", "p2", "p3", "k1", "k2", "k3"]
    rows = np.array(rows)
    assert rows.shape == (400, 7)
    np.testing.assert_allclose(np.linalg.norm(rows[:, 1:4], axis=1), 1.0, atol=1e-8)
    assert out.strip() == f"T = {csvio.fmt(ZenerScenario(1.0, 5.0).transmission())}"


def test_simulate_linear_eps0_is_static(capsys, tmp_path):
    path = tmp_path / "t.csv"
    assert run(capsys, "simulate", "--out", str(path))[0] == 0
    rows = np.array(csvio.read(path)[2])
    np.testing.assert_allclose(rows[:, 1:4], np.tile([0.0, 1.0, 0.0], (len(rows), 1)), atol=1e-15)


def test_simulate_stdout(capsys):
    code, out, err = run(capsys, "simulate", "--out", "-", "--eps", "0.2")
    assert code == 0
    assert out.startswith("# modbound schema=trajectory")
    assert err.startswith("T = ")


def test_respond_example1(capsys, tmp_path):
    path = tmp_path / "r.csv"
    assert run(capsys, "respond", "--eps", "0", "--out", str(path))[0] == 0
    _, header, rows = csvio.read(path)
    rep = dict(zip(header, rows[0]))
    assert abs(rep["saturation_ratio"] - 1.0) <= 1e-3
    assert rep["T0"] == pytest.approx(0.5, abs=1e-12)


def test_respond_zero_perturbation_table(capsys, tmp_path):
    table = tmp_path / "tab.csv"
    table.write_text("s,base_k0,base_k1,base_k2,base_k3,pert_k0,pert_k1,pert_k2,pert_k3\n"
                     "0,0.3,1,0,0,0,0,0,0\n0.5,0,0.4,0.2,0,0,0,0,0\n1,0,0,1,0.5,0,0,0,0\n")
    cfg = tmp_path / "c.txt"
    cfg.write_text(f"scenario = custom_tabulated\ntable = {table}\neps = 0.05\n")
    path = tmp_path / "r.csv"
    assert run(capsys, "respond", "--config", str(cfg), "--out", str(path))[0] == 0
    rep = dict(zip(csvio.columns("report"), csvio.read(path)[2][0]))
    assert rep["dT_deps"] == 0.0
    assert rep["bound_schwartz"] == 0.0 and rep["bound_pauli"] == 0.0
    assert rep["saturation_ratio"] == 0.0


def test_respond_zener_near_peak(capsys, tmp_path):
    path = tmp_path / "r.csv"
    assert run(capsys, "respond", "--scenario", "zener", "--out", str(path))[0] == 0
    rep = dict(zip(csvio.columns("report"), csvio.read(path)[2][0]))
    assert 0.95 <= rep["saturation_ratio"] < 1.0
    assert rep["eps_used"] == 0.695


def test_respond_optimal_polarizer(capsys, tmp_path):
    code, out, _ = run(capsys, "respond", "--eps", "0.1", "--optimal-polarizer", "--out", str(tmp_path / "r.csv"))
    assert code == 0
    assert "optimal psi_p" in out
    value = float(out.split("optimal |dT/deps| = ")[1].split()[0])
    assert value == pytest.approx(math.sin(0.1) / 0.1, abs=1e-8)


def test_exit_degenerate(capsys, tmp_path):
    code, _, err = run(capsys, "respond", "--eps", "0", "--optimal-polarizer", "--out", str(tmp_path / "r.csv"))
    assert code == 4 and "degenerate" in err


def test_verify_linear_and_seed(capsys, tmp_path):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    ratio = float(out.split("expansion_ratio = ")[1].split()[0])
    assert 0.98 <= ratio <= 1.02
    cfg = tmp_path / "c.txt"
    cfg.write_text("scenario = custom_tabulated\nseed = 7\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0
    assert "PASS  schwartz_le_pauli" in out and "PASS  unitarity_residual" in out
    assert "FAIL" not in out


def test_exit_verification_failure(capsys):
    code, out, err = run(capsys, "verify", "--eps", "1.0")
    assert code == 5
    assert "FAIL  expansion_ratio" in out and "expansion_ratio" in err


@pytest.mark.parametrize("argv", [
    ["simulate", "--steps", "0"],
    ["simulate", "--config", "/nonexistent/cfg"],
    ["sweep"],
    ["sweep", "--scenario", "zener", "--lambda-grid", "1:0:3"],
    ["respond", "--scenario", "zener", "--optimal-polarizer"],
    ["simulate", "--scenario", "custom_tabulated"],
    [],
])
def test_exit_config(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--bogus"])
    assert exc.value.code == 2


def test_exit_numerics(capsys, monkeypatch):
    def boom(*a, **k):
        raise EvaluationError("profile returned nan", s=0.25)
    monkeypatch.setattr(cli, "propagate", boom)
    code, _, err = run(capsys, "simulate", "--out", "-")
    assert code == 3 and "0.25" in err


def test_sweep_small_grid(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("MODBOUND_WORKERS", raising=False)
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--scenario", "zener", "--lambda-grid", "0:1.5:7", "--out", str(path))
    assert code == 0
    _, header, rows = csvio.read(path)
    assert header == ["lambda", "T", "dT_dlambda", "bound", "approx", "ratio"]
    assert len(rows) == 7
    assert rows[0][1] == 1.0
    assert all(r[5] <= 1.001 for r in rows)


def test_bad_workers_env(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("MODBOUND_WORKERS", "zero")
    code, _, _ = run(capsys, "sweep", "--scenario", "zener", "--lambda-grid", "0,1", "--out", str(tmp_path / "s.csv"))
    assert code == 2
