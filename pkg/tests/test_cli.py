import json

import numpy as np
import pytest

from dftatoms import cli, dmf, numerics as nm, verify
from dftatoms.errors import SolverError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tf_solve_json(capsys):
    code, out, _ = run(capsys, "tf", "solve", "--z", "1")
    assert code == 0
    d = json.loads(out)
    assert d["energy_hartree"] == pytest.approx(-0.7687, abs=1e-3)
    assert set(d) >= {"Z", "N", "energy_hartree", "mass", "residual", "profile"}
    assert set(d["profile"][0]) == {"r", "rho", "phi"}


def test_floats_have_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "appendix", "infimum", "--gamma", "1", "--z", "1")
    text = json.dumps(json.loads(out)["infimum"])
    assert len(text.lstrip("-").replace(".", "").lstrip("0")) <= 12


def test_tf_solve_csv_to_file(capsys, tmp_path):
    path = tmp_path / "tf.csv"
    code, out, _ = run(capsys, "tf", "solve", "--z", "2", "--out", "csv", "--output", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("r,rho,phi\n")


def test_usage_errors_exit_64(capsys):
    assert run(capsys, "tf", "solve")[0] == 64
    assert run(capsys, "tf", "solve", "--z", "-2")[0] == 64
    assert run(capsys, "bogus")[0] == 64
    assert run(capsys, "dmf", "minimize", "--problem", "/nonexistent.json", "--n", "2")[0] == 64
    assert run(capsys, "verify", "--suite", "nosuchmodule")[0] == 64


def test_invalid_input_exit_64(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps(dmf.random_problem(4, seed=1).to_dict()))
    assert run(capsys, "fock", "fci", "--problem", str(p), "--n", "9")[0] == 64


def test_solver_error_exit_1(capsys, monkeypatch):
    def boom(*a, **k):
        raise SolverError("no bracket", slope=0.0)

    monkeypatch.setattr(cli.tf, "solve_tf_neutral", boom)
    code, _, err = run(capsys, "tf", "solve", "--z", "1")
    assert code == 1 and "solver error" in err


def test_verification_failure_exit_2(capsys, monkeypatch):
    fake = {"schema": 1, "suite": "all", "seed": 0, "summary": {"pass": 0, "fail": 1, "observational": 0},
            "records": []}
    monkeypatch.setattr(cli.verify, "run_suite", lambda *a: fake)
    assert run(capsys, "verify")[0] == 2


def test_verify_module_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "fock", "--seed", "3")
    d = json.loads(out)
    assert code == 0 and d["schema"] == 1
    assert [r["name"] for r in d["records"]] == sorted(r["name"] for r in d["records"])
    assert all(r["runtime_ms"] == 0 for r in d["records"])


def test_dmf_and_fock_commands(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps(dmf.random_problem(4, seed=1).to_dict()))
    _, out, _ = run(capsys, "dmf", "minimize", "--problem", str(p), "--n", "2")
    e_hf = json.loads(out)["energy"]
    _, out, _ = run(capsys, "fock", "fci", "--problem", str(p), "--n", "2")
    assert e_hf >= json.loads(out)["energy"] - 1e-9
    _, out, _ = run(capsys, "fock", "rdm", "--problem", str(p), "--n", "2")
    assert json.loads(out)["trace"] == pytest.approx(2.0, abs=1e-12)
    g = tmp_path / "g.json"
    g.write_text(json.dumps(np.diag([1.0, 1.0, 0.0, 0.0]).tolist()))
    _, out, _ = run(capsys, "dmf", "eval", "--problem", str(p), "--gamma", str(g))
    d = json.loads(out)
    assert d["hf"] == pytest.approx(d["mueller"], abs=1e-10)


def test_density_commands(capsys, tmp_path, grid):
    r = grid.nodes
    path = tmp_path / "rho.csv"
    path.write_text(nm.RadialDensity(grid, np.exp(-2 * r) / np.pi).to_csv())
    code, out, _ = run(capsys, "ed", "eval", "--density", str(path), "--z", "1")
    assert code == 0 and json.loads(out)["terms"]["nuclear"] == pytest.approx(-1.0, rel=1e-6)
    x = np.linspace(-10, 10, 801)
    rho = 2 * np.exp(-(x**2)) / np.sqrt(np.pi)
    line = tmp_path / "line.csv"
    line.write_text("x,rho\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(x, rho)))
    _, out, _ = run(capsys, "macke", "bound", "--density", str(line))
    d = json.loads(out)
    assert d["N"] == 2 and d["direct_kinetic"] == pytest.approx(d["bound"], abs=1e-6)
    _, out, _ = run(capsys, "macke", "build", "--density", str(line))
    assert out.startswith("x,re_phi0,im_phi0,re_phi1,im_phi1\n")


def test_kernel_table(capsys):
    _, out, _ = run(capsys, "ed", "kernels", "--t", "0.001", "1")
    assert out.splitlines()[0] == "t,f2,ttf,x" and len(out.splitlines()) == 3


def test_tfw_critical(capsys):
    _, out, _ = run(capsys, "tfw", "critical", "--z", "1", "--lambda", "0.2")
    d = json.loads(out)
    assert 1 < d["n_lower"] < d["n_upper"] <= 1.82


def test_phasespace_and_appendix(capsys):
    _, out, _ = run(capsys, "phasespace", "englert", "--z", "1")
    assert json.loads(out)["energy_hartree"] == pytest.approx(-0.7687, rel=0.02)
    _, out, _ = run(capsys, "phasespace", "reduce", "--z", "1", "--out", "csv", "--marginal", "momentum")
    assert out.startswith("p,tau\n")
    _, out, _ = run(capsys, "appendix", "maximal", "--alpha", "1.5", "--d", "3", "--x", "2")
    assert json.loads(out)["constant"] == pytest.approx(1.14644, abs=1e-4)
