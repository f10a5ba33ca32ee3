import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from magring import cli
from magring.circle import Grid


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_mu_curve_switch(capsys, tmp_path):
    code, out, _ = run(capsys, "mu-curve", "--a", "0.45", "--p", "4", "--alpha-min", "-0.2",
                       "--alpha-max", "0.2", "--steps", "9")
    assert code == 0
    table = rows(out)
    assert len(table) == 9
    for r in table:
        branch = "constant" if float(r["alpha"]) <= -0.1075 else "nonconstant"
        assert r["branch"] == branch
        if branch == "constant":
            assert r["mu_branch"] == ""
    target = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "mu-curve", "--a", "0.45", "--p", "4", "--alpha-min", "-0.2",
                       "--alpha-max", "0.2", "--steps", "9", "-o", str(target))
    assert code == 0 and out == ""
    assert rows(target.read_text()) == table


def test_bifurcation(capsys):
    code, out, _ = run(capsys, "bifurcation", "--a", "0.2", "--p", "4")
    assert code == 0
    (r,) = rows(out)
    assert float(r["alpha_star_formula"]) == pytest.approx(0.38)
    assert float(r["discrepancy"]) <= 1e-3


def test_nu(capsys):
    code, out, _ = run(capsys, "nu", "--p", "4", "--alpha", "0")
    assert code == 0
    assert float(out) == pytest.approx(0.201091665960, abs=1e-11)


def test_klt(capsys):
    code, out, _ = run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi", "0.3")
    assert code == 0
    (r,) = rows(out)
    assert abs(float(r["margin"])) <= 1e-8
    assert r["closed_form"] == "true"
    code, out, _ = run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi", "1,0.5", "--cutoff", "64")
    assert code == 0 and float(rows(out)[0]["margin"]) >= -1e-8


def test_phi_file(capsys, tmp_path):
    g = Grid(64)
    path = tmp_path / "phi.csv"
    lines = ["s,phi"] + [f"{float(s)!r},{float(1 + 0.5 * np.cos(s))!r}" for s in g.nodes]
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi-file", str(path), "--grid-n", "64")
    assert code == 0
    code2, out2, _ = run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi", "1,0.5", "--grid-n", "64")
    assert float(rows(out)[0]["lambda1"]) == pytest.approx(float(rows(out2)[0]["lambda1"]), abs=1e-10)
    code, _, err = run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi-file", str(path))
    assert code == 2 and "512" in err


def test_hardy(capsys):
    code, out, _ = run(capsys, "hardy", "--a", "0.3", "--p", "4", "--phi", "0.05")
    assert code == 0
    (r,) = rows(out)
    assert float(r["tau"]) == pytest.approx(1.8, abs=1e-8)
    assert r["closed_form"] == "true"


def test_profile(capsys, tmp_path):
    target = tmp_path / "u.csv"
    code, _, err = run(capsys, "profile", "--a", "0.45", "--p", "4", "--alpha", "0",
                       "--grid-n", "64", "-o", str(target))
    assert code == 0 and "branch=nonconstant" in err
    main = np.loadtxt(target, delimiter=",", skiprows=1)
    limit = np.loadtxt(tmp_path / "u_limit.csv", delimiter=",", skiprows=1)
    assert main.shape == limit.shape == (64, 2)
    np.testing.assert_allclose(main[:, 0], Grid(64).nodes, atol=1e-11)
    assert np.all(main[:, 1] > 0)
    assert limit[0, 1] == 0.0


def test_usage_errors(capsys):
    assert run(capsys, "nu", "--p", "4", "--alpha", "-0.3")[0] == 2
    assert run(capsys, "mu-curve", "--a", "0.3", "--p", "1.5", "--alpha-min", "0",
               "--alpha-max", "1", "--steps", "3")[0] == 2
    assert run(capsys, "klt", "--a", "0.2", "--p", "4")[0] == 2
    assert run(capsys, "klt", "--a", "0.2", "--p", "4", "--phi", "x")[0] == 2
    assert run(capsys, "profile", "--a", "0.3", "--p", "4", "--alpha", "1", "--grid-n", "100")[0] == 2
    with pytest.raises(SystemExit):
        cli.main(["nonsense"])


def test_numeric_failure_exit(capsys, monkeypatch):
    from magring import shooting

    def boom(*a, **k):
        raise shooting.ConvergenceError("no convergence", [1e-3, 1e-4])

    monkeypatch.setattr(shooting, "bifurcation_alpha", boom)
    code, _, err = run(capsys, "bifurcation", "--a", "0.2", "--p", "4")
    assert code == 3 and "last residuals" in err


def test_deterministic_output():
    argv = [sys.executable, "-m", "magring", "mu-curve", "--a", "0.2", "--p", "4",
            "--alpha-min", "0", "--alpha-max", "1", "--steps", "5"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"alpha,")
