import json
import subprocess
import sys

import pytest

from ortheta.checks import REGISTRY
from ortheta.cli import run


def cli(*args, timeout=600):
    p = subprocess.run([sys.executable, "-m", "ortheta", *args], capture_output=True, text=True, timeout=timeout)
    return p.returncode, p.stdout, p.stderr


@pytest.fixture
def a1(tmp_path):
    path = tmp_path / "a1.json"
    path.write_text(json.dumps({"name": "A1", "gram": [[2]]}))
    return str(path)


@pytest.fixture
def uuu(tmp_path):
    path = tmp_path / "uuu.json"
    g = [[0] * 6 for _ in range(6)]
    for i in (0, 2, 4):
        g[i][i + 1] = g[i + 1][i] = 1
    path.write_text(json.dumps({"gram": g}))
    return str(path)


def test_weil_relation(a1, tmp_path):
    out1, out2 = tmp_path / "w1.json", tmp_path / "w2.json"
    assert run(["weil", "--in", a1, "--word", "STSTST", "--out", str(out1)]) == 0
    assert run(["weil", "--in", a1, "--word", "SS", "--out", str(out2)]) == 0
    m1, m2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    assert m1["matrix"] == m2["matrix"]


def test_exponents_o32(capsys):
    assert run(["exponents", "--b", "5", "--s", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["case"] == "O(s+1,s)"
    assert "O(3,2)" in rep["verdict"]
    assert [r["chi_P_Ur_exponent"] for r in rep["rows"]] == ["-1/2", "0"]


def test_lattice_info_and_split(a1, uuu, capsys):
    assert run(["lattice", "info", "--in", a1]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["discriminant"]["order"] == 2 and info["signature"] == [1, 0]
    assert run(["lattice", "split", "--in", uuu, "--z", "1,0,0,0,0,0"]) == 0
    sp = json.loads(capsys.readouterr().out)
    assert sp["N"] == 1 and len(sp["L1_basis"]) == 4 and sp["D_L1_order"] == 1


def test_harmonic_basis(capsys):
    assert run(["harmonic", "basis", "--n", "3", "--k", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["basis"]) == 5


def test_theta_command(a1, capsys):
    assert run(["theta", "--in", a1, "--tau", "0,1", "--radius", "6"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["values"][0]["value"][0] == pytest.approx(1.0037348854877, rel=1e-11)


def test_lift_command(uuu, capsys):
    assert run(["lift", "--lattice", uuu, "--form", "delta:6", "--kappa", "12,10", "--gz", "u=0.1,0.2,0.3,0.4;a=1;g1=id", "--cutoff", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["constant_term"] == [0.0, 0.0] and rep["ct_strategy"] == "zero"


def test_bessel_command(capsys):
    assert run(["bessel", "check", "--bplus", "3", "--bminus", "1", "--k", "2", "--k1", "2", "--samples", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["max_abs_error"] < 1e-4


def test_restrict_command(capsys):
    assert run(["restrict", "--seed", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lemma_i_exact"] and rep["lemma_ii_exact"]
    assert rep["difference"] < 1e-12


def test_exit_codes(a1, tmp_path):
    assert cli("frobnicate")[0] == 2
    assert cli("exponents", "--b", "5")[0] == 2
    assert cli("weil", "--in", a1, "--word", "SX")[0] == 3
    odd = tmp_path / "odd.json"
    odd.write_text(json.dumps({"gram": [[1]]}))
    code, _, err = cli("lattice", "info", "--in", str(odd))
    assert code == 3 and "OddDiagonal" in err
    assert cli("exponents", "--b", "5", "--s", "3")[0] == 3


def test_verify_fast_exit_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code_a, _, _ = cli("verify", "--suite", "fast", "--tol", "1e-8", "--out", str(a))
    code_b, _, _ = cli("verify", "--suite", "fast", "--tol", "1e-8", "--out", str(b))
    assert code_a == code_b == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    names = [r["check"] for r in rep["checks"]]
    assert len(names) == len(set(names)) == len(REGISTRY)
    assert all(r["status"] in ("pass", "skipped") for r in rep["checks"])
