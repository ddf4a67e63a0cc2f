import json
import subprocess
import sys

import numpy as np
import pytest

from ratsphere.cli import main
from ratsphere.reports import RadiusRule, artifact_version


def run(tmp_path, *argv, name="out.jsonl"):
    out = tmp_path / name
    code = main(["--out", str(out), *argv])
    return code, [json.loads(line) for line in out.read_text().splitlines()], out


def test_radius_rules():
    assert RadiusRule.parse("n^-0.4")(100) == pytest.approx(100**-0.4)
    r = RadiusRule.parse("0.5*n^-1")
    assert (r.c, r.a) == (0.5, -1.0)
    assert RadiusRule.parse("0.3")(7) == 0.3
    assert RadiusRule.parse("2 * n^(-0.25)").a == -0.25
    for bad in ("n^", "log(n)", "*n", "-1*n^2", ""):
        with pytest.raises(ValueError):
            RadiusRule.parse(bad)
    with pytest.raises(ValueError):
        RadiusRule.parse("3")(5)


def test_enumerate_counts(tmp_path):
    code, recs, _ = run(tmp_path, "enumerate", "--n", "101", "--d", "2", "--csv", str(tmp_path / "p.csv"))
    assert code == 0
    assert recs[0]["record"] == "config" and recs[0]["version"] == artifact_version()
    assert recs[1]["count"] == 600 and recs[1]["cross_check"] == "ok"
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "m1,m2,m3,n" and len(lines) == 601


def test_enumerate_T_and_even(tmp_path):
    code, recs, _ = run(tmp_path, "enumerate", "--T", "20", "--svg", str(tmp_path / "f.svg"))
    assert code == 0 and recs[1]["count"] == recs[1]["formula_sum"] == 630
    assert (tmp_path / "f.svg").read_text().startswith("<svg")
    code, recs, _ = run(tmp_path, "enumerate", "--n", "2", "--d", "2")
    assert code == 0 and recs[1]["count"] == 0


def test_enumerate_cache(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv("RSL_CACHE", str(cache))
    run(tmp_path, "enumerate", "--n", "25")
    assert (cache / "omega_d2_n25.npy").exists()
    code, recs, _ = run(tmp_path, "enumerate", "--n", "25")
    assert code == 0 and recs[1]["count"] == 120
    other = tmp_path / "c2"
    main(["--cache-dir", str(other), "--out", str(tmp_path / "x"), "enumerate", "--n", "5"])
    assert np.load(other / "omega_d2_n5.npy").shape == (24, 3)


def test_variance_byte_identical(tmp_path):
    args = ["variance", "--n", "101", "--R-rule", "n^-0.4", "--samples", "2000", "--seed", "7"]
    _, recs, a = run(tmp_path, *args, name="a")
    _, _, b = run(tmp_path, *args, name="b")
    assert a.read_bytes() == b.read_bytes()
    assert recs[0]["config"]["seed"] == 7
    assert recs[1]["within_bound_3se"]


def test_capstats(tmp_path):
    code, recs, _ = run(tmp_path, "capstats", "--n", "101", "--R-rule", "n^-0.25", "--seed", "1", "--caps", "30", "--per-cap")
    assert code == 0
    assert sum(r["record"] == "cap" for r in recs) == 30
    assert recs[-1]["record"] == "summary"


def test_covering(tmp_path):
    code, recs, _ = run(tmp_path, "covering", "--n", "103", "--grid", "20000", "--epsilon", "0.1")
    assert code == 0
    assert recs[1]["covering_radius"] > recs[2]["radius"]
    code, recs, _ = run(tmp_path, "covering", "--T-list", "10,20,30", "--grid", "20000")
    assert recs[-1]["record"] == "exponent"


def test_linnik(tmp_path):
    code, recs, _ = run(tmp_path, "linnik", "--lmax", "49", "--csv", str(tmp_path / "l.csv"))
    assert code == 0
    rows = [r for r in recs if r["record"] == "linnik"]
    assert rows[0]["ell"] == 3 and rows[0]["z_min"] == 1
    assert rows[1]["trivial"] is True
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "ell,n,z_min,exponent,trivial"


def test_hecke_verify(tmp_path):
    code, recs, _ = run(tmp_path, "hecke-verify", "--p", "3", "--nu", "4", "--nmax", "300")
    assert code == 0
    assert all(r["failures"] == [] for r in recs if r["record"] == "eichler")
    assert recs[-1]["total_failures"] == 0


def test_hecke_verify_nonzero_exit_on_failure(tmp_path, monkeypatch):
    from ratsphere import cli, theta_modular

    def broken(p, P, n_max):
        rep = theta_modular.eichler_verify(p, P, n_max)
        rep.rows[0].lhs += 1
        return rep

    monkeypatch.setattr(cli, "eichler_verify", broken)
    code, recs, _ = run(tmp_path, "hecke-verify", "--p", "3", "--nu", "0", "--nmax", "10")
    assert code == 1 and recs[-1]["total_failures"] == 1


def test_eigenbasis_and_theta(tmp_path):
    code, recs, _ = run(tmp_path, "eigenbasis", "--nu", "4")
    assert code == 0 and recs[1]["block_dims"] == [1, 8]
    code, recs, _ = run(tmp_path, "theta", "--nu", "4", "--nmax", "5", "--lattice", "Lambda", "--csv", str(tmp_path / "t.csv"))
    assert [r["numerator"] for r in recs if r["record"] == "coefficient"] == [0, 0, -32, 64, 0]


def test_bad_input_exit_code(tmp_path):
    code = main(["--out", str(tmp_path / "o"), "variance", "--n", "100", "--R-rule", "n^-0.4", "--seed", "1"])
    assert code == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ratsphere.cli", "enumerate", "--n", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[1])["count"] == 24
