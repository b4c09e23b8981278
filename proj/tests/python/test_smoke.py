import csv
import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import malab

CLI = os.environ.get("MALAB_CLI")
needs_cli = pytest.mark.skipif(not CLI, reason="command-line tool not built")


@pytest.fixture(scope="module")
def paraboloid():
    return malab.closed_form("disk:1.2", "(x^2 + y^2 - 1.44)/2", 1.0 / 64)


def test_solve_matches_radial_solution():
    st = malab.solve("disk:1.4142135623730951", "1", h=1.0 / 32)
    assert st.dim == 2
    assert st.residual <= 1e-8
    u = st.u
    assert u.ndim == 2
    inside = np.isfinite(u)
    assert inside.sum() > 1000
    assert np.nanmax(u) <= 0.0
    assert np.nanmin(u) == pytest.approx(-1.0, abs=5 * st.h**2)


def test_sections_are_disks(paraboloid):
    rows = malab.sections(paraboloid, [0.0, 0.0], [0.02, 0.08])
    for r in rows:
        assert r["volume"] == pytest.approx(2 * math.pi * r["t"], rel=0.05)
        assert abs(r["com"][0]) <= paraboloid.h


def test_green_function_is_positive_and_logarithmic(paraboloid):
    g = malab.green(paraboloid, [0.0, 0.0], V="disk:1.0")
    values = g["values"]
    assert values.shape == paraboloid.u.shape
    assert np.nanmin(values) >= 0.0
    # Value at distance 0.5 on the x axis.
    ox, oy = paraboloid.origin
    i = int(round((0.5 - ox) / paraboloid.h))
    j = int(round((0.0 - oy) / paraboloid.h))
    assert values[j, i] == pytest.approx(math.log(2) / (2 * math.pi), rel=0.03)


def test_identities_pass_on_paraboloid(paraboloid):
    rows = malab.identities(paraboloid, [0.0, 0.0], v_height=0.32, flux_heights=[0.18])
    names = [r["name"] for r in rows]
    assert "green_mass" in names
    for r in rows:
        assert r["pass"], r


def test_capacity_and_reciprocity(paraboloid):
    cap = malab.capacity(paraboloid, [0.0, 0.0], 0.02, V="disk:0.8", heights=[0.02])
    assert set(cap) == {"cap", "q_form", "sandwich_lo", "sandwich_hi"}
    assert cap["q_form"] == pytest.approx(2 * math.pi / math.log(4), rel=0.05)
    assert cap["sandwich_lo"] <= 1.05
    assert cap["sandwich_hi"] >= 0.95


def test_state_round_trip(tmp_path, paraboloid):
    p = tmp_path / "state.bin"
    paraboloid.save(p)
    back = malab.State.load(p)
    assert np.allclose(back.u, paraboloid.u, equal_nan=True)


def test_errors_carry_kind_and_exit_code():
    with pytest.raises(malab.MalabError) as e:
        malab.solve("disk:1", "0.2", h=1.0 / 16, lam=0.5, Lam=1.5)
    assert e.value.kind.startswith("precondition")
    assert e.value.exit_code in (1, 2, 3)
    with pytest.raises(malab.SolverFailure):
        malab.solve("disk:1.4142135623730951", "1+0.5*sin(4*x)*sin(4*y)", h=1.0 / 32,
                    lam=0.5, Lam=1.5, tol=1e-10, max_newton=1)
    with pytest.raises(malab.MalabError):
        malab.evaluate("sin(", 0.0, 0.0)


def test_sweep_is_deterministic():
    toml = """
name = "py-sweep"
domain = "disk:1.4142135623730951"
potential = "(x^2 + y^2 - 2)/2"
h = [0.03125, 0.015625]
heights = [0.005, 0.01, 0.02, 0.04, 0.08]
flux_heights = [0.18, 0.24]
suites = ["green", "identities"]
output = "py"
"""
    code, summary = malab.sweep(toml)
    code2, summary2 = malab.sweep(toml)
    assert code == code2 == 0
    assert summary == summary2


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)


@needs_cli
def test_cli_solve_sections_verify(tmp_path):
    state = tmp_path / "state.bin"
    r = run("solve", "--domain", "disk:1.4142135623730951", "--f", "1", "--h", 0.03125, "--out", state)
    assert r.returncode == 0, r.stderr
    side = json.loads((tmp_path / "state.json").read_text())
    assert set(side) == {"residual", "newton_iters", "min_hessian_eig"}

    sec = tmp_path / "sections.csv"
    r = run("sections", "--state", state, "--x0", "0,0", "--heights", "0.02,0.04,0.08", "--alpha", 0.5, "--csv", sec)
    assert r.returncode == 0, r.stderr
    with open(sec) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "volume", "mu", "com_x", "com_y"]
    assert len(rows) == 4

    ids = tmp_path / "ids.csv"
    r = run("verify", "--suite", "identities", "--state", state, "--V", "section:0.45",
            "--flux-heights", "0.18", "--csv", ids)
    assert r.returncode in (0, 1), r.stderr
    with open(ids) as fh:
        assert next(csv.reader(fh)) == ["name", "h", "left", "right", "rel_err", "pass"]

    g = tmp_path / "g.bin"
    r = run("green", "--state", state, "--V", "disk:1.0", "--out", g)
    assert r.returncode == 0, r.stderr
    assert g.read_bytes()[:8] == b"MALABFLD"

    cap = tmp_path / "cap.json"
    r = run("capacity", "--state", state, "--K", "section:x0=0,0:t=0.05", "--V", "disk:0.8",
            "--check", "reciprocity", "--heights", "0.05", "--out", cap)
    assert r.returncode == 0, r.stderr
    assert set(json.loads(cap.read_text())) == {"cap", "q_form", "sandwich_lo", "sandwich_hi"}


@needs_cli
def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('h = [0.1]\nheights = [0.1]\nunknown_field = 3\n')
    r = run("sweep", "--config", bad)
    assert r.returncode == 2
    assert "unknown_field" in r.stderr

    r = run("solve", "--domain", "disk:1.4142135623730951", "--f", "1+0.5*sin(4*x)*sin(4*y)",
            "--lambda", 0.5, "--Lambda", 1.5, "--h", 0.03125, "--tol", 1e-10, "--max-newton", 1,
            "--out", tmp_path / "s.bin")
    assert r.returncode == 3

    r = run("solve", "--domain", "disk:1", "--h", 0.5, "--out", tmp_path / "s.bin")
    assert r.returncode == 2

    r = run("frobnicate")
    assert r.returncode == 2


@needs_cli
def test_cli_output_root(tmp_path):
    env = dict(os.environ, MALAB_OUTPUT_ROOT=str(tmp_path))
    r = subprocess.run([CLI, "solve", "--domain", "disk:1", "--f", "1", "--h", "0.0625", "--out", "rel/state.bin"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "rel" / "state.bin").exists()
