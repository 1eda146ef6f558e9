import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from equidist.cli import run

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def cli(*args, env=None):
    full = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "equidist", *map(str, args)], capture_output=True, text=True, env=full)


def test_classify_resonant():
    r = cli("classify", CONFIGS / "resonant.json")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    rules = [x["rule"] for x in out["rules_fired"]]
    assert "R1" in rules and "R7" in rules


def test_analyze_weyl_small():
    r = cli("analyze", CONFIGS / "sqrt2.json", "--n", 100000, "--weyl", 1)
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert float(out["weyl"][0]["magnitude"]) < 0.02


def test_reports_are_byte_identical_across_threads(tmp_path):
    a = cli("analyze", CONFIGS / "cos_perturbed.json", "--n", 5000, "--weyl", 1, "--covering", "--drift", 2500)
    b = cli("analyze", CONFIGS / "cos_perturbed.json", "--n", 5000, "--weyl", 1, "--covering", "--drift", 2500, "--threads", 4)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
    g1 = cli("gen", CONFIGS / "yuditskii.json", "--n1", 1, "--n2", 3000)
    g2 = cli("gen", CONFIGS / "yuditskii.json", "--n1", 1, "--n2", 3000, "--threads", 3)
    assert g1.stdout == g2.stdout and g1.stdout.startswith("n,coord0,wrap\n")


@pytest.mark.parametrize("kind", ["scalar", "poly", "vector", "vector_sum", "polyvec"])
def test_construct_then_verify(kind, tmp_path):
    plan = tmp_path / "plan.json"
    cfg = tmp_path / "cfg.json"
    k = "vector" if kind == "vector_sum" else kind
    r = cli("construct", CONFIGS / f"construct_{kind}.json", "--kind", k, "--out", plan, "--emit-config", cfg)
    assert r.returncode == 0, r.stderr
    assert cli("classify", cfg).returncode == 0
    v = cli("verify", plan)
    assert v.returncode == 0, v.stdout
    assert all(c["ok"] for c in json.loads(v.stdout)["checks"])


def test_tampered_plan_fails_verification(tmp_path):
    plan = tmp_path / "plan.json"
    assert cli("construct", CONFIGS / "construct_scalar.json", "--kind", "scalar", "--out", plan).returncode == 0
    d = json.loads(plan.read_text())
    d["mass_floor"] = "0.99"
    plan.write_text(json.dumps(d))
    assert cli("verify", plan).returncode == 3


def test_witness_and_not_found():
    r = cli("witness", CONFIGS / "yuditskii.json", "--target", "0.5", "--eps", "0.01")
    assert r.returncode == 0 and json.loads(r.stdout)["n"] == 40
    r = cli("witness", CONFIGS / "rational_rotation.json", "--target", "0.25", "--eps", "0.01", "--n-max", 1000)
    assert r.returncode == 0 and json.loads(r.stdout)["found"] is False


def test_independence_inputs():
    ok = json.loads(cli("independence", CONFIGS / "independence_total.json").stdout)
    bad = json.loads(cli("independence", CONFIGS / "independence_total_violated.json").stdout)
    assert ok["independent"] is True
    assert bad["independent"] is False and all(a != 0 for a in bad["witness"]["a"])


def test_exit_codes(tmp_path):
    assert cli("gen", CONFIGS / "sqrt2.json", "--F", 32).returncode == 1
    broken = tmp_path / "broken.json"
    broken.write_text('{"basis": [], "config": {"kind": "scalar", "p0": {"coeffs": {"gen": "nope"}, "degree": 1}}}')
    r = cli("classify", broken)
    assert r.returncode == 1 and "nope" in r.stderr
    assert cli("gen", CONFIGS / "quintic.json", env={"EQUIDIST_MAX_BITS": "100"}).returncode == 2
    assert cli("frobnicate").returncode == 1
    nodist = tmp_path / "nd.json"
    nodist.write_text(json.dumps({"basis": [{"name": "s2", "kind": "sqrt", "of": "2"}], "alpha": {"gen": "s2"}, "K": 1, "scan_limit": 500}))
    assert cli("construct", nodist, "--kind", "nodist").returncode == 1


def test_run_in_process(capsys):
    assert run(["classify", str(CONFIGS / "rational_rotation.json")]) == 0
    assert json.loads(capsys.readouterr().out)["density"] == "NotDense"


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    d = json.loads(path.read_text())
    if "config" in d:
        assert cli("classify", path).returncode == 0
    elif "mode" in d:
        assert cli("independence", path).returncode == 0
    else:
        assert "alpha" in d or "alphas" in d or "qs" in d or "p0" in d
