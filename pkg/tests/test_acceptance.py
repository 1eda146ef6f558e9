"""Acceptance criteria: one test each, printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import itertools
import os
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
import pytest
import sympy

from conftest import frac_mp, mp_to_fraction
from equidist.classifier import GUARANTEED, NOT_UD, classify
from equidist.configio import load_experiment_file
from equidist.constructions import (
    build_counterexample_scalar,
    dirichlet_simultaneous,
    nodist_construct,
    nodist_counts,
    verify_nodist,
    witness_find,
)
from equidist.diagnostics import cesaro_drift, limsup_gap, mass_near, star_discrepancy_1d, weyl_sum
from equidist.exactnum import Basis, IrrationalGenerator
from equidist.generator import generate
from equidist.independence import (
    q_independence_polys,
    rational_independence,
    substitute_total,
    total_q_independence,
)
from equidist.model import PolynomialSR, TorusMap, rotation_numbers, tor3_lift, winding_numeric

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
EPS64 = Fraction(1, 1 << 64)


def report(n: int, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def load(name):
    return load_experiment_file(CONFIGS / name).config


# -- 1 ---------------------------------------------------------------------------------------------


def test_c01_unperturbed_baseline():
    pts = generate(load("sqrt2.json"), 1, 10 ** 5)
    D = star_discrepancy_1d(pts).star_discrepancy
    S = weyl_sum(pts, 1).magnitude
    report(1, D <= Fraction(2, 1000) and S <= 1e-2, f"{{n sqrt2}} N=1e5: D*={float(D):.3e} (<=2e-3), |S_N(1)|={S:.3e} (<=1e-2)")


# -- 2 ---------------------------------------------------------------------------------------------


def test_c02_perturbed_positive_case():
    cfg = load("cos_perturbed.json")
    v = classify(cfg)
    pts = generate(cfg, 1, 10 ** 5)
    d4 = star_discrepancy_1d(pts[: 10 ** 4]).star_discrepancy
    d5 = star_discrepancy_1d(pts).star_discrepancy
    ok = v.uniform == GUARANTEED and "R5" in v.rule_ids and d5 <= Fraction(1, 100) and d5 < d4
    report(2, ok, f"0.3cos period sqrt3: verdict {v.uniform} {v.rule_ids}, D*(1e4)={float(d4):.3e}, D*(1e5)={float(d5):.3e}")


# -- 3 ---------------------------------------------------------------------------------------------


def test_c03_scalar_counterexample():
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2)])
    s2 = b.gen("s2")
    plan = build_counterexample_scalar(s2, [s2 / 2], Fraction(1, 10))
    pts = generate(plan.config, 1, 10 ** 4)
    mass = mass_near(pts, 0, Fraction(1, 10 ** 6))["mass"]
    S = weyl_sum(pts, 1).magnitude
    v = classify(plan.config)
    ok = mass >= 0.8 and S >= 0.5 and v.uniform == NOT_UD
    report(3, ok, f"plan {plan.relation}: atom mass at 0 = {mass:.4f} (>=0.8), |S_N(1)|={S:.4f} (>=0.5), verdict {v.uniform}")


# -- 4 ---------------------------------------------------------------------------------------------


def test_c04_limsup_gap():
    gap = limsup_gap(load("constant_half.json"), 10 ** 4)["gap"]
    report(4, Fraction(49, 100) <= gap <= Fraction(1, 2), f"f=1/2, P0=sqrt2 x, N=1e4: gap={float(gap):.6f} in [0.49, 0.5]")


# -- 5 ---------------------------------------------------------------------------------------------

GEN4 = Basis([IrrationalGenerator(f"s{p}", "sqrt", radicand=p) for p in (2, 3, 5, 7)])


def _rand_sr(rng, zero_bias=0.5):
    x = GEN4.rational(rng.randint(-2, 2))
    for name in GEN4.names:
        if rng.random() > zero_bias:
            x = x + GEN4.gen(name, rng.choice((-1, 1)))
    return x


def _int_grid(d, K, nonzero=False):
    vals = [k for k in range(-K, K + 1) if k or not nonzero]
    g = np.array(list(itertools.product(vals, repeat=d)), dtype=np.int64)
    return g if nonzero else g[np.any(g != 0, axis=1)]


def _irr_matrix(xs):
    return np.array([[int(c) for c in x.coords()[1:]] for x in xs], dtype=np.int64).T


def _poly_irr(P, D):
    out = []
    for k in range(D):
        c = P.coeffs[k] if k < P.degree else GEN4.zero()
        out.extend(int(v) for v in c.coords()[1:])
    return out


def _span_complement(vectors, dim):
    """Integer rows spanning the orthogonal complement of span(vectors) in Q^dim (sympy)."""
    if not vectors:
        return np.eye(dim, dtype=np.int64)
    M = sympy.Matrix([list(v) for v in vectors])
    rows = []
    for n in M.nullspace():
        den = sympy.ilcm(*[sympy.fraction(x)[1] for x in n])
        rows.append([int(x * den) for x in n])
    return np.array(rows, dtype=np.int64).reshape(len(rows), dim)


def test_c05_independence_oracles():
    rng = random.Random(2024)
    # Cramer's rule: a kernel of a {-1,0,1} matrix of rank <= 3 has a vector with entries <= 4
    K = 4
    agree = {"rational": 0, "polys": 0, "total": 0}
    dependent = {"rational": 0, "polys": 0, "total": 0}
    sound = True
    for _ in range(100):
        d = rng.randint(1, 4)
        xs = [_rand_sr(rng, 0.6) for _ in range(d)]
        v = rational_independence(xs)
        A = _irr_matrix(xs)
        brute = bool(np.any(np.all(_int_grid(d, K) @ A.T == 0, axis=1)))
        agree["rational"] += v.independent == (not brute)
        if not v.independent:
            dependent["rational"] += 1
            total = GEN4.rational(v.witness["constant"])
            for c, x in zip(v.witness["coefficients"], xs):
                total = total + x * c
            sound &= total.is_zero()
    for _ in range(100):
        d = rng.randint(1, 4)
        Ps = [PolynomialSR(GEN4, tuple(_rand_sr(rng, 0.75) for _ in range(rng.randint(1, 2)))) for _ in range(d)]
        Ps = [P if P.degree else PolynomialSR.linear(GEN4.rational(1)) for P in Ps]
        v = q_independence_polys(Ps)
        D = max(P.degree for P in Ps)
        A = np.array([_poly_irr(P, D) for P in Ps], dtype=np.int64).T
        brute = bool(np.any(np.all(_int_grid(d, K) @ A.T == 0, axis=1)))
        agree["polys"] += v.independent == (not brute)
        if not v.independent:
            dependent["polys"] += 1
            R = PolynomialSR(GEN4, ())
            for c, P in zip(v.witness["r"], Ps):
                if c:
                    R = R + P.scale(c)
            sound &= (R - v.witness["rational_polynomial"]).is_zero() and not R.has_irrational_coefficient()
    for _ in range(100):
        d = rng.randint(1, 4)
        tuples = [(_rand_sr(rng, 0.6), [_rand_sr(rng, 0.6) for _ in range(rng.randint(0, 2))]) for _ in range(d)]
        v = total_q_independence(tuples)
        Kt = max([3] + ([abs(a) for a in v.witness["a"]] if not v.independent else []))
        brute = False
        for size in range(1, d + 1):
            for lam in itertools.combinations(range(d), size):
                span = [GEN4.rational(1).coords()] + [b.coords() for i in lam for b in tuples[i][1]]
                C = _span_complement([[int(c) for c in s] for s in span], 5)
                A = np.array([[int(c) for c in tuples[i][0].coords()] for i in lam], dtype=np.int64).T
                grid = _int_grid(size, Kt, nonzero=True)
                if C.shape[0] == 0 or np.any(np.all(grid @ (C @ A).T == 0, axis=1)):
                    brute = True
                    break
            if brute:
                break
        agree["total"] += v.independent == (not brute)
        if not v.independent:
            dependent["total"] += 1
            sound &= substitute_total(tuples, v.witness).is_zero() and all(a != 0 for a in v.witness["a"])
    ok = all(n == 100 for n in agree.values()) and sound and all(dependent.values())
    report(5, ok, f"agreement {agree} of 100 each (dependent cases {dependent}), witnesses exact: {sound}")


# -- 6 ---------------------------------------------------------------------------------------------


def test_c06_total_independence_example():
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2), IrrationalGenerator("s3", "sqrt", radicand=3),
               IrrationalGenerator("pi", "pi"), IrrationalGenerator("pi2", "pi", power=2)])
    s2, s3, pi, pi2 = (b.gen(n) for n in ("s2", "s3", "pi", "pi2"))
    paper = total_q_independence([(s2, [s3]), (s3, [pi]), (pi2, [s2])])
    modified = total_q_independence([(s2, [s3]), (s3, [s2]), (pi2, [s2])])
    w = modified.witness or {}
    ok = paper.independent and not modified.independent and w.get("subset") == [0, 1] and all(a != 0 for a in w.get("a", [0]))
    report(6, ok, f"paper triple independent={paper.independent}; with beta_2 = sqrt2: independent={modified.independent}, witness subset {w.get('subset')} a={w.get('a')}")


# -- 7, 8 ------------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def nodist_k2():
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2)])
    plan = nodist_construct(b.gen("s2"), K=2, scan_limit=300000)
    top = plan.stages[-1]
    pts = generate(plan.scalar_config(), 1, top.M)
    return plan, pts


def test_c07_nodist_construction(nodist_k2):
    plan, _ = nodist_k2
    checks = verify_nodist(plan)
    last = nodist_counts(plan)[-1]
    failed = [c["name"] for c in checks if not c["ok"]]
    ok = not failed and last["share_78"] <= Fraction(1, 4) and last["share_1516"] >= Fraction(3, 8)
    report(7, ok, f"K=2: N2={last['N']} share(7/8,1)={float(last['share_78']):.4f} (<=1/4), M2={last['M']} share(15/16,1)={float(last['share_1516']):.4f} (>=3/8), "
                  f"total length {float(plan.total_length):.3e} (<1/8), failed checks {failed}")


def test_c08_seam_contrast(nodist_k2):
    plan, pts = nodist_k2
    top = plan.stages[-1]
    bad = cesaro_drift(pts, top.N, top.M, 64, box=(Fraction(7, 8), 1))
    benign = cesaro_drift(generate(load("torus_benign.json"), 1, 10 ** 5), 5 * 10 ** 4, 10 ** 5, 64)
    ok = (bad.box_drift >= 1 / 16 and bad.torus_metric <= 1 / 32
          and benign.interval_metric <= 0.02 and benign.torus_metric <= 0.02)
    report(8, ok, f"nodist N2={top.N}->M2={top.M}: box (7/8,1) drift {bad.box_drift:.4f} (>=1/16), torus drift {bad.torus_metric:.2e} (<=1/32); "
                  f"benign map: [0,1) {benign.interval_metric:.2e}, torus {benign.torus_metric:.2e} (<=0.02)")


# -- 9 ---------------------------------------------------------------------------------------------


def test_c09_density_witnesses():
    cfg = load("yuditskii.json")
    found = {t: witness_find(cfg, Fraction(t, 10), Fraction(1, 100), 10 ** 6) for t in range(1, 10)}
    report(9, all(n is not None for n in found.values()), f"Yuditskii witnesses n for targets 0.1..0.9: {list(found.values())}")


# -- 10 --------------------------------------------------------------------------------------------


def test_c10_dirichlet():
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2), IrrationalGenerator("s3", "sqrt", radicand=3)])
    k = dirichlet_simultaneous([b.gen("s2"), b.gen("s3")], 20)
    mpmath.mp.prec = 200

    def dist(x):
        return abs(x - mpmath.nint(x))

    scan = next(j for j in range(1, 401) if dist(j * mpmath.sqrt(2)) <= 0.05 and dist(j * mpmath.sqrt(3)) <= 0.05)
    d2, d3 = float(dist(k * mpmath.sqrt(2))), float(dist(k * mpmath.sqrt(3)))
    report(10, k == scan and k <= 400 and d2 <= 0.05 and d3 <= 0.05, f"Q=20: k={k} (scan {scan}), distances {d2:.4f}, {d3:.4f}")


# -- 11 --------------------------------------------------------------------------------------------


def test_c11_precision():
    cfg = load("quintic.json")
    pts = generate(cfg, 10 ** 6 - 10, 10 ** 6)
    mpmath.mp.prec = 512
    ref = mp_to_fraction(frac_mp(mpmath.sqrt(2) * mpmath.mpf(10) ** 30))
    hit = pts[-1].coords[0].torus_contains(ref)
    widths = all(c.width <= EPS64 for p in pts for c in p.coords)
    env = dict(os.environ, EQUIDIST_MAX_BITS="100")
    run = subprocess.run([sys.executable, "-m", "equidist", "gen", str(CONFIGS / "quintic.json")], env=env, capture_output=True, text=True)
    report(11, hit and widths and run.returncode == 2,
           f"sqrt2 n^5 at n=1e6 inside 512-bit oracle: {hit}; all widths <= 2^-64: {widths}; capped precision exit code {run.returncode} (2)")


# -- 12 --------------------------------------------------------------------------------------------


def test_c12_rotation_numbers():
    rows = []
    for m in (1, 2, 3, 5, -1):
        G = TorusMap((m,))
        rows.append((m, rotation_numbers(G)[0], winding_numeric(G, 0)))
    lifts = []
    for name in ("resonant.json", "yuditskii.json", "cos_perturbed.json"):
        comp = tor3_lift(load(name))
        structural = rotation_numbers(comp.G)
        numeric = [winding_numeric(comp.G, v) for v in range(comp.G.arity)]
        lifts.append((structural, numeric))
    ok = all(m == s == n for m, s, n in rows) and all(s == n and s[0] == 1 and not any(s[1:]) for s, n in lifts)
    report(12, ok, f"x->mx (m, structural, numeric): {rows}; tor3 lifts: {lifts}")
