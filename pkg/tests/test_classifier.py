from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

import equidist.classifier as classifier_module
import equidist.exactnum as exactnum
from equidist.classifier import COUNTEREXAMPLE, GUARANTEED, NOT_DENSE, NOT_UD, UNKNOWN, classify
from equidist.configio import load_experiment_file
from equidist.diagnostics import box_discrepancy, covering_radius, star_discrepancy_1d
from equidist.exactnum import Basis, IrrationalGenerator
from equidist.generator import generate
from equidist.model import (
    PeriodicFunction,
    Perturbation,
    PiecewiseLinear,
    PolynomialSR,
    ScalarConfig,
    TorusComponent,
    TorusConfig,
    TorusMap,
    TrigBody,
    TrigTerm,
    VectorConfig,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
H0 = PiecewiseLinear(((0, 0), (Fraction(1, 2), Fraction(-1, 2)), (Fraction(3, 4), 0)))
WAVE = TrigBody((TrigTerm(Fraction(1, 5), 1),))


def lin(c):
    return PolynomialSR.linear(c)


def test_scalar_resonant_period(basis):
    s2 = basis.gen("s2")
    cfg = ScalarConfig(basis, lin(s2), (Perturbation(PeriodicFunction(s2 / 2, WAVE), lin(basis.rational(1))),))
    v = classify(cfg)
    assert v.density == GUARANTEED and v.uniform == COUNTEREXAMPLE
    assert v.rule_ids[:2] == ["R1", "R7"]
    assert v.constructor == "build_counterexample_scalar"


def test_scalar_independent_period():
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2), IrrationalGenerator("s3", "sqrt", radicand=3),
               IrrationalGenerator("r3", "sqrt", radicand=Fraction(1, 3))])
    cfg = ScalarConfig(b, lin(b.gen("s2")), (Perturbation(PeriodicFunction(b.gen("s3"), WAVE), lin(b.rational(1))),))
    v = classify(cfg)
    assert v.uniform == GUARANTEED and "R5" in v.rule_ids


def test_scalar_rational_rotation(basis):
    v = classify(ScalarConfig(basis, lin(basis.rational(Fraction(1, 2)))))
    assert v.density == NOT_DENSE and v.uniform != GUARANTEED
    assert "R2" in v.rule_ids


def test_polynomial_criterion(basis):
    s2 = basis.gen("s2")
    # P0 = s2 x^2, perturbation argument s2 x^2 with period 1: resonant
    P = PolynomialSR.monomial(s2, 2)
    v = classify(ScalarConfig(basis, P, (Perturbation(PeriodicFunction(basis.rational(1), WAVE), P),)))
    assert v.uniform == COUNTEREXAMPLE and v.constructor == "build_counterexample_poly"
    # a different degree breaks the resonance
    Q = PolynomialSR.monomial(s2, 3)
    v = classify(ScalarConfig(basis, P, (Perturbation(PeriodicFunction(basis.rational(1), WAVE), Q),)))
    assert v.uniform == GUARANTEED


def test_vector_rules(basis):
    s2, s3 = basis.gen("s2"), basis.gen("s3")
    v = classify(VectorConfig(basis, (ScalarConfig(basis, lin(s2)), ScalarConfig(basis, lin(s3)))))
    assert v.density == GUARANTEED and v.uniform == GUARANTEED and "R3" in v.rule_ids and "R6" in v.rule_ids
    # same alpha twice: the diagonal is not dense in the square
    v = classify(VectorConfig(basis, (ScalarConfig(basis, lin(s2)), ScalarConfig(basis, lin(s2)))))
    assert v.density == NOT_DENSE
    # polynomial components with Q-independent P's
    comps = (ScalarConfig(basis, PolynomialSR.monomial(s2, 2)), ScalarConfig(basis, PolynomialSR(basis, (s2, s3))))
    v = classify(VectorConfig(basis, comps))
    assert v.density == GUARANTEED and "R4" in v.rule_ids


def test_vector_sharpness(basis):
    s2, s3 = basis.gen("s2"), basis.gen("s3")
    f = PeriodicFunction(basis.rational(1), WAVE)
    comps = (
        ScalarConfig(basis, lin(s2), (Perturbation(f, lin(s3)),)),
        ScalarConfig(basis, lin(s3), (Perturbation(f, lin(s2)),)),
    )
    v = classify(VectorConfig(basis, comps))
    # s2 + s3 is the sum of the two components' sibling arguments, so a = (1, 1) violates
    assert v.uniform == COUNTEREXAMPLE and v.constructor == "build_counterexample_vector"


def test_torus_examples(basis):
    s2, s3 = basis.gen("s2"), basis.gen("s3")
    v = classify(TorusConfig(basis, (TorusComponent(TorusMap((1,), (H0,)), (lin(s2),)),)))
    assert (v.density, v.distribution_exists_on_torus) == (GUARANTEED, GUARANTEED)
    assert v.rule_ids == ["R8", "R9"]
    v = classify(TorusConfig(basis, (TorusComponent(TorusMap((1, -1)), (lin(s2), lin(s2))),)))
    assert v.density == UNKNOWN and v.distribution_exists_on_torus == GUARANTEED
    comps = (TorusComponent(TorusMap((2,), (H0,)), (lin(s2),)), TorusComponent(TorusMap((1, 1)), (lin(s3), PolynomialSR.monomial(s2, 2))))
    v = classify(TorusConfig(basis, comps))
    assert v.density == GUARANTEED


def test_construction_provenance(basis):
    s2 = basis.gen("s2")
    cfg = ScalarConfig(basis, lin(s2), (Perturbation(PeriodicFunction(s2 / 2, WAVE), lin(basis.rational(1))),), "construction:scalar")
    v = classify(cfg)
    assert v.uniform == NOT_UD and "provenance" in v.rule_ids


def test_verdicts_ignore_numeric_relation_detection(basis, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("numeric relation detection used")

    monkeypatch.setattr(exactnum, "detect_integer_relation", boom)
    assert not hasattr(classifier_module, "detect_integer_relation")
    for name in ("sqrt2.json", "resonant.json", "vector_linear.json", "torus_benign.json"):
        classify(load_experiment_file(CONFIGS / name).config)


def test_anchors_present():
    v = classify(load_experiment_file(CONFIGS / "yuditskii.json").config)
    out = v.to_json()
    assert all(r["anchor"] for r in out["rules_fired"])
    assert "basis" in out["assumption"]


# -- invariants ------------------------------------------------------------------------------------


@st.composite
def scalar_configs(draw):
    b = Basis([IrrationalGenerator("s2", "sqrt", radicand=2), IrrationalGenerator("s3", "sqrt", radicand=3)])

    def coeff():
        x = b.rational(draw(st.fractions(-3, 3, max_denominator=4)))
        for g in ("s2", "s3"):
            c = draw(st.integers(-2, 2))
            if c:
                x = x + b.gen(g, c)
        return x

    def poly():
        cs = tuple(coeff() for _ in range(draw(st.integers(1, 2))))
        P = PolynomialSR(b, cs)
        return P if P.degree else PolynomialSR.linear(b.rational(1))

    perts = []
    for _ in range(draw(st.integers(0, 2))):
        period = b.rational(draw(st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(3)])))
        body = draw(st.sampled_from([WAVE, H0]))
        perts.append(Perturbation(PeriodicFunction(period, body), poly()))
    return ScalarConfig(b, poly(), tuple(perts))


@settings(max_examples=80)
@given(scalar_configs())
def test_verdict_invariants(cfg):
    v = classify(cfg)
    if v.uniform == GUARANTEED:
        assert v.density == GUARANTEED
    if v.density == NOT_DENSE:
        assert v.uniform != GUARANTEED
    bare = classify(ScalarConfig(cfg.basis, cfg.p0))
    if v.density == GUARANTEED and "R1" in v.rule_ids:
        assert bare.density != NOT_DENSE


# -- soundness against simulation ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["sqrt2.json", "cos_perturbed.json", "constant_half.json", "quintic.json", "vector_linear.json"])
def test_guaranteed_ud_discrepancy_decreases(name):
    cfg = load_experiment_file(CONFIGS / name).config
    assert classify(cfg).uniform == GUARANTEED
    pts = generate(cfg, 1, 10 ** 5)
    if cfg.dim == 1:
        small, big = star_discrepancy_1d(pts[: 10 ** 4]), star_discrepancy_1d(pts)
    else:
        small, big = box_discrepancy(pts[: 10 ** 4], 32), box_discrepancy(pts, 32)
    assert big.star_discrepancy < small.star_discrepancy


def test_not_dense_keeps_covering_radius():
    cfg = load_experiment_file(CONFIGS / "rational_rotation.json").config
    assert classify(cfg).density == NOT_DENSE
    for N in (100, 1000):
        assert covering_radius(generate(cfg, 1, N), 64)["covering_radius"] >= 0.2
