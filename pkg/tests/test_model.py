import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from conftest import mp_to_fraction
from equidist.exactnum import Basis, FixedInterval, InverseNotRepresentable, IrrationalGenerator, ProductNotRepresentable
from equidist.model import (
    GridTooCoarse,
    MultiTrigTerm,
    PeriodicFunction,
    Perturbation,
    PiecewiseLinear,
    PolynomialSR,
    ScalarConfig,
    TorusMap,
    TrigBody,
    TrigTerm,
    eval_function_at,
    eval_periodic,
    numeric_winding,
    reduce_to_unit_period,
    rotation_numbers,
    sample_section,
    tor3_lift,
    winding_numeric,
)



@pytest.fixture(autouse=True)
def _oracle_precision():
    with mpmath.workprec(300):
        yield

H0 = PiecewiseLinear(((0, 0), (Fraction(1, 2), Fraction(-1, 2)), (Fraction(3, 4), 0)))


def at(x: Fraction, S: int = 80) -> FixedInterval:
    return FixedInterval(S, (x.numerator << S) // x.denominator, 1)


def test_h0_spot_values():
    assert H0.value_at(Fraction(1, 4)) == Fraction(-1, 4)
    assert H0.value_at(Fraction(5, 8)) == Fraction(-1, 4)
    assert H0.value_at(Fraction(7, 8)) == 0
    f = PeriodicFunction(Basis([]).rational(1), H0)
    assert eval_periodic(f, at(Fraction(1, 4))).contains(Fraction(-1, 4))


def test_eval_examples(basis):
    trig = PeriodicFunction(basis.rational(1), TrigBody((TrigTerm(Fraction(3, 10), 1),)))
    assert eval_periodic(trig, FixedInterval(64, 0, 0)).contains(Fraction(3, 10))
    g = PeriodicFunction(basis.rational(1), PiecewiseLinear(((0, 0), (Fraction(9, 10), Fraction(-9, 10)))))
    assert eval_periodic(g, at(Fraction(1, 4))).contains(Fraction(-1, 4))


def test_pwl_validation():
    with pytest.raises(ValueError):
        PiecewiseLinear(((Fraction(1, 10), 0),))
    with pytest.raises(ValueError):
        PiecewiseLinear(((0, 0), (Fraction(1, 2), 1), (Fraction(1, 2), 2)))
    with pytest.raises(ValueError):
        PiecewiseLinear(((0, 0), (1, 1)))


@given(st.lists(st.tuples(st.fractions(0, 1, max_denominator=64), st.fractions(-2, 2, max_denominator=64)), min_size=1, max_size=12))
def test_pwl_continuous_and_periodic(raw):
    pts = {Fraction(0): raw[0][1]}
    for p, v in raw[1:]:
        if 0 < p < 1:
            pts[p] = v
    body = PiecewiseLinear(tuple(sorted(pts.items())))
    for p, v in body.points:
        assert body.value_at(p) == v
    assert body.value_at(1) == body.value_at(0)
    xs = sorted({Fraction(i, 97) for i in range(97)} | {p for p, _ in body.points})
    assert body.values_at(xs) == [body.value_at(x) for x in xs]


@given(st.fractions(0, 1, max_denominator=10 ** 6), st.integers(1, 5))
def test_trig_periodicity(u, k):
    body = TrigBody((TrigTerm(Fraction(1, 3), 2, Fraction(1, 5)), TrigTerm(Fraction(-1, 7), 3)))
    f = PeriodicFunction(Basis([]).rational(1), body)
    a, b = eval_periodic(f, at(u)), eval_periodic(f, at(u + k))
    assert abs(a.mid_fraction - b.mid_fraction) <= a.width + b.width
    ref = sum(
        mp_to_fraction(t.amp * mpmath.cos(2 * mpmath.pi * t.harmonic * mpmath.mpf(u.numerator) / u.denominator + mpmath.pi * mpmath.mpf(t.phase.numerator) / t.phase.denominator))
        for t in body.terms
    )
    assert abs(a.mid_fraction - ref) <= a.width + Fraction(1, 1 << 60)


def test_reduce_to_unit_period(basis):
    s2 = basis.gen("s2")
    f = PeriodicFunction(s2 / 2, H0)
    _, gamma = reduce_to_unit_period(f)
    assert gamma == s2
    _, gamma = reduce_to_unit_period(PeriodicFunction(basis.rational(2), H0))
    assert gamma == basis.rational(Fraction(1, 2))
    with pytest.raises(InverseNotRepresentable):
        reduce_to_unit_period(PeriodicFunction(basis.gen("pi"), H0))


def test_reduce_with_declared_reciprocal_root():
    b = Basis([IrrationalGenerator("s3", "sqrt", radicand=3), IrrationalGenerator("r3", "sqrt", radicand=Fraction(1, 3))])
    body = TrigBody((TrigTerm(Fraction(1, 2), 1, Fraction(1, 3)),))
    f = PeriodicFunction(b.gen("s3"), body)
    _, gamma = reduce_to_unit_period(f)
    assert gamma == b.gen("r3")
    rng = random.Random(3)
    for _ in range(100):
        t = Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 1000))
        iv = eval_function_at(f, b.rational(t), 64)
        u = mpmath.mpf(t.numerator) / t.denominator / mpmath.sqrt(3)
        ref = mp_to_fraction(mpmath.mpf(1) / 2 * mpmath.cos(2 * mpmath.pi * u + mpmath.pi / 3))
        assert abs(iv.mid_fraction - ref) <= iv.width / 2 + Fraction(1, 1 << 60)


def test_polynomial_arithmetic(basis):
    s2 = basis.gen("s2")
    P = PolynomialSR(basis, (s2, basis.rational(Fraction(1, 2))))
    assert P.degree == 2
    assert (P - P).is_zero()
    assert P.has_irrational_coefficient()
    assert not PolynomialSR.monomial(basis.rational(3), 4).has_irrational_coefficient()
    rat, terms = P.parts(3)
    assert rat == Fraction(9, 2) and dict(terms) == {"s2": 3}


def test_unit_arguments_need_linear_products(basis):
    f = PeriodicFunction(basis.gen("s3"), H0)
    arg = PolynomialSR.linear(basis.gen("s2"))
    cfg = ScalarConfig(basis, PolynomialSR.linear(basis.gen("s2")), (Perturbation(f, arg),))
    with pytest.raises((ProductNotRepresentable, InverseNotRepresentable)):
        cfg.unit_arguments()


@pytest.mark.parametrize("m", [1, 2, 3, 5, -1])
def test_rotation_numbers_linear(m):
    G = TorusMap((m,))
    assert rotation_numbers(G) == [m]
    assert winding_numeric(G, 0) == m


def test_numeric_winding_examples():
    assert numeric_winding([Fraction(5 * i, 64) % 1 for i in range(64)]) == 5
    with pytest.raises(GridTooCoarse):
        numeric_winding([Fraction(5 * i, 4) % 1 for i in range(4)])
    G = TorusMap((1,), (TrigBody((TrigTerm(Fraction(1, 10), 1, Fraction(-1, 2)),)),))
    assert numeric_winding(sample_section(G, 0, 64)) == 1


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_winding_additivity(w1, w2):
    bump = TrigBody((TrigTerm(Fraction(1, 20), 2),))
    G1, G2 = TorusMap((w1,), (bump,)), TorusMap((w2,))
    Gsum = TorusMap((w1 + w2,), (bump,))
    m = 64 * (abs(w1) + abs(w2) + 1)
    s1, s2 = sample_section(G1, 0, m), sample_section(G2, 0, m)
    summed = [Fraction(a.mid_fraction + b.mid_fraction) % 1 for a, b in zip(s1, s2)]
    assert numeric_winding(summed) == w1 + w2 == rotation_numbers(Gsum)[0]


def test_multivariable_terms_keep_winding():
    G = TorusMap((1, -2), (None, None), (MultiTrigTerm(Fraction(1, 20), (1, 1)),))
    assert [winding_numeric(G, v) for v in range(2)] == [1, -2]


def test_tor3_lift_winding(basis):
    s2 = basis.gen("s2")
    g = PeriodicFunction(s2 / 2, PiecewiseLinear(((0, 0), (Fraction(9, 10), Fraction(-9, 10)))))
    one = PolynomialSR.linear(basis.rational(1))
    cfg = ScalarConfig(basis, PolynomialSR.linear(s2), (Perturbation(g, one),))
    comp = tor3_lift(cfg)
    assert rotation_numbers(comp.G) == [1, 0]
    assert [winding_numeric(comp.G, v) for v in range(comp.G.arity)] == [1, 0]


def test_period_positive(basis):
    with pytest.raises(ValueError):
        PeriodicFunction(basis.rational(-1), H0)
    assert math.isclose(float(H0.lipschitz), 2.0)
