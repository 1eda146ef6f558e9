import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from equidist.exactnum import Basis, IrrationalGenerator
from equidist.independence import (
    SubsetBlowup,
    q_independence_polys,
    rational_independence,
    substitute_total,
    total_q_independence,
    total_q_independence_polys,
)
from equidist.model import PolynomialSR

GENS = ("s2", "s3", "s5")


def small_basis():
    return Basis([IrrationalGenerator(n, "sqrt", radicand=r) for n, r in zip(GENS, (2, 3, 5))])


def sr(basis, coords):
    """SymbolicReal from (rational, s2, s3, s5) coordinates."""
    x = basis.rational(coords[0])
    for name, c in zip(GENS, coords[1:]):
        if c:
            x = x + basis.gen(name, c)
    return x


def in_span(target, vectors) -> bool:
    """Is ``target`` a rational combination of ``vectors``? (sympy rank test)"""
    if not vectors:
        return all(t == 0 for t in target)
    A = sympy.Matrix([list(v) for v in vectors]).T
    B = A.row_join(sympy.Matrix(list(target)))
    return A.rank() == B.rank()


# -- rational independence ----------------------------------------------------------------------


def test_rational_examples(basis):
    s2, s3 = basis.gen("s2"), basis.gen("s3")
    assert rational_independence([s2]).independent
    v = rational_independence([s2, 1 + s2])
    assert not v.independent
    c = v.witness["coefficients"]
    assert c[0] == -c[1] and v.witness["constant"] == c[0]
    v = rational_independence([s2, s3, s2 + s3])
    assert not v.independent
    c = v.witness["coefficients"]
    assert tuple(x // c[0] for x in c) == (1, 1, -1)
    assert (s2 * c[0] + s3 * c[1] + (s2 + s3) * c[2]).is_zero()


def _brute_rational(xs, K=4):
    for cs in itertools.product(range(-K, K + 1), repeat=len(xs) + 1):
        if any(cs[1:]) or cs[0]:
            total = xs[0].basis.rational(cs[0])
            for c, x in zip(cs[1:], xs):
                total = total + x * c
            if total.is_zero():
                return cs
    return None


def test_rational_random_against_brute_force():
    b = small_basis()
    rng = random.Random(5)
    for _ in range(60):
        d = rng.randint(1, 3)
        xs = [sr(b, [rng.randint(-1, 1) for _ in range(4)]) for _ in range(d)]
        v = rational_independence(xs)
        brute = _brute_rational(xs)
        rank = sympy.Matrix([[1, 0, 0, 0]] + [list(x.coords()) for x in xs]).rank()
        assert v.independent == (rank == d + 1)
        if brute is not None:
            assert not v.independent
        if not v.independent:
            total = b.rational(v.witness["constant"])
            for c, x in zip(v.witness["coefficients"], xs):
                total = total + x * c
            assert total.is_zero()


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=4, max_size=4), min_size=1, max_size=4), st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_rational_monotone(rows, extra):
    b = small_basis()
    xs = [sr(b, r) for r in rows]
    more = rational_independence(xs + [sr(b, extra)])
    if not rational_independence(xs).independent:
        assert not more.independent
    if more.independent:
        assert rational_independence(xs[:-1]).independent


# -- Q-independence of polynomials ----------------------------------------------------------------


def test_poly_examples(basis):
    s2, s3, one = basis.gen("s2"), basis.gen("s3"), basis.rational(1)
    z = basis.zero()
    v = q_independence_polys([PolynomialSR(basis, (s2,)), PolynomialSR(basis, (one,))])
    assert not v.independent and v.witness["r"][0] == 0
    assert q_independence_polys([PolynomialSR(basis, (s2,)), PolynomialSR(basis, (z, s3))]).independent
    Ps = [PolynomialSR(basis, (s2,)), PolynomialSR(basis, (s2, basis.rational(Fraction(1, 2)))), PolynomialSR(basis, (z, one))]
    v = q_independence_polys(Ps)
    assert not v.independent
    assert not v.witness["rational_polynomial"].has_irrational_coefficient()
    brute = [
        r for r in itertools.product(range(-12, 13), repeat=3)
        if any(r) and not sum((P.scale(c) for c, P in zip(r, Ps) if c), PolynomialSR(basis, ())).has_irrational_coefficient()
    ]
    assert tuple(v.witness["r"]) in brute or tuple(-x for x in v.witness["r"]) in brute


def _brute_polys(Ps, K=3):
    basis = Ps[0].basis
    for r in itertools.product(range(-K, K + 1), repeat=len(Ps)):
        if any(r):
            R = PolynomialSR(basis, ())
            for c, P in zip(r, Ps):
                if c:
                    R = R + P.scale(c)
            if not R.has_irrational_coefficient():
                return r
    return None


def test_poly_random_against_brute_force():
    b = small_basis()
    rng = random.Random(13)
    for _ in range(40):
        Ps = []
        for _ in range(rng.randint(1, 3)):
            deg = rng.randint(1, 2)
            Ps.append(PolynomialSR(b, tuple(sr(b, [rng.randint(-1, 1) for _ in range(4)]) for _ in range(deg))))
        v = q_independence_polys(Ps)
        brute = _brute_polys(Ps)
        if brute is not None:
            assert not v.independent
        if not v.independent:
            assert not v.witness["rational_polynomial"].has_irrational_coefficient()
            if max(abs(x) for x in v.witness["r"]) <= 3:
                assert brute is not None


# -- total Q-independence -----------------------------------------------------------------------


def test_total_examples(basis):
    s2, s3, pi, pi2 = (basis.gen(n) for n in ("s2", "s3", "pi", "pi2"))
    assert total_q_independence([(s2, [s3]), (s3, [pi]), (pi2, [s2])]).independent
    v = total_q_independence([(s2, [s2])])
    assert not v.independent
    assert v.witness["a"] == [1] and v.witness["r"][0]["coeff"] == 1
    assert substitute_total([(s2, [s2])], v.witness).is_zero()


def _brute_total(tuples, K=3):
    """Smallest-subset violation by exhaustive a in [-K, K] \\ {0} and a span test for the betas."""
    basis = tuples[0][0].basis
    one = basis.rational(1).coords()
    for size in range(1, len(tuples) + 1):
        for lam in itertools.combinations(range(len(tuples)), size):
            span = [one] + [b.coords() for i in lam for b in tuples[i][1]]
            for a in itertools.product([k for k in range(-K, K + 1) if k], repeat=size):
                total = basis.zero()
                for c, i in zip(a, lam):
                    total = total + tuples[i][0] * c
                if in_span(total.coords(), span):
                    return lam
    return None


def test_total_random_against_brute_force():
    b = small_basis()
    rng = random.Random(21)
    for _ in range(40):
        d = rng.randint(1, 3)
        tuples = []
        for _ in range(d):
            alpha = sr(b, [rng.randint(-1, 1) for _ in range(4)])
            betas = [sr(b, [rng.randint(-1, 1) for _ in range(4)]) for _ in range(rng.randint(0, 2))]
            tuples.append((alpha, betas))
        v = total_q_independence(tuples)
        brute = _brute_total(tuples)
        if brute is not None:
            assert not v.independent
            assert len(v.witness["subset"]) <= len(brute)
        if not v.independent:
            assert substitute_total(tuples, v.witness).is_zero()
            assert all(a != 0 for a in v.witness["a"])
            if max(abs(a) for a in v.witness["a"]) <= 3:
                assert brute is not None


@settings(max_examples=40)
@given(st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_total_single_without_betas_is_rational_independence(coords):
    b = small_basis()
    x = sr(b, coords)
    assert total_q_independence([(x, [])]).independent == rational_independence([x]).independent


def test_total_subset_cap(basis):
    with pytest.raises(SubsetBlowup):
        total_q_independence([(basis.gen("s2"), [])] * 21)


def test_total_polys_examples(basis):
    s2, one = basis.gen("s2"), basis.rational(1)
    P = PolynomialSR(basis, (s2,))
    assert total_q_independence_polys([(P, [PolynomialSR(basis, (one,))])]).independent
    v = total_q_independence_polys([(P, [P])])
    assert not v.independent and v.witness["a"] == [1]
    assert v.witness["rational_polynomial"].is_zero()


def _brute_total_polys(tuples, K=2):
    basis = tuples[0][0].basis
    for size in range(1, len(tuples) + 1):
        for lam in itertools.combinations(range(len(tuples)), size):
            sibs = [Q for i in lam for Q in tuples[i][1]]
            D = max([tuples[i][0].degree for i in lam] + [Q.degree for Q in sibs] + [1])

            def irr(P):
                out = []
                for k in range(D):
                    c = P.coeffs[k] if k < P.degree else basis.zero()
                    out.extend(c.coords()[1:])
                return out

            span = [irr(Q) for Q in sibs]
            for a in itertools.product([k for k in range(-K, K + 1) if k], repeat=size):
                total = PolynomialSR(basis, ())
                for c, i in zip(a, lam):
                    total = total + tuples[i][0].scale(c)
                if in_span(irr(total), span):
                    return lam
    return None


def test_total_polys_random_against_brute_force():
    b = small_basis()
    rng = random.Random(34)
    for _ in range(30):
        tuples = []
        for _ in range(rng.randint(1, 2)):
            P = PolynomialSR(b, tuple(sr(b, [rng.randint(-1, 1) for _ in range(4)]) for _ in range(rng.randint(1, 2))))
            sibs = [PolynomialSR(b, (sr(b, [rng.randint(-1, 1) for _ in range(4)]),)) for _ in range(rng.randint(0, 2))]
            tuples.append((P, sibs))
        v = total_q_independence_polys(tuples)
        brute = _brute_total_polys(tuples)
        if brute is not None:
            assert not v.independent
        if not v.independent:
            assert not v.witness["rational_polynomial"].has_irrational_coefficient()
            if max(abs(a) for a in v.witness["a"]) <= 2:
                assert brute is not None


def test_verdict_json_states_assumption(basis):
    out = rational_independence([basis.gen("s2")]).to_json()
    assert out["independent"] is True and "basis" in out["assumption"].lower()
