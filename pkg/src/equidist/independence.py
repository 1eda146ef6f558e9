"""Exact decision procedures for rational independence notions.

Every decision is linear algebra over the coordinates ``(1, g_1, ..., g_r)``
of the declared basis, and is therefore exact relative to the standing
assumption that ``{1}`` plus the basis generators are Q-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Sequence

from .exactnum import Basis, SymbolicReal, full_support_vector, kernel_full_support, rational_kernel
from .model import PolynomialSR

BASIS_ASSUMPTION = (
    "verdicts are exact relative to the declared basis and assume that 1 together with "
    "the declared generators is linearly independent over Q"
)

MAX_SUBSET_DIM = 20


class SubsetBlowup(ValueError):
    """Too many subsets to enumerate (more than 20 tuples)."""


@dataclass
class IndependenceVerdict:
    independent: bool
    witness: dict | None = None
    assumption: str = BASIS_ASSUMPTION

    def __bool__(self):
        return self.independent

    def to_json(self) -> dict:
        return {"independent": self.independent, "witness": _jsonable(self.witness), "assumption": self.assumption}


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, SymbolicReal):
        return x.to_json()
    if isinstance(x, PolynomialSR):
        return [[str(k), _jsonable(c)] for k, c in enumerate(x.coeffs, start=1) if not c.is_zero()]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _basis_of(items) -> Basis:
    for it in items:
        if isinstance(it, (SymbolicReal, PolynomialSR)):
            return it.basis
    raise ValueError("no basis-carrying values supplied")


def _columns_matrix(cols: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Transpose a list of coordinate columns into matrix rows."""
    nrows = len(cols[0])
    return [[c[i] for c in cols] for i in range(nrows)]


def _poly_coords(P: PolynomialSR, degree: int, irrational_only: bool) -> list[Fraction]:
    """Stacked basis coordinates of each coefficient for degrees 1..degree."""
    out: list[Fraction] = []
    z = P.basis.zero()
    for k in range(degree):
        c = P.coeffs[k] if k < P.degree else z
        co = c.coords()
        out.extend(co[1:] if irrational_only else co)
    return out


def _kernel(cols) -> list[tuple[int, ...]]:
    if not cols:
        return []
    M = _columns_matrix(cols)
    if not M:
        # no equations at all: everything is in the kernel
        n = len(cols)
        return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    return rational_kernel(M)


def rational_independence(xs: Sequence[SymbolicReal]) -> IndependenceVerdict:
    """Are 1, x_1, ..., x_d linearly independent over Q?

    The witness lists integer coefficients (c_1, ..., c_d) and c_0 for the
    constant with c_0 + sum c_i x_i = 0.
    """
    xs = list(xs)
    if not xs:
        return IndependenceVerdict(True)
    basis = _basis_of(xs)
    one = basis.rational(1)
    cols = [one.coords()] + [x.coords() for x in xs]
    ker = _kernel(cols)
    if not ker:
        return IndependenceVerdict(True)
    v = ker[0]
    witness = {"constant": v[0], "coefficients": list(v[1:])}
    return IndependenceVerdict(False, witness)


def q_independence_polys(Ps: Sequence[PolynomialSR]) -> IndependenceVerdict:
    """Q-independence: no nontrivial rational combination has all rational coefficients."""
    Ps = list(Ps)
    if not Ps:
        return IndependenceVerdict(True)
    basis = _basis_of(Ps)
    D = max((P.degree for P in Ps), default=0)
    if D == 0 or not basis.names:
        # every coefficient is rational (or all polynomials vanish)
        r = [0] * len(Ps)
        r[0] = 1
        return IndependenceVerdict(False, {"r": r, "rational_polynomial": Ps[0]})
    cols = [_poly_coords(P, D, irrational_only=True) for P in Ps]
    ker = _kernel(cols)
    if not ker:
        return IndependenceVerdict(True)
    r = ker[0]
    R = PolynomialSR(basis, ())
    for ri, P in zip(r, Ps):
        if ri:
            R = R + P.scale(ri)
    return IndependenceVerdict(False, {"r": list(r), "rational_polynomial": R})


def _subsets(d: int):
    for size in range(1, d + 1):
        yield from combinations(range(d), size)


def _check_blowup(d: int) -> None:
    if d > MAX_SUBSET_DIM:
        raise SubsetBlowup(f"{d} tuples means 2**{d} subsets; the cap is {MAX_SUBSET_DIM}")


def total_q_independence(tuples: Sequence[tuple[SymbolicReal, Sequence[SymbolicReal]]]) -> IndependenceVerdict:
    """Total Q-independence of (alpha_l, (beta_l1, ...)) tuples.

    A nonempty subset L violates it when sum_{l in L} a_l alpha_l, with all
    a_l nonzero integers, is a rational combination of 1 and the betas of L.
    Subsets are tried by size, then lexicographically; the first violating
    subset is returned with an explicit relation.
    """
    tuples = [(a, list(bs)) for a, bs in tuples]
    d = len(tuples)
    _check_blowup(d)
    if d == 0:
        return IndependenceVerdict(True)
    basis = _basis_of([t[0] for t in tuples])
    one = basis.rational(1)
    for lam in _subsets(d):
        cols = [tuples[i][0].coords() for i in lam]
        cols.append((-one).coords())
        beta_index = []
        for i in lam:
            for j, b in enumerate(tuples[i][1]):
                cols.append((-b).coords())
                beta_index.append((i, j))
        ker = _kernel(cols)
        k = len(lam)
        if ker and kernel_full_support(ker, range(k)):
            v = full_support_vector(ker, range(k))
            if v[0] < 0:
                v = tuple(-x for x in v)
            witness = {
                "subset": list(lam),
                "a": list(v[:k]),
                "r0": v[k],
                "r": [{"tuple": i, "beta": j, "coeff": c} for (i, j), c in zip(beta_index, v[k + 1:])],
            }
            return IndependenceVerdict(False, witness)
    return IndependenceVerdict(True)


def total_q_independence_polys(tuples: Sequence[tuple[PolynomialSR, Sequence[PolynomialSR]]]) -> IndependenceVerdict:
    """Polynomial total Q-independence.

    Subset L violates it when sum a_l P_l - sum r_lj P_lj has only rational
    coefficients for some all-nonzero integers a_l and rationals r_lj; the
    rational residue R is reported in the witness.
    """
    tuples = [(P, list(sib)) for P, sib in tuples]
    d = len(tuples)
    _check_blowup(d)
    if d == 0:
        return IndependenceVerdict(True)
    basis = _basis_of([t[0] for t in tuples])
    for lam in _subsets(d):
        polys = [tuples[i][0] for i in lam]
        sibs = []
        for i in lam:
            for j, Q in enumerate(tuples[i][1]):
                sibs.append(((i, j), Q))
        D = max([P.degree for P in polys] + [Q.degree for _, Q in sibs] + [1])
        cols = [_poly_coords(P, D, True) for P in polys] + [_poly_coords(-Q, D, True) for _, Q in sibs]
        k = len(lam)
        if not basis.names:
            ker = [tuple(1 if j == i else 0 for j in range(len(cols))) for i in range(len(cols))]
        else:
            ker = _kernel(cols)
        if ker and kernel_full_support(ker, range(k)):
            v = full_support_vector(ker, range(k))
            if v[0] < 0:
                v = tuple(-x for x in v)
            R = PolynomialSR(basis, ())
            for a, P in zip(v[:k], polys):
                R = R + P.scale(a)
            for c, (_, Q) in zip(v[k:], sibs):
                if c:
                    R = R - Q.scale(c)
            witness = {
                "subset": list(lam),
                "a": list(v[:k]),
                "r": [{"tuple": i, "sibling": j, "coeff": c} for ((i, j), _), c in zip(sibs, v[k:])],
                "rational_polynomial": R,
            }
            return IndependenceVerdict(False, witness)
    return IndependenceVerdict(True)


def substitute_total(tuples, witness: dict) -> SymbolicReal:
    """sum a_l alpha_l - r0 - sum r beta for a total-independence witness (zero iff sound)."""
    basis = _basis_of([t[0] for t in tuples])
    total = basis.rational(-Fraction(witness["r0"]))
    for i, a in zip(witness["subset"], witness["a"]):
        total = total + tuples[i][0] * a
    for e in witness["r"]:
        total = total - tuples[e["tuple"]][1][e["beta"]] * e["coeff"]
    return total


__all__ = [
    "BASIS_ASSUMPTION",
    "IndependenceVerdict",
    "SubsetBlowup",
    "rational_independence",
    "q_independence_polys",
    "total_q_independence",
    "total_q_independence_polys",
    "substitute_total",
]
