"""Polynomials, periodic perturbations, torus maps and experiment configurations.

Periodic bodies are stored in unit-period coordinates: a function ``f`` of
period ``beta`` is kept as ``g`` with ``f(t) = g(t / beta)``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .exactnum import (
    Affine,
    Basis,
    FixedInterval,
    InverseNotRepresentable,
    ProductNotRepresentable,
    SymbolicReal,
    _cdiv,
    as_fraction,
    cos_turns,
    turns_from_radians,
)


class GridTooCoarse(ValueError):
    """A lifted increment of size >= 1/4 was observed; refine the sample grid."""


# -- polynomials -----------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialSR:
    """Polynomial without constant term; ``coeffs[k]`` multiplies x**(k+1)."""

    basis: Basis = field(compare=False, repr=False)
    coeffs: tuple[SymbolicReal, ...] = ()

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def monomial(cls, coeff: SymbolicReal, degree: int = 1) -> "PolynomialSR":
        if degree < 1:
            raise ValueError("degree must be >= 1 (no constant terms)")
        z = coeff.basis.zero()
        return cls(coeff.basis, (z,) * (degree - 1) + (coeff,))

    @classmethod
    def linear(cls, coeff: SymbolicReal) -> "PolynomialSR":
        return cls.monomial(coeff, 1)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def has_irrational_coefficient(self) -> bool:
        return any(not c.is_rational() for c in self.coeffs)

    def __add__(self, other: "PolynomialSR") -> "PolynomialSR":
        n = max(self.degree, other.degree)
        z = self.basis.zero()
        a = self.coeffs + (z,) * (n - self.degree)
        b = other.coeffs + (z,) * (n - other.degree)
        return PolynomialSR(self.basis, tuple(x + y for x, y in zip(a, b)))

    def __neg__(self):
        return PolynomialSR(self.basis, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "PolynomialSR":
        """Multiply by a SymbolicReal or rational; raises ProductNotRepresentable."""
        return PolynomialSR(self.basis, tuple(c * s for c in self.coeffs))

    __mul__ = scale
    __rmul__ = scale

    def parts(self, n: int) -> tuple[Fraction, tuple[tuple[str, Fraction], ...]]:
        """P(n) split as (rational part, ((generator, coefficient), ...))."""
        rat = Fraction(0)
        gens: dict[str, Fraction] = {}
        p = 1
        for c in self.coeffs:
            p *= n
            if c.rational:
                rat += c.rational * p
            for name, v in c.terms:
                gens[name] = gens.get(name, Fraction(0)) + v * p
        return rat, tuple((k, v) for k, v in gens.items() if v)

    def value(self, n: int) -> SymbolicReal:
        rat, terms = self.parts(n)
        return SymbolicReal(self.basis, rat, terms)

    def __str__(self):
        if not self.coeffs:
            return "0"
        out = []
        for k, c in enumerate(self.coeffs, start=1):
            if c.is_zero():
                continue
            mono = "x" if k == 1 else f"x^{k}"
            out.append(f"({c})*{mono}")
        return " + ".join(out)


# -- periodic bodies -------------------------------------------------------------------


@dataclass(frozen=True)
class TrigTerm:
    """``amp * cos(2*pi*harmonic*u + pi*phase + phase_rad)`` in unit coordinates.

    ``phase_rad`` is an extra phase in radians, needed for offsets such as
    ``cos(t + 1)`` that are not rational multiples of pi.
    """

    amp: Fraction
    harmonic: int = 1
    phase: Fraction = Fraction(0)
    phase_rad: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "amp", as_fraction(self.amp))
        object.__setattr__(self, "phase", as_fraction(self.phase))
        object.__setattr__(self, "phase_rad", as_fraction(self.phase_rad))
        if self.harmonic < 0:
            raise ValueError("harmonic must be a nonnegative integer")


@dataclass(frozen=True)
class TrigBody:
    terms: tuple[TrigTerm, ...]

    @property
    def bound(self) -> Fraction:
        return sum((abs(t.amp) for t in self.terms), Fraction(0))

    @property
    def lipschitz(self) -> Fraction:
        """Bound on |d/du| in unit coordinates (per turn)."""
        return sum((abs(t.amp) * t.harmonic * 7 for t in self.terms), Fraction(0))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous 1-periodic piecewise-linear body.

    ``points`` are (position, value) with positions strictly increasing in
    [0, 1) and starting at 0; the last segment returns linearly to the
    value at 0 at position 1.
    """

    points: tuple[tuple[Fraction, Fraction], ...]
    _scaled: dict = field(default_factory=dict, init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        pts = tuple((as_fraction(p), as_fraction(v)) for p, v in self.points)
        if not pts or pts[0][0] != 0:
            raise ValueError("piecewise-linear body must start at position 0")
        for (p0, _), (p1, _) in zip(pts, pts[1:]):
            if not p0 < p1:
                raise ValueError("breakpoints must be strictly increasing")
        if pts[-1][0] >= 1:
            raise ValueError("breakpoint positions must lie in [0, 1)")
        object.__setattr__(self, "points", pts)

    @property
    def knots(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Breakpoints with the closing knot (1, value at 0) appended."""
        k = self._scaled.get("knots")
        if k is None:
            k = self.points + ((Fraction(1), self.points[0][1]),)
            self._scaled["knots"] = k
        return k

    def value_at(self, x) -> Fraction:
        """Exact value at a rational argument (taken mod 1)."""
        x = as_fraction(x) % 1
        k = self.knots
        pos = self._positions()
        i = bisect.bisect_right(pos, x) - 1
        (p0, v0), (p1, v1) = k[i], k[i + 1]
        if x == p0:
            return v0
        return v0 + (v1 - v0) * (x - p0) / (p1 - p0)

    def values_at(self, xs: Sequence) -> list[Fraction]:
        """Exact values at increasing arguments in [0, 1) by a single merged sweep."""
        k = self.knots
        out = []
        i = 0
        for x in xs:
            x = as_fraction(x)
            while k[i + 1][0] <= x:
                i += 1
            (p0, v0), (p1, v1) = k[i], k[i + 1]
            out.append(v0 if x == p0 else v0 + (v1 - v0) * (x - p0) / (p1 - p0))
        return out

    def _positions(self) -> list[Fraction]:
        pos = self._scaled.get("pos")
        if pos is None:
            pos = [p for p, _ in self.points] + [Fraction(1)]
            self._scaled["pos"] = pos
        return pos

    def segment_slopes(self) -> tuple[Fraction, ...]:
        k = self.knots
        return tuple((v1 - v0) / (p1 - p0) for (p0, v0), (p1, v1) in zip(k, k[1:]))

    def range_on(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        """Exact (min, max) over [lo, hi] with 0 <= lo <= hi <= 1."""
        vals = [self.value_at(lo) if lo < 1 else self.points[0][1], self.value_at(hi) if hi < 1 else self.points[0][1]]
        pos = self._positions()
        i = bisect.bisect_right(pos, lo)
        while i < len(self.points) and self.points[i][0] < hi:
            vals.append(self.points[i][1])
            i += 1
        return min(vals), max(vals)

    @property
    def bound(self) -> Fraction:
        return max(abs(v) for _, v in self.points)

    @property
    def lipschitz(self) -> Fraction:
        return max(abs(s) for s in self.segment_slopes())

    def to_json(self) -> list:
        return [[str(p), str(v)] for p, v in self.points]


Body = Union[TrigBody, PiecewiseLinear]


def _scaled_knots(body: PiecewiseLinear, W: int) -> tuple[list[int], list[int], tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Ceil and floor of knot positions at scale W, slopes and intercepts (cached per body)."""
    hit = body._scaled.get(W)
    if hit is not None:
        return hit
    k = body.knots
    ceil_pos = [_cdiv(p.numerator << W, p.denominator) for p, _ in k]
    floor_pos = [(p.numerator << W) // p.denominator for p, _ in k]
    slopes = body.segment_slopes()
    intercepts = tuple(v - s * p for (p, v), s in zip(k, slopes))
    out = (ceil_pos, floor_pos, slopes, intercepts)
    body._scaled[W] = out
    return out


def _hull_affine(lo: Fraction, hi: Fraction, W: int) -> Affine:
    mid2 = (lo + hi) * (1 << W)
    mid = math.floor(mid2 / 2)
    rad = math.ceil(max(hi * (1 << W) - mid, mid - lo * (1 << W))) + 1
    return Affine(W, mid, {}, rad)


def pwl_affine(body: PiecewiseLinear, x: Affine) -> Affine:
    """Evaluate on an affine argument already reduced to [0, 1)."""
    W = x.scale
    one = 1 << W
    r = x.radius
    lo, hi = x.mid - r, x.mid + r
    if 0 <= lo and hi <= one:
        ceil_pos, floor_pos, slopes, intercepts = _scaled_knots(body, W)
        i = bisect.bisect_right(ceil_pos, lo) - 1
        i = min(i, len(slopes) - 1)
        if hi <= floor_pos[i + 1]:
            return x.mul_rational(slopes[i]).add_fraction(intercepts[i])
        vmin, vmax = body.range_on(Fraction(lo, one), Fraction(hi, one))
        return _hull_affine(vmin, vmax, W)
    # enclosure crosses the seam: hull over both sides
    flo = Fraction(lo, one) % 1
    fhi = Fraction(hi, one) % 1
    if hi - lo >= one:
        a, b = body.range_on(Fraction(0), Fraction(1))
    else:
        a1, b1 = body.range_on(flo, Fraction(1))
        a2, b2 = body.range_on(Fraction(0), fhi)
        a, b = min(a1, a2), max(b1, b2)
    return _hull_affine(a, b, W)


def _phase_turns(term: TrigTerm, W: int) -> tuple[int, int]:
    """(phase*pi + phase_rad) / (2*pi) at scale W."""
    half = term.phase / 2
    num = half.numerator << W
    mid = num // half.denominator
    rad = 0 if mid * half.denominator == num else 1
    if term.phase_rad:
        m, r = turns_from_radians(term.phase_rad, W)
        mid += m
        rad += r
    return mid, rad


def trig_affine(body: TrigBody, x: Affine) -> Affine:
    W = x.scale
    xm, xr = x.mid, x.radius
    total = Affine(W, 0, {}, 0)
    for t in body.terms:
        if t.amp == 0:
            continue
        pm, pr = _phase_turns(t, W)
        theta = t.harmonic * xm + pm
        theta_rad = t.harmonic * xr + pr
        c, cr = cos_turns(theta, theta_rad, W)
        total = total + Affine(W, c, {}, cr).mul_rational(t.amp)
    return total


def body_affine(body: Body, x: Affine) -> Affine:
    if isinstance(body, PiecewiseLinear):
        return pwl_affine(body, x)
    return trig_affine(body, x)


@dataclass(frozen=True)
class PeriodicFunction:
    """f(t) = body(t / period); the body lives on the unit period."""

    period: SymbolicReal
    body: Body

    def __post_init__(self):
        p = self.period
        if p.is_rational() and p.rational <= 0:
            raise ValueError("period must be positive")

    @property
    def basis(self) -> Basis:
        return self.period.basis

    @property
    def is_pwl(self) -> bool:
        return isinstance(self.body, PiecewiseLinear)


def reduce_to_unit_period(f: PeriodicFunction) -> tuple[PeriodicFunction, SymbolicReal]:
    """(g, gamma) with g(x) = f(beta x) of period 1 and gamma = 1/beta."""
    gamma = f.basis.reciprocal(f.period)
    return PeriodicFunction(f.basis.rational(1), f.body), gamma


def eval_periodic(f: PeriodicFunction, x: FixedInterval) -> FixedInterval:
    """Enclosure of the body at unit-period coordinate ``x`` (i.e. f(beta*x)).

    Piecewise-linear bodies use the segment formula when the enclosure lies in
    one segment and the exact hull otherwise; trig bodies use argument
    reduction and a validated cosine.
    """
    W = max(x.scale_bits, 64) + 8
    a = Affine.from_interval(x, W).reduce_mod1()
    v = body_affine(f.body, a)
    return v.to_interval(W - 4)


def eval_function_at(f: PeriodicFunction, t: SymbolicReal, F: int = 64) -> FixedInterval:
    """Enclosure of f(t) for a symbolic argument t."""
    _, gamma = reduce_to_unit_period(f)
    u = t * gamma
    from .exactnum import affine_combination, max_bits, PrecisionUnavailable

    W = F + 32 + max(1, abs(u.rational).numerator.bit_length())
    while W <= max_bits():
        a = affine_combination(u.basis, u.rational % 1, u.terms, W).reduce_mod1()
        v = body_affine(f.body, a)
        iv = v.to_interval(F + 2)
        if iv.radius <= 2:
            return iv
        W += 32
    raise PrecisionUnavailable("cannot certify periodic value within the precision cap")


# -- torus maps --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiTrigTerm:
    """``amp * cos(2*pi*sum(k_j x_j) + pi*phase)`` on the torus."""

    amp: Fraction
    ks: tuple[int, ...]
    phase: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "amp", as_fraction(self.amp))
        object.__setattr__(self, "phase", as_fraction(self.phase))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))


@dataclass(frozen=True)
class TorusMap:
    """(x_1..x_nu) -> sum w_j x_j + sum_j r_j(x_j) + multivariable trig terms (mod 1)."""

    winding: tuple[int, ...]
    residuals: tuple[Body | None, ...] = ()
    multi: tuple[MultiTrigTerm, ...] = ()

    def __post_init__(self):
        w = tuple(int(v) for v in self.winding)
        object.__setattr__(self, "winding", w)
        res = tuple(self.residuals) or (None,) * len(w)
        if len(res) != len(w):
            raise ValueError("one residual slot per variable required")
        object.__setattr__(self, "residuals", res)
        for m in self.multi:
            if len(m.ks) != len(w):
                raise ValueError("multivariable term arity mismatch")

    @property
    def arity(self) -> int:
        return len(self.winding)

    def value_affine(self, xs: Sequence[Affine]) -> Affine:
        W = xs[0].scale if xs else 64
        total = Affine(W, 0, {}, 0)
        for w, body, x in zip(self.winding, self.residuals, xs):
            if w:
                total = total + x.mul_int(w)
            if body is not None:
                total = total + body_affine(body, x)
        for m in self.multi:
            theta = Affine(W, 0, {}, 0)
            for k, x in zip(m.ks, xs):
                if k:
                    theta = theta + x.mul_int(k)
            total = total + trig_affine(TrigBody((TrigTerm(m.amp, 1, m.phase),)), theta.collapse())
        return total

    def value_at(self, xs: Sequence, W: int = 96) -> FixedInterval:
        """Enclosure of the map value (reduced mod 1) at rational points."""
        aff = [Affine.exact(as_fraction(x) % 1, W) for x in xs]
        return self.value_affine(aff).frac_interval(W - 4)


def rotation_numbers(G: TorusMap) -> list[int]:
    return list(G.winding)


def numeric_winding(samples: Sequence) -> int:
    """Winding number of a closed loop of circle values via lifted increments."""
    vals = [s.mid_fraction if isinstance(s, FixedInterval) else as_fraction(s) for s in samples]
    if len(vals) < 2:
        raise GridTooCoarse("need at least two samples")
    total = Fraction(0)
    quarter = Fraction(1, 4)
    for i in range(len(vals)):
        d = vals[(i + 1) % len(vals)] - vals[i]
        d = (d + Fraction(1, 2)) % 1 - Fraction(1, 2)
        if abs(d) >= quarter:
            raise GridTooCoarse(f"increment {float(d):.4f} at sample {i} is >= 1/4")
        total += d
    if total.denominator != 1:
        raise ArithmeticError("lifted increments do not close up to an integer")
    return int(total)


def sample_section(G: TorusMap, var: int, m: int, base: Sequence | None = None) -> list[FixedInterval]:
    """Values of G along the loop x_var in {0, 1/m, ..., (m-1)/m}, others fixed."""
    base = list(base) if base is not None else [Fraction(0)] * G.arity
    out = []
    for i in range(m):
        xs = list(base)
        xs[var] = Fraction(i, m)
        out.append(G.value_at(xs))
    return out


def winding_numeric(G: TorusMap, var: int, m: int = 256) -> int:
    """Numeric winding in variable ``var``, refining the grid on GridTooCoarse."""
    while True:
        try:
            return numeric_winding(sample_section(G, var, m))
        except GridTooCoarse:
            if m > 1 << 16:
                raise
            m *= 2


# -- configurations ------------------------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    f: PeriodicFunction
    arg: PolynomialSR


@dataclass(frozen=True)
class ScalarConfig:
    """{P0(n) + sum f_j(P_j(n))}."""

    basis: Basis = field(repr=False)
    p0: PolynomialSR
    perturbations: tuple[Perturbation, ...] = ()
    provenance: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "perturbations", tuple(self.perturbations))

    @property
    def dim(self) -> int:
        return 1

    def unit_arguments(self) -> list[tuple[PolynomialSR, Body]]:
        """Each perturbation as (gamma_j * P_j, unit-period body)."""
        out = []
        for p in self.perturbations:
            _, gamma = reduce_to_unit_period(p.f)
            try:
                out.append((p.arg.scale(gamma), p.f.body))
            except ProductNotRepresentable as exc:
                raise ProductNotRepresentable(
                    f"gamma*P for period {p.f.period} and argument {p.arg} is not linear over the basis"
                ) from exc
        return out


@dataclass(frozen=True)
class VectorConfig:
    basis: Basis = field(repr=False)
    components: tuple[ScalarConfig, ...]
    provenance: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("vector config needs at least one component")

    @property
    def dim(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class TorusComponent:
    G: TorusMap
    args: tuple[PolynomialSR, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.G.arity:
            raise ValueError("argument count must match torus map arity")

    def combination(self) -> PolynomialSR:
        """sum_j w_j P_j (the polynomial governing density)."""
        basis = self.args[0].basis if self.args else None
        total = PolynomialSR(basis, ())
        for w, P in zip(self.G.winding, self.args):
            if w:
                total = total + P.scale(w)
        return total


@dataclass(frozen=True)
class TorusConfig:
    basis: Basis = field(repr=False)
    components: tuple[TorusComponent, ...]
    provenance: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("torus config needs at least one component")

    @property
    def dim(self) -> int:
        return len(self.components)


Config = Union[ScalarConfig, VectorConfig, TorusConfig]


def tor3_lift(cfg: ScalarConfig) -> TorusComponent:
    """Torus form G(x0, x1..) = x0 + sum g_j(x_j) with arguments (P0, gamma_j P_j)."""
    units = cfg.unit_arguments()
    G = TorusMap((1,) + (0,) * len(units), (None,) + tuple(b for _, b in units))
    return TorusComponent(G, (cfg.p0,) + tuple(P for P, _ in units))


def lift_config(cfg: ScalarConfig | VectorConfig) -> TorusConfig:
    comps = [cfg] if isinstance(cfg, ScalarConfig) else list(cfg.components)
    return TorusConfig(cfg.basis, tuple(tor3_lift(c) for c in comps), cfg.provenance)


__all__ = [
    "GridTooCoarse",
    "PolynomialSR",
    "TrigTerm",
    "TrigBody",
    "PiecewiseLinear",
    "PeriodicFunction",
    "MultiTrigTerm",
    "TorusMap",
    "Perturbation",
    "ScalarConfig",
    "VectorConfig",
    "TorusComponent",
    "TorusConfig",
    "Config",
    "reduce_to_unit_period",
    "eval_periodic",
    "eval_function_at",
    "rotation_numbers",
    "numeric_winding",
    "sample_section",
    "winding_numeric",
    "tor3_lift",
    "lift_config",
    "InverseNotRepresentable",
]
