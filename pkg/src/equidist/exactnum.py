"""Exact and validated arithmetic.

Rationals are :class:`fractions.Fraction`.  Irrational constants live in a
declared :class:`Basis`; a :class:`SymbolicReal` is an exact rational linear
combination of ``1`` and the basis generators.  Numerical values are carried
as fixed-point enclosures (:class:`FixedInterval`) and, inside evaluation
pipelines, as first-order affine forms (:class:`Affine`) whose noise symbols
are the basis generators, so that identical generator errors cancel exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "PrecisionUnavailable",
    "InverseNotRepresentable",
    "ProductNotRepresentable",
    "IrrationalGenerator",
    "Basis",
    "SymbolicReal",
    "FixedInterval",
    "Affine",
    "max_bits",
    "eval_interval",
    "frac_scaled",
    "rational_kernel",
    "kernel_full_support",
    "full_support_vector",
    "detect_integer_relation",
    "pi_fixed",
    "cos_turns",
    "as_fraction",
]


class PrecisionUnavailable(ArithmeticError):
    """Requested accuracy cannot be certified (decimal literal too short or bit cap hit)."""


class InverseNotRepresentable(ValueError):
    pass


class ProductNotRepresentable(ValueError):
    pass


def max_bits() -> int:
    """Working-precision cap, from ``EQUIDIST_MAX_BITS`` (default 4096)."""
    return int(os.environ.get("EQUIDIST_MAX_BITS", "4096"))


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, Decimal):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


# -- integer rounding helpers ------------------------------------------------


def _rdiv(a: int, b: int) -> int:
    """a/b rounded half away from zero (odd-symmetric), b > 0."""
    q, r = divmod(abs(a), b)
    if 2 * r >= b:
        q += 1
    return q if a >= 0 else -q


def _cdiv(a: int, b: int) -> int:
    return -((-a) // b)


def _round_shift(mid: int, rad: int, s: int) -> tuple[int, int]:
    """Rescale (mid, rad) down by 2**s keeping an outward enclosure."""
    if s <= 0:
        return mid << (-s), rad << (-s)
    unit = 1 << s
    new_mid = _rdiv(mid, unit)
    exact = rad == 0 and new_mid * unit == mid
    if exact:
        return new_mid, 0
    # |mid - new_mid*unit| <= unit/2
    err = abs(mid - new_mid * unit) + rad
    return new_mid, _cdiv(err, unit)


def _frac_to_fixed(q: Fraction, W: int) -> tuple[int, int]:
    num = q.numerator << W
    mid = _rdiv(num, q.denominator)
    return mid, (0 if mid * q.denominator == num else 1)


# -- pi ----------------------------------------------------------------------


def _arctan_inv(x: int, P: int) -> tuple[int, int]:
    """arctan(1/x) at scale P; returns (value, error bound in ulps)."""
    one = 1 << P
    power = one // x
    total = power
    x2 = x * x
    k = 1
    terms = 1
    while power:
        power //= x2
        term = power // (2 * k + 1)
        total = total - term if k % 2 else total + term
        k += 1
        terms += 1
    return total, 2 * terms + 2


@lru_cache(maxsize=64)
def pi_fixed(W: int) -> tuple[int, int]:
    """Enclosure of pi at scale W via Machin's formula: (mid, rad)."""
    guard = 24 + W.bit_length()
    P = W + guard
    a5, e5 = _arctan_inv(5, P)
    a239, e239 = _arctan_inv(239, P)
    mid = 16 * a5 - 4 * a239
    rad = 16 * e5 + 4 * e239
    return _round_shift(mid, rad, guard)


def _fixed_mul(a: int, ra: int, b: int, rb: int, W: int) -> tuple[int, int]:
    p = a * b
    mid = _rdiv(p, 1 << W)
    spread = abs(a) * rb + abs(b) * ra + ra * rb
    rad = _cdiv(spread, 1 << W) + (0 if mid << W == p else 1)
    return mid, rad


def _fixed_div(a: int, ra: int, b: int, rb: int, W: int) -> tuple[int, int]:
    """(a/b) at scale W for scale-W inputs, b bounded away from zero."""
    if abs(b) <= rb:
        raise ZeroDivisionError("divisor interval contains zero")
    mid = _rdiv(a << W, b)
    # |a/b - (a±ra)/(b±rb)| <= (ra*|b| + rb*|a|) / (|b|(|b|-rb))
    lo_den = abs(b) * (abs(b) - rb)
    rad = _cdiv((ra * abs(b) + rb * abs(a)) << W, lo_den) + 1
    return mid, rad


# -- generators and basis -----------------------------------------------------


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    if _is_square(q.numerator) and _is_square(q.denominator):
        return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))
    return None


@dataclass(frozen=True)
class IrrationalGenerator:
    """A named irrational constant.

    ``kind`` is ``"sqrt"`` (payload ``radicand``), ``"pi"`` (``power``, any
    nonzero integer, so pi**2 and 1/pi can be declared as their own
    generators) or ``"decimal"`` (``digits`` accurate to ``bits`` bits).
    """

    name: str
    kind: str
    radicand: Fraction | None = None
    power: int = 1
    digits: str | None = None
    bits: int = 0

    def __post_init__(self):
        if not self.name or self.name == "1":
            raise ValueError("generator name must be a non-empty identifier other than '1'")
        if self.kind == "sqrt":
            if self.radicand is not None:
                object.__setattr__(self, "radicand", as_fraction(self.radicand))
            if self.radicand is None or self.radicand <= 0:
                raise ValueError(f"{self.name}: sqrt radicand must be positive")
            if _rational_sqrt(self.radicand) is not None:
                raise ValueError(f"{self.name}: sqrt({self.radicand}) is rational")
        elif self.kind == "pi":
            if self.power == 0:
                raise ValueError(f"{self.name}: pi power must be nonzero")
        elif self.kind == "decimal":
            if self.digits is None:
                raise ValueError(f"{self.name}: decimal generator needs digits")
            Decimal(self.digits)
            if self.bits < 64:
                raise ValueError(f"{self.name}: decimal precision must be at least 64 bits")
        else:
            raise ValueError(f"{self.name}: unknown generator kind {self.kind!r}")

    @property
    def decimal_value(self) -> Fraction:
        return Fraction(Decimal(self.digits))

    def fixed(self, W: int) -> tuple[int, int]:
        """(mid, rad) at scale W enclosing the generator's value."""
        if self.kind == "sqrt":
            q = self.radicand
            f = math.isqrt((q.numerator << (2 * W)) // q.denominator)
            return f, 1
        if self.kind == "pi":
            k = abs(self.power)
            guard = 8 + 2 * k.bit_length() + 4 * k
            P = W + guard
            pm, pr = pi_fixed(P)
            m, r = pm, pr
            for _ in range(k - 1):
                m, r = _fixed_mul(m, r, pm, pr, P)
            if self.power < 0:
                m, r = _fixed_div(1 << P, 0, m, r, P)
            return _round_shift(m, r, guard)
        v = self.decimal_value
        mid, r = _frac_to_fixed(v, W)
        slack = _cdiv(1 << W, 1 << self.bits) if W >= self.bits else 1
        return mid, r + slack

    def to_json(self) -> dict:
        if self.kind == "sqrt":
            return {"name": self.name, "kind": "sqrt", "of": str(self.radicand)}
        if self.kind == "pi":
            d = {"name": self.name, "kind": "pi"}
            if self.power != 1:
                d["power"] = self.power
            return d
        return {"name": self.name, "kind": "decimal", "digits": self.digits, "bits": self.bits}

    @classmethod
    def from_json(cls, d: Mapping) -> "IrrationalGenerator":
        kind = d.get("kind")
        if kind == "sqrt":
            return cls(d["name"], "sqrt", radicand=as_fraction(d["of"]))
        if kind == "pi":
            return cls(d["name"], "pi", power=int(d.get("power", 1)))
        if kind == "decimal":
            return cls(d["name"], "decimal", digits=str(d["digits"]), bits=int(d["bits"]))
        raise ValueError(f"unknown generator kind {kind!r}")


class Basis:
    """Declared irrational basis.

    The standing assumption is that ``{1}`` together with the canonical
    generators is linearly independent over Q.  This holds provably for
    square roots with pairwise non-square ratios and powers of pi; decimal
    literals are taken on trust.  A square-root generator whose ratio with an
    earlier one is a rational square is stored as an alias of that earlier
    generator (``sqrt(1/3)`` becomes ``(1/3)*sqrt(3)``).
    """

    def __init__(self, generators: Iterable[IrrationalGenerator] = ()):
        self.generators: tuple[IrrationalGenerator, ...] = tuple(generators)
        self._by_name: dict[str, IrrationalGenerator] = {}
        self._alias: dict[str, tuple[str, Fraction]] = {}
        names: list[str] = []
        for g in self.generators:
            if g.name in self._by_name:
                raise ValueError(f"duplicate generator name {g.name!r}")
            self._by_name[g.name] = g
            target = None
            for other in names:
                h = self._by_name[other]
                if g.kind == "sqrt" and h.kind == "sqrt":
                    factor = _rational_sqrt(g.radicand / h.radicand)
                    if factor is not None:
                        target = (other, factor)
                        break
                if g.kind == "pi" and h.kind == "pi" and g.power == h.power:
                    target = (other, Fraction(1))
                    break
            if target is None:
                names.append(g.name)
            else:
                self._alias[g.name] = target
        self.names: tuple[str, ...] = tuple(names)
        self._index = {n: i for i, n in enumerate(self.names)}
        self._cache: dict[tuple[str, int], tuple[int, int]] = {}

    def __eq__(self, other):
        return isinstance(other, Basis) and self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __repr__(self):
        return f"Basis({', '.join(g.name for g in self.generators)})"

    def __getitem__(self, name: str) -> IrrationalGenerator:
        return self._by_name[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def gen(self, name: str, coeff=1) -> "SymbolicReal":
        c = as_fraction(coeff)
        if name in self._alias:
            target, factor = self._alias[name]
            return SymbolicReal(self, Fraction(0), ((target, c * factor),))
        if name not in self._index:
            raise KeyError(f"undeclared generator {name!r}")
        return SymbolicReal(self, Fraction(0), ((name, c),))

    def rational(self, q) -> "SymbolicReal":
        return SymbolicReal(self, as_fraction(q), ())

    def zero(self) -> "SymbolicReal":
        return SymbolicReal(self, Fraction(0), ())

    def value_fixed(self, name: str, W: int) -> tuple[int, int]:
        key = (name, W)
        v = self._cache.get(key)
        if v is None:
            v = self._by_name[name].fixed(W)
            self._cache[key] = v
        return v

    def check_decimal_bits(self, names: Iterable[str], needed: int) -> None:
        for n in names:
            g = self._by_name[n]
            if g.kind == "decimal" and g.bits < needed:
                raise PrecisionUnavailable(
                    f"generator {n!r} declares {g.bits} bits, {needed} required"
                )

    def reciprocal(self, x: "SymbolicReal") -> "SymbolicReal":
        """Exact 1/x when expressible over this basis.

        Handles nonzero rationals, a single square-root or pi-power term (the
        latter when the opposite power is declared), and two-term forms
        ``c + a*sqrt(r)`` or ``a*sqrt(r) + b*sqrt(s)`` via conjugates.
        """
        if x.is_zero():
            raise InverseNotRepresentable("reciprocal of zero")
        terms = x.terms
        if not terms:
            return self.rational(1 / x.rational)
        if len(terms) == 1 and x.rational == 0:
            (name, c), = terms
            g = self._by_name[name]
            if g.kind == "sqrt":
                return self.gen(name, 1 / (c * g.radicand))
            if g.kind == "pi":
                for other in self.names:
                    h = self._by_name[other]
                    if h.kind == "pi" and h.power == -g.power:
                        return self.gen(other, 1 / c)
            raise InverseNotRepresentable(f"1/({x}) needs a declared reciprocal generator")
        if len(terms) == 1:
            (name, a), = terms
            g = self._by_name[name]
            if g.kind == "sqrt":
                c = x.rational
                den = c * c - a * a * g.radicand
                return (self.rational(c) - self.gen(name, a)) * (1 / den)
        if len(terms) == 2 and x.rational == 0:
            (n1, a), (n2, b) = terms
            g1, g2 = self._by_name[n1], self._by_name[n2]
            if g1.kind == "sqrt" and g2.kind == "sqrt":
                den = a * a * g1.radicand - b * b * g2.radicand
                return (self.gen(n1, a) - self.gen(n2, b)) * (1 / den)
        raise InverseNotRepresentable(f"1/({x}) is not expressible over {self!r}")

    def to_json(self) -> list:
        return [g.to_json() for g in self.generators]

    @classmethod
    def from_json(cls, items: Sequence[Mapping]) -> "Basis":
        return cls(IrrationalGenerator.from_json(d) for d in items)


@dataclass(frozen=True)
class SymbolicReal:
    """rational + sum(coeff * generator), exact, over a declared basis."""

    basis: Basis = field(compare=False, repr=False)
    rational: Fraction
    terms: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        order = self.basis._index
        cleaned = {}
        for name, c in self.terms:
            if name not in order:
                raise KeyError(f"term on non-canonical generator {name!r}")
            cleaned[name] = cleaned.get(name, Fraction(0)) + as_fraction(c)
        items = tuple(sorted(((n, c) for n, c in cleaned.items() if c != 0), key=lambda t: order[t[0]]))
        object.__setattr__(self, "terms", items)
        object.__setattr__(self, "rational", as_fraction(self.rational))

    def __hash__(self):
        return hash((self.rational, self.terms))

    def is_rational(self) -> bool:
        return not self.terms

    def is_zero(self) -> bool:
        return not self.terms and self.rational == 0

    def coeff(self, name: str) -> Fraction:
        for n, c in self.terms:
            if n == name:
                return c
        return Fraction(0)

    def coords(self) -> tuple[Fraction, ...]:
        """Coordinates over (1, *basis.names)."""
        d = dict(self.terms)
        return (self.rational,) + tuple(d.get(n, Fraction(0)) for n in self.basis.names)

    @classmethod
    def from_coords(cls, basis: Basis, coords: Sequence) -> "SymbolicReal":
        return cls(basis, as_fraction(coords[0]), tuple(zip(basis.names, map(as_fraction, coords[1:]))))

    def _coerce(self, other) -> "SymbolicReal":
        if isinstance(other, SymbolicReal):
            if other.basis is not self.basis and other.basis != self.basis:
                raise ValueError("operands live in different bases")
            return other
        return SymbolicReal(self.basis, as_fraction(other), ())

    def __add__(self, other):
        o = self._coerce(other)
        return SymbolicReal(self.basis, self.rational + o.rational, self.terms + o.terms)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicReal(self.basis, -self.rational, tuple((n, -c) for n, c in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o.is_rational():
            s = o.rational
            return SymbolicReal(self.basis, self.rational * s, tuple((n, c * s) for n, c in self.terms))
        if self.is_rational():
            return o * self.rational
        raise ProductNotRepresentable(f"({self})*({o}) is not linear over the basis")

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_rational():
            return self * (1 / o.rational)
        return self * self.basis.reciprocal(o)

    def __str__(self):
        parts = []
        if self.rational != 0 or not self.terms:
            parts.append(str(self.rational))
        for n, c in self.terms:
            parts.append(n if c == 1 else f"{c}*{n}")
        return " + ".join(parts)

    def to_float(self) -> float:
        iv = eval_interval(self, 60)
        return float(iv.mid_fraction)

    def to_json(self) -> list:
        out = []
        if self.rational != 0:
            out.append(["1", str(self.rational)])
        out.extend([n, str(c)] for n, c in self.terms)
        return out


# -- fixed-point intervals -------------------------------------------------------


@dataclass(frozen=True)
class FixedInterval:
    """[midpoint - radius, midpoint + radius] * 2**-scale_bits.

    ``wrap`` marks a fractional part whose enclosure straddled an integer
    before reduction, i.e. a value within ``radius`` of the 0/1 seam.
    """

    scale_bits: int
    midpoint: int
    radius: int = 0
    wrap: bool = False

    @property
    def mid_fraction(self) -> Fraction:
        return Fraction(self.midpoint, 1 << self.scale_bits)

    @property
    def lo(self) -> Fraction:
        return Fraction(self.midpoint - self.radius, 1 << self.scale_bits)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.midpoint + self.radius, 1 << self.scale_bits)

    @property
    def width(self) -> Fraction:
        return Fraction(2 * self.radius, 1 << self.scale_bits)

    def contains(self, x) -> bool:
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def torus_contains(self, x) -> bool:
        """Membership of x mod 1 in the interval read on R/Z."""
        x = as_fraction(x) % 1
        return any(self.lo <= x + k <= self.hi for k in (-1, 0, 1))

    def rescale(self, scale_bits: int) -> "FixedInterval":
        m, r = _round_shift(self.midpoint, self.radius, self.scale_bits - scale_bits)
        return FixedInterval(scale_bits, m, r, self.wrap)

    def __float__(self):
        return self.midpoint / (1 << self.scale_bits) if self.scale_bits < 1000 else float(self.mid_fraction)

    def decimal(self, digits: int = 20) -> str:
        return format_decimal(self.mid_fraction, digits)


def format_decimal(x: Fraction, digits: int = 20) -> str:
    """Fixed ``digits`` significant digits, deterministic."""
    from decimal import Context, ROUND_HALF_EVEN

    ctx = Context(prec=digits, rounding=ROUND_HALF_EVEN)
    d = ctx.divide(Decimal(x.numerator), Decimal(x.denominator))
    if d == 0:
        return "0." + "0" * (digits - 1)
    return f"{d:.{digits - 1}e}" if abs(d) < Decimal("1e-5") else _fixed_sig(d, digits)


def _fixed_sig(d: Decimal, digits: int) -> str:
    exp = d.adjusted()
    places = max(digits - 1 - exp, 0)
    return f"{d:.{places}f}"


# -- affine forms ------------------------------------------------------------------


class Affine:
    """Affine enclosure ``(mid + sum_g c_g e_g +- rad) * 2**-scale`` with e_g in [-1, 1].

    One noise symbol per basis generator: two quantities computed from the
    same generator value share its error, so ``x - x`` is exactly zero.
    """

    __slots__ = ("scale", "mid", "noise", "rad")

    def __init__(self, scale: int, mid: int, noise: dict | None = None, rad: int = 0):
        self.scale = scale
        self.mid = mid
        self.noise = noise if noise is not None else {}
        self.rad = rad

    @property
    def radius(self) -> int:
        return self.rad + sum(abs(c) for c in self.noise.values())

    def copy(self) -> "Affine":
        return Affine(self.scale, self.mid, dict(self.noise), self.rad)

    def __add__(self, other: "Affine") -> "Affine":
        noise = dict(self.noise)
        for k, c in other.noise.items():
            v = noise.get(k, 0) + c
            if v:
                noise[k] = v
            else:
                noise.pop(k, None)
        return Affine(self.scale, self.mid + other.mid, noise, self.rad + other.rad)

    def __neg__(self) -> "Affine":
        return Affine(self.scale, -self.mid, {k: -c for k, c in self.noise.items()}, self.rad)

    def __sub__(self, other: "Affine") -> "Affine":
        return self + (-other)

    def mul_int(self, k: int) -> "Affine":
        if k == 1:
            return self
        return Affine(self.scale, self.mid * k, {n: c * k for n, c in self.noise.items() if c * k}, self.rad * abs(k))

    def mul_rational(self, s: Fraction) -> "Affine":
        if s.denominator == 1:
            return self.mul_int(s.numerator)
        p, q = s.numerator, s.denominator
        extra = 0
        mid = _rdiv(self.mid * p, q)
        if mid * q != self.mid * p:
            extra += 1
        noise = {}
        for n, c in self.noise.items():
            v = _rdiv(c * p, q)
            if v * q != c * p:
                extra += 1
            if v:
                noise[n] = v
        rad = _cdiv(self.rad * abs(p), q) + extra
        return Affine(self.scale, mid, noise, rad)

    def add_fraction(self, q: Fraction) -> "Affine":
        m, r = _frac_to_fixed(q, self.scale)
        return Affine(self.scale, self.mid + m, dict(self.noise), self.rad + r)

    def reduce_mod1(self) -> "Affine":
        k = self.mid >> self.scale
        if k == 0:
            return self
        return Affine(self.scale, self.mid - (k << self.scale), self.noise, self.rad)

    def collapse(self) -> "Affine":
        return Affine(self.scale, self.mid, {}, self.radius)

    def to_interval(self, out_scale: int) -> FixedInterval:
        m, r = _round_shift(self.mid, self.radius, self.scale - out_scale)
        return FixedInterval(out_scale, m, r)

    def frac_interval(self, out_scale: int) -> FixedInterval:
        """Fractional part as a FixedInterval at ``out_scale`` with the seam flag."""
        m, r = _round_shift(self.mid, self.radius, self.scale - out_scale)
        one = 1 << out_scale
        m %= one
        wrap = r > 0 and (m - r < 0 or m + r >= one)
        return FixedInterval(out_scale, m, r, wrap)

    @classmethod
    def exact(cls, q: Fraction, scale: int) -> "Affine":
        m, r = _frac_to_fixed(q, scale)
        return cls(scale, m, {}, r)

    @classmethod
    def from_interval(cls, iv: FixedInterval, scale: int | None = None) -> "Affine":
        scale = iv.scale_bits if scale is None else scale
        m, r = _round_shift(iv.midpoint, iv.radius, iv.scale_bits - scale)
        return cls(scale, m, {}, r)

    def __repr__(self):
        return f"Affine(scale={self.scale}, mid={self.mid}, noise={self.noise}, rad={self.rad})"


def affine_combination(basis: Basis, rational: Fraction, terms: Iterable[tuple[str, Fraction]], W: int) -> Affine:
    """Affine enclosure of ``rational + sum c*g`` at scale W; noise keyed by generator."""
    mid, rad = _frac_to_fixed(rational, W)
    noise: dict[str, int] = {}
    for name, c in terms:
        gm, gr = basis.value_fixed(name, W)
        p, q = c.numerator, c.denominator
        v = _rdiv(p * gm, q)
        if v * q != p * gm:
            rad += 1
        mid += v
        e = _rdiv(p * gr, q)
        if e * q != p * gr:
            rad += 1
        if e:
            noise[name] = noise.get(name, 0) + e
    return Affine(W, mid, noise, rad)


def _needed_bits(terms: Iterable[tuple[str, Fraction]]) -> int:
    b = 0
    for _, c in terms:
        b = max(b, (abs(c.numerator) // c.denominator + 1).bit_length())
    return b


def _enclose(x_rational: Fraction, terms, basis: Basis, F: int) -> Affine:
    terms = tuple(terms)
    S = F + 2
    guard = 10 + len(terms).bit_length() + _needed_bits(terms)
    W = S + guard
    cap = max_bits()
    while True:
        if W > cap:
            raise PrecisionUnavailable(f"working precision {W} exceeds cap {cap} (EQUIDIST_MAX_BITS)")
        a = affine_combination(basis, x_rational, terms, W)
        _, r = _round_shift(a.mid, a.radius, W - S)
        if r <= 2:
            return a
        W += 32


def eval_interval(x: SymbolicReal, F: int) -> FixedInterval:
    """Enclosure of x of width at most 2**-F.

    Exact dyadic rationals come back at scale F with radius 0; everything
    else at scale F + 2 with radius at most 2.
    """
    if not x.terms and F >= 0:
        q = x.rational
        num = q.numerator << F
        if num % q.denominator == 0:
            return FixedInterval(F, num // q.denominator, 0)
    if F < 16:
        raise ValueError("precision must be at least 16 bits")
    x.basis.check_decimal_bits((n for n, _ in x.terms), F + 8)
    a = _enclose(x.rational, x.terms, x.basis, F)
    return a.to_interval(F + 2)


def frac_scaled(x: SymbolicReal, m: int, F: int) -> FixedInterval:
    """Enclosure of the fractional part {m*x}, width at most 2**-F.

    The rational part is reduced exactly; the working precision grows with
    the size of m.  If the enclosure straddles an integer the result is
    reported modulo 1 with ``wrap`` set.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if F < 16:
        raise ValueError("precision must be at least 16 bits")
    r = (x.rational * m) % 1
    terms = tuple((n, c * m) for n, c in x.terms)
    x.basis.check_decimal_bits((n for n, _ in terms), F + 8 + _needed_bits(terms))
    if not terms:
        num = r.numerator << F
        if num % r.denominator == 0:
            return FixedInterval(F, num // r.denominator, 0)
    a = _enclose(r, terms, x.basis, F)
    return a.frac_interval(F + 2)


# -- validated cosine ----------------------------------------------------------------


def _cos_sin_taylor(x: int, P: int) -> tuple[int, int, int]:
    """cos(x), sin(x) at scale P for |x| <= 0.8; third value bounds the error in ulps."""
    one = 1 << P
    x2 = (x * x) >> P

    def series(term: int) -> tuple[int, int]:
        total = term
        k = 1 if term == one else 2
        n = 0
        while term:
            t = term * x2
            t = (abs(t) >> P) * (1 if t >= 0 else -1)
            d = k * (k + 1)
            term = -((abs(t) // d) * (1 if t >= 0 else -1))
            total += term
            k += 2
            n += 1
        return total, n

    c, nc = series(one)
    s, ns = series(x)
    return c, s, 3 * max(nc, ns) + 8


def cos_turns(theta_mid: int, theta_rad: int, W: int) -> tuple[int, int]:
    """Enclosure of cos(2*pi*t) at scale W for t in (theta_mid +- theta_rad) * 2**-W."""
    if theta_rad == 0 and W >= 2 and theta_mid % (1 << (W - 2)) == 0:
        q = (theta_mid >> (W - 2)) & 3
        return (1, 0, -1, 0)[q] << W, 0
    g = 12
    P = W + g
    t = (theta_mid << g) % (1 << P)
    q = (t + (1 << (P - 3))) >> (P - 2)
    r = t - (q << (P - 2))
    pm, pr = pi_fixed(P)
    two_pi, two_pi_r = 2 * pm, 2 * pr
    x = _rdiv(r * two_pi, 1 << P)
    xr = _cdiv(abs(r) * two_pi_r, 1 << P) + 1
    c, s, e = _cos_sin_taylor(x, P)
    val = (c, -s, -c, s)[q & 3]
    mid, rad = _round_shift(val, e + xr, g)
    # Lipschitz constant 2*pi < 7 per turn
    return mid, rad + 7 * theta_rad


def turns_from_radians(phi: Fraction, W: int) -> tuple[int, int]:
    """phi / (2*pi) at scale W."""
    if phi == 0:
        return 0, 0
    pm, pr = pi_fixed(W + 8)
    num_m, num_r = _frac_to_fixed(phi, W + 8)
    m, r = _fixed_div(num_m, num_r, 2 * pm, 2 * pr, W + 8)
    return _round_shift(m, r, 8)


# -- exact linear algebra -------------------------------------------------------------


def _integer_rows(M: Sequence[Sequence]) -> list[list[int]]:
    rows = []
    for row in M:
        fr = [as_fraction(v) for v in row]
        den = 1
        for v in fr:
            den = den * v.denominator // math.gcd(den, v.denominator)
        rows.append([int(v * den) for v in fr])
    return rows


def _bareiss_echelon(A: list[list[int]]) -> list[int]:
    """In-place fraction-free forward elimination; returns pivot columns."""
    nrows = len(A)
    ncols = len(A[0]) if A else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        piv = A[r][c]
        for i in range(r + 1, nrows):
            aic = A[i][c]
            row = A[i]
            prow = A[r]
            for j in range(c + 1, ncols):
                q, rem = divmod(piv * row[j] - aic * prow[j], prev)
                assert rem == 0, "Bareiss division must be exact"
                row[j] = q
            row[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _normalize_int_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    first = next((x for x in ints if x), 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def rational_kernel(M: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Basis of the right kernel {x : M x = 0} over Q.

    Entries may be ints, Fractions or rational strings.  Each basis vector
    is scaled to coprime integers with a positive leading entry; the list is
    empty iff the kernel is trivial.
    """
    if not M or not M[0]:
        raise ValueError("matrix must have at least one row and one column")
    ncols = len(M[0])
    A = _integer_rows(M)
    pivots = _bareiss_echelon(A)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i in range(len(pivots) - 1, -1, -1):
            pc = pivots[i]
            row = A[i]
            s = sum((row[j] * x[j] for j in range(pc + 1, ncols) if row[j] and x[j]), Fraction(0))
            x[pc] = -s / row[pc]
        basis.append(_normalize_int_vector(x))
    return basis


def kernel_full_support(kernel_basis: Sequence[Sequence[int]], coords: Iterable[int]) -> bool:
    """Whether some kernel vector is nonzero on every coordinate in ``coords``.

    A vector space over an infinite field is not a finite union of proper
    subspaces, so this holds iff no coordinate functional vanishes on the
    whole kernel.
    """
    coords = list(coords)
    return all(any(b[s] != 0 for b in kernel_basis) for s in coords)


def full_support_vector(kernel_basis: Sequence[Sequence[int]], coords: Iterable[int]) -> tuple[int, ...] | None:
    """A kernel vector nonzero on all ``coords``, or None if none exists.

    Tries sum_i t**i b_i for t = 1, 2, ...; each coordinate is a nonzero
    polynomial in t of degree < k, so some t <= |coords|*(k-1)+1 works.
    """
    coords = list(coords)
    if not kernel_full_support(kernel_basis, coords):
        return None
    k = len(kernel_basis)
    n = len(kernel_basis[0])
    for t in range(1, len(coords) * max(k - 1, 0) + 2):
        v = [0] * n
        w = 1
        for b in kernel_basis:
            for j in range(n):
                v[j] += w * b[j]
            w *= t
        if all(v[s] != 0 for s in coords):
            return _normalize_int_vector([Fraction(x) for x in v])
    raise AssertionError("unreachable: full support guaranteed")


# -- integer relations (advisory) ---------------------------------------------------------


def _lll(B: list[list[int]], delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    B = [row[:] for row in B]
    n = len(B)

    def dot(u, v):
        return sum(a * b for a, b in zip(u, v))

    def gram_schmidt():
        Bs, mu, norms = [], [[Fraction(0)] * n for _ in range(n)], []
        for i in range(n):
            v = [Fraction(x) for x in B[i]]
            for j in range(i):
                mu[i][j] = dot(B[i], Bs[j]) / norms[j] if norms[j] else Fraction(0)
                v = [a - mu[i][j] * b for a, b in zip(v, Bs[j])]
            Bs.append(v)
            norms.append(dot(v, v))
        return Bs, mu, norms

    Bs, mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                Bs, mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            Bs, mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return B


def detect_integer_relation(values: Sequence[FixedInterval], coeff_bound: int) -> tuple[int, ...] | None:
    """Heuristic small integer relation among interval values (advisory only).

    LLL on the lattice spanned by (e_i, mid_i).  A returned vector a has
    max|a_i| <= coeff_bound and an enclosure of sum(a_i v_i) containing 0;
    None is not a proof of independence.
    """
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be >= 1")
    n = len(values)
    if n < 2:
        return None
    S = max(v.scale_bits for v in values)
    ivs = [v.rescale(S) if v.scale_bits != S else v for v in values]
    for v in ivs:
        if Fraction(2 * v.radius, 1 << S) > Fraction(1, 1 << 64):
            raise PrecisionUnavailable("relation search needs enclosures of width <= 2**-64")
    # numeric resolution must beat the coefficient scale
    if (coeff_bound * n).bit_length() + 32 > S:
        raise PrecisionUnavailable("enclosures too wide for the requested coefficient bound")
    B = [[1 if j == i else 0 for j in range(n)] + [ivs[i].midpoint] for i in range(n)]
    reduced = _lll(B)
    best = None
    for row in reduced:
        a = row[:n]
        if not any(a) or max(abs(x) for x in a) > coeff_bound:
            continue
        mid = sum(x * v.midpoint for x, v in zip(a, ivs))
        rad = sum(abs(x) * v.radius for x, v in zip(a, ivs))
        if abs(mid) <= rad:
            cand = _normalize_int_vector([Fraction(x) for x in a])
            if best is None or sum(map(abs, cand)) < sum(map(abs, best)):
                best = cand
    return best
