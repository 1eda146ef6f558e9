"""Validated generation of fractional-part sequences.

Every coordinate of point ``n`` is an enclosure of width at most ``2**-F``
(scale ``F + 2``, radius at most 2).  The working precision of a point is a
function of ``n`` and the configuration only, so outputs are identical for
any chunk size or thread count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, TextIO

from .exactnum import (
    Affine,
    Basis,
    FixedInterval,
    PrecisionUnavailable,
    _rdiv,
    format_decimal,
    max_bits,
)
from .model import (
    Body,
    Config,
    PiecewiseLinear,
    PolynomialSR,
    ScalarConfig,
    TorusComponent,
    TorusConfig,
    VectorConfig,
    body_affine,
)

DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class SequencePoint:
    n: int
    coords: tuple[FixedInterval, ...]

    @property
    def wrap(self) -> bool:
        return any(c.wrap for c in self.coords)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class _PolyEval:
    """Integer Horner evaluation of a polynomial's rational and generator parts."""

    def __init__(self, P: PolynomialSR):
        self.basis = P.basis
        rats = [c.rational for c in P.coeffs]
        self.rden = 1
        for r in rats:
            self.rden = _lcm(self.rden, r.denominator)
        self.rnum = [int(r * self.rden) for r in rats]
        gens: dict[str, list[Fraction]] = {}
        for k, c in enumerate(P.coeffs):
            for name, v in c.terms:
                gens.setdefault(name, [Fraction(0)] * len(P.coeffs))[k] = v
        self.gens = []
        for name, coeffs in gens.items():
            den = 1
            for v in coeffs:
                den = _lcm(den, v.denominator)
            self.gens.append((name, [int(v * den) for v in coeffs], den))
        self.degree = P.degree

    @staticmethod
    def _horner(cs: list[int], n: int) -> int:
        acc = 0
        for c in reversed(cs):
            acc = (acc + c) * n
        return acc

    def magnitude_bits(self, n: int) -> int:
        """Bit length bound of the generator coefficients at n."""
        b = 0
        for _, cs, den in self.gens:
            s = sum(abs(c) for c in cs) * max(n, 1) ** self.degree
            b = max(b, (s // den + 1).bit_length())
        return b

    def decimal_demand(self, n: int) -> dict[str, int]:
        out = {}
        for name, cs, den in self.gens:
            if self.basis[name].kind == "decimal":
                s = sum(abs(c) for c in cs) * max(n, 1) ** self.degree
                out[name] = (s // den + 1).bit_length()
        return out

    def affine(self, n: int, W: int) -> Affine:
        """Affine enclosure of P(n) mod 1 at scale W (rational part reduced exactly)."""
        rn = self._horner(self.rnum, n) % self.rden if self.rnum else 0
        num = rn << W
        mid = _rdiv(num, self.rden)
        rad = 0 if mid * self.rden == num else 1
        noise = {}
        for name, cs, den in self.gens:
            A = self._horner(cs, n)
            if not A:
                continue
            gm, gr = self.basis.value_fixed(name, W)
            p = A * gm
            v = _rdiv(p, den)
            if v * den != p:
                rad += 1
            mid += v
            e = _rdiv(A * gr, den)
            if e * den != A * gr:
                rad += 1
            if e:
                noise[name] = noise.get(name, 0) + e
        return Affine(W, mid, noise, rad).reduce_mod1()


def _body_lip_bits(bodies: Sequence[Body]) -> int:
    b = 1
    for body in bodies:
        lip = body.lipschitz
        b = max(b, (math.ceil(lip) + 1).bit_length())
    return b


class _Evaluator:
    """Shared precision policy: initial W from n, escalate in steps of 32."""

    def __init__(self, F: int, polys: Sequence[_PolyEval], bodies: Sequence[Body]):
        if F < 64:
            raise ValueError("precision F must be at least 64")
        self.F = F
        self.S = F + 2
        self.polys = list(polys)
        self.lip_bits = _body_lip_bits(bodies)
        self.n_bodies = len(bodies)

    def initial_W(self, n: int) -> int:
        mag = max((p.magnitude_bits(n) for p in self.polys), default=0)
        W = self.S + 24 + mag + self.lip_bits + (len(self.polys) + self.n_bodies).bit_length()
        return -(-W // 32) * 32

    def check_decimals(self, n: int) -> None:
        for p in self.polys:
            for name, mag in p.decimal_demand(n).items():
                need = self.S + mag + 2
                bits = p.basis[name].bits
                if bits < need:
                    raise PrecisionUnavailable(
                        f"n={n}: generator {name!r} declares {bits} bits, {need} required"
                    )

    def run(self, n: int, compute) -> tuple[FixedInterval, ...]:
        self.check_decimals(n)
        W = self.initial_W(n)
        cap = max_bits()
        while W <= cap:
            affs = compute(n, W)
            ivs = tuple(a.frac_interval(self.S) for a in affs)
            if all(iv.radius <= 2 for iv in ivs):
                return ivs
            W += 32
        raise PrecisionUnavailable(f"n={n}: working precision would exceed cap {cap} (EQUIDIST_MAX_BITS)")


class _ScalarPlan:
    def __init__(self, cfg: ScalarConfig):
        self.p0 = _PolyEval(cfg.p0)
        self.terms = [(_PolyEval(P), body) for P, body in cfg.unit_arguments()]

    @property
    def polys(self):
        return [self.p0] + [p for p, _ in self.terms]

    @property
    def bodies(self):
        return [b for _, b in self.terms]

    def perturbation(self, n: int, W: int) -> Affine:
        total = Affine(W, 0, {}, 0)
        for pe, body in self.terms:
            total = total + body_affine(body, pe.affine(n, W))
        return total

    def value(self, n: int, W: int) -> Affine:
        return self.p0.affine(n, W) + self.perturbation(n, W)


class _TorusPlan:
    def __init__(self, comp: TorusComponent):
        self.G = comp.G
        self.args = [_PolyEval(P) for P in comp.args]

    @property
    def polys(self):
        return self.args

    @property
    def bodies(self):
        out = [b for b in self.G.residuals if b is not None]
        return out

    def value(self, n: int, W: int) -> Affine:
        xs = [a.affine(n, W) for a in self.args]
        if not xs:
            return Affine(W, 0, {}, 0)
        return self.G.value_affine(xs)


def _plans(cfg: Config):
    if isinstance(cfg, ScalarConfig):
        return [_ScalarPlan(cfg)]
    if isinstance(cfg, VectorConfig):
        return [_ScalarPlan(c) for c in cfg.components]
    if isinstance(cfg, TorusConfig):
        return [_TorusPlan(c) for c in cfg.components]
    raise TypeError(f"unsupported config type {type(cfg).__name__}")


class SequenceGenerator:
    """Point evaluator for a configuration at output precision F."""

    def __init__(self, cfg: Config, F: int = 64):
        self.cfg = cfg
        self.plans = _plans(cfg)
        polys = [p for plan in self.plans for p in plan.polys]
        bodies = [b for plan in self.plans for b in plan.bodies]
        self.ev = _Evaluator(F, polys, bodies)

    @property
    def dim(self) -> int:
        return len(self.plans)

    def point(self, n: int) -> SequencePoint:
        if n < 1:
            raise ValueError("indices start at 1")
        coords = self.ev.run(n, lambda n, W: [plan.value(n, W) for plan in self.plans])
        return SequencePoint(n, coords)

    def chunk(self, n1: int, n2: int) -> list[SequencePoint]:
        return [self.point(n) for n in range(n1, n2 + 1)]

    def iterate(self, n1: int, n2: int, chunk: int = DEFAULT_CHUNK, threads: int = 1) -> Iterator[SequencePoint]:
        if n1 < 1 or n2 < n1:
            raise ValueError("range must satisfy 1 <= n1 <= n2")
        bounds = [(a, min(a + chunk - 1, n2)) for a in range(n1, n2 + 1, chunk)]
        if threads <= 1:
            for a, b in bounds:
                yield from self.chunk(a, b)
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for pts in pool.map(lambda ab: self.chunk(*ab), bounds):
                yield from pts


def generate(cfg: Config, n1: int, n2: int, F: int = 64, chunk: int = DEFAULT_CHUNK, threads: int = 1) -> list[SequencePoint]:
    return list(SequenceGenerator(cfg, F).iterate(n1, n2, chunk, threads))


def gen_scalar(cfg: ScalarConfig, n1: int, n2: int, F: int = 64, **kw) -> Iterator[SequencePoint]:
    if not isinstance(cfg, ScalarConfig):
        raise TypeError("gen_scalar needs a ScalarConfig")
    return SequenceGenerator(cfg, F).iterate(n1, n2, **kw)


def gen_vector(cfg: VectorConfig, n1: int, n2: int, F: int = 64, **kw) -> Iterator[SequencePoint]:
    if not isinstance(cfg, VectorConfig):
        raise TypeError("gen_vector needs a VectorConfig")
    return SequenceGenerator(cfg, F).iterate(n1, n2, **kw)


def gen_torus(cfg: TorusConfig, n1: int, n2: int, F: int = 64, **kw) -> Iterator[SequencePoint]:
    if not isinstance(cfg, TorusConfig):
        raise TypeError("gen_torus needs a TorusConfig")
    return SequenceGenerator(cfg, F).iterate(n1, n2, **kw)


def scalar_parts(cfg: ScalarConfig, n1: int, n2: int, F: int = 64) -> Iterator[tuple[int, FixedInterval, FixedInterval]]:
    """(n, {P0(n)}, {sum f_j(P_j(n))}) enclosures."""
    plan = _ScalarPlan(cfg)
    ev = _Evaluator(F, plan.polys, plan.bodies)
    for n in range(n1, n2 + 1):
        a, b = ev.run(n, lambda n, W: [plan.p0.affine(n, W), plan.perturbation(n, W)])
        yield n, a, b


def write_csv(points: Sequence[SequencePoint] | Iterator[SequencePoint], fh: TextIO, digits: int = 20) -> int:
    """CSV dump: header ``n,coord0,...,wrap``; returns the number of rows."""
    w = csv.writer(fh, lineterminator="\n")
    header_done = False
    rows = 0
    for p in points:
        if not header_done:
            w.writerow(["n"] + [f"coord{i}" for i in range(len(p.coords))] + ["wrap"])
            header_done = True
        w.writerow([p.n] + [format_decimal(c.mid_fraction, digits) for c in p.coords] + [int(p.wrap)])
        rows += 1
    return rows


__all__ = [
    "SequencePoint",
    "SequenceGenerator",
    "generate",
    "gen_scalar",
    "gen_vector",
    "gen_torus",
    "scalar_parts",
    "write_csv",
    "DEFAULT_CHUNK",
]
