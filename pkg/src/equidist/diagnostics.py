"""Empirical distribution diagnostics on validated point sets.

Counting is done on the integer midpoints of the enclosures, so results are
exact functions of the generated data; every report also carries the
rigorous slack implied by the enclosure radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exactnum import FixedInterval, format_decimal
from .generator import SequencePoint, scalar_parts
from .model import ScalarConfig


class PointSet:
    """Midpoints of a list of points at a common scale ``S``."""

    def __init__(self, coords: Sequence[Sequence[FixedInterval]]):
        if not coords:
            raise ValueError("empty point set")
        self.d = len(coords[0])
        S = max(c.scale_bits for p in coords for c in p)
        self.S = S
        self.mids: list[list[int]] = [[] for _ in range(self.d)]
        self.rads: list[list[int]] = [[] for _ in range(self.d)]
        self.wrap: list[bool] = []
        one = 1 << S
        for p in coords:
            if len(p) != self.d:
                raise ValueError("points must share a dimension")
            w = False
            for k, c in enumerate(p):
                if c.scale_bits != S:
                    c = c.rescale(S)
                self.mids[k].append(c.midpoint % one)
                self.rads[k].append(c.radius)
                w = w or c.wrap
            self.wrap.append(w)
        self.N = len(coords)
        self.max_radius = max(max(r) for r in self.rads)

    @classmethod
    def of(cls, points) -> "PointSet":
        if isinstance(points, PointSet):
            return points
        pts = list(points)
        if pts and isinstance(pts[0], SequencePoint):
            return cls([p.coords for p in pts])
        if pts and isinstance(pts[0], FixedInterval):
            return cls([(p,) for p in pts])
        return cls(pts)

    @classmethod
    def from_fractions(cls, values: Iterable, S: int = 64) -> "PointSet":
        """Exact rationals (or tuples of them) rounded to scale S; radius 1 unless exact."""
        rows = []
        for v in values:
            vs = v if isinstance(v, (tuple, list)) else (v,)
            row = []
            for x in vs:
                x = Fraction(x) % 1
                num = x.numerator << S
                m = num // x.denominator
                row.append(FixedInterval(S, m, 0 if m * x.denominator == num else 1))
            rows.append(tuple(row))
        return cls(rows)

    def head(self, n: int) -> "PointSet":
        out = object.__new__(PointSet)
        out.d, out.S, out.N = self.d, self.S, n
        out.mids = [m[:n] for m in self.mids]
        out.rads = [r[:n] for r in self.rads]
        out.wrap = self.wrap[:n]
        out.max_radius = max(max(r) for r in out.rads) if n else 0
        return out

    def floats(self, k: int = 0) -> np.ndarray:
        shift = max(self.S - 53, 0)
        arr = np.array([m >> shift for m in self.mids[k]], dtype=np.float64)
        arr /= float(1 << (self.S - shift))
        return np.minimum(arr, np.nextafter(1.0, 0.0))

    @property
    def radius_fraction(self) -> Fraction:
        return Fraction(self.max_radius, 1 << self.S)


# -- discrepancy -----------------------------------------------------------------


@dataclass
class DiscrepancyReport:
    N: int
    star_discrepancy: Fraction
    bound: Fraction
    worst: tuple
    contested: int = 0
    grid: int | None = None

    def to_json(self) -> dict:
        out = {
            "N": self.N,
            "star_discrepancy": format_decimal(Fraction(self.star_discrepancy)),
            "bound": format_decimal(Fraction(self.bound)),
            "worst": [format_decimal(Fraction(w)) for w in self.worst],
            "contested": self.contested,
        }
        if self.grid is not None:
            out["grid"] = self.grid
        return out


def star_discrepancy_1d(points) -> DiscrepancyReport:
    """Exact D*_N of the midpoints via the sorted-order formula.

    ``bound`` adds the largest enclosure radius, which bounds how far D* of
    the true values can differ from D* of the midpoints.
    """
    ps = PointSet.of(points)
    if ps.d != 1:
        raise ValueError("star_discrepancy_1d needs 1-dimensional points")
    N = ps.N
    one = 1 << ps.S
    xs = sorted(ps.mids[0])
    best_num, best_at = -1, 0
    # D* = max_i max(i/N - x_(i), x_(i) - (i-1)/N), scaled by N * 2**S
    for i, m in enumerate(xs, start=1):
        a = i * one - m * N
        b = m * N - (i - 1) * one
        v = a if a > b else b
        if v > best_num:
            best_num, best_at = v, i
    D = Fraction(best_num, N * one)
    worst_x = Fraction(xs[best_at - 1], one)
    # no grid here: enclosure widths enter through the bound only
    return DiscrepancyReport(N, D, D + ps.radius_fraction, (worst_x,))


def _cell_indices(ps: PointSet, m: int) -> tuple[np.ndarray, int]:
    """Grid cell index per coordinate and the number of points straddling a grid line."""
    one = 1 << ps.S
    idx = np.empty((ps.N, ps.d), dtype=np.int64)
    contested = 0
    for k in range(ps.d):
        col = ps.mids[k]
        rads = ps.rads[k]
        for j, mid in enumerate(col):
            c = (mid * m) >> ps.S
            idx[j, k] = c
            r = rads[j]
            if r and (((mid - r) * m) >> ps.S != c or ((mid + r) * m) >> ps.S != c):
                contested += 1
    return idx, contested


def _histogram(idx: np.ndarray, m: int, d: int) -> np.ndarray:
    flat = np.ravel_multi_index(tuple(idx[:, k] for k in range(d)), (m,) * d) if d > 1 else idx[:, 0]
    return np.bincount(flat, minlength=m ** d).reshape((m,) * d)


def box_discrepancy(points, m: int) -> DiscrepancyReport:
    """sup over anchored grid boxes [0, i_1/m) x ... x [0, i_d/m) of |count/N - volume|.

    ``bound`` adds the grid error d/m plus the enclosure radius.
    """
    if m < 2:
        raise ValueError("grid m must be >= 2")
    ps = PointSet.of(points)
    d, N = ps.d, ps.N
    idx, contested = _cell_indices(ps, m)
    H = _histogram(idx, m, d)
    C = H
    for k in range(d):
        C = np.cumsum(C, axis=k)
    grids = np.meshgrid(*[np.arange(1, m + 1)] * d, indexing="ij")
    vol_num = np.ones_like(C, dtype=np.float64)
    for g in grids:
        vol_num = vol_num * g
    # |count/N - prod(i)/m^d| * N * m^d, exact in integers
    diff = np.abs(C.astype(object) * (m ** d) - vol_num.astype(np.int64).astype(object) * N)
    flat = int(np.argmax(diff))
    best = int(diff.flat[flat])
    D = Fraction(best, N * m ** d)
    corner = np.unravel_index(flat, C.shape)
    worst = tuple(Fraction(int(c) + 1, m) for c in corner)
    bound = D + Fraction(d, m) + Fraction(contested, N) + ps.radius_fraction
    return DiscrepancyReport(N, D, bound, worst, contested, m)


# -- exponential sums --------------------------------------------------------------------


@dataclass
class WeylSumReport:
    a: tuple[int, ...]
    N: int
    magnitude: float
    error_bound: float

    def to_json(self) -> dict:
        return {
            "a": list(self.a),
            "N": self.N,
            "magnitude": format_decimal(Fraction(self.magnitude)),
            "error_bound": format_decimal(Fraction(self.error_bound)),
        }


def weyl_sum(points, a: Sequence[int] | int) -> WeylSumReport:
    """|(1/N) sum exp(2 pi i a.x_k)| over the midpoints.

    Phases are reduced mod 1 exactly in integers before conversion to
    floating point; the error bound covers enclosure radii and rounding.
    """
    a = (a,) if isinstance(a, int) else tuple(int(v) for v in a)
    ps = PointSet.of(points)
    if len(a) != ps.d:
        raise ValueError("frequency vector length must match the point dimension")
    if not any(a):
        raise ValueError("frequency vector must be nonzero")
    one = 1 << ps.S
    shift = max(ps.S - 53, 0)
    phases = np.empty(ps.N, dtype=np.float64)
    cols = ps.mids
    active = [(k, ak) for k, ak in enumerate(a) if ak]
    for j in range(ps.N):
        t = 0
        for k, ak in active:
            t += ak * cols[k][j]
        phases[j] = (t % one) >> shift
    phases /= float(1 << (ps.S - shift))
    ang = 2.0 * math.pi * phases
    re = math.fsum(np.cos(ang))
    im = math.fsum(np.sin(ang))
    mag = math.hypot(re, im) / ps.N
    l1 = sum(abs(v) for v in a)
    err = 2 * math.pi * l1 * float(ps.radius_fraction) + 8 * 2.0 ** -52 + 2 * math.pi * 2.0 ** -53
    return WeylSumReport(a, ps.N, min(mag, 1.0), err)


# -- density -------------------------------------------------------------------------------


def covering_radius(points, m: int) -> dict:
    """max over grid cell centers of the torus (max-norm) distance to the nearest point."""
    from scipy.spatial import cKDTree

    if m < 2:
        raise ValueError("grid m must be >= 2")
    ps = PointSet.of(points)
    data = np.column_stack([ps.floats(k) for k in range(ps.d)])
    tree = cKDTree(data, boxsize=1.0)
    axes = [(np.arange(m) + 0.5) / m] * ps.d
    centers = np.column_stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")])
    dist, _ = tree.query(centers, k=1, p=np.inf)
    r = float(dist.max())
    return {"covering_radius": r, "resolution": 1.0 / (2 * m), "N": ps.N, "grid": m}


# -- atoms ------------------------------------------------------------------------------------


@dataclass
class Cluster:
    location: Fraction
    mass: float
    count: int
    radius: Fraction
    label: Fraction | None = None

    def to_json(self) -> dict:
        out = {
            "location": format_decimal(self.location),
            "mass": format_decimal(Fraction(self.mass)),
            "count": self.count,
            "radius": format_decimal(self.radius),
        }
        if self.label is not None:
            out["label"] = f"{self.label.numerator}/{self.label.denominator}"
        return out


@dataclass
class AtomReport:
    N: int
    clusters: list[Cluster] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"N": self.N, "clusters": [c.to_json() for c in self.clusters]}


def torus_distance(x: Fraction, y: Fraction) -> Fraction:
    d = (x - y) % 1
    return min(d, 1 - d)


def nearest_rational(x: Fraction, delta: Fraction, q_max: int) -> Fraction | None:
    """Smallest-denominator t/q (q <= q_max) within torus distance delta of x."""
    for q in range(1, q_max + 1):
        t = round(x * q)
        cand = Fraction(t, q) % 1
        if torus_distance(cand, x) <= delta:
            return cand
    return None


def atom_scan(points, delta, mass_min, q_max: int = 64, coord: int = 0) -> AtomReport:
    """Greedy scan for torus windows of radius delta holding mass >= mass_min.

    The heaviest circular window of width 2*delta is taken, its points are
    removed and the scan repeats, giving disjoint clusters.
    """
    delta, mass_min = Fraction(delta), Fraction(mass_min)
    if not 0 < delta < Fraction(1, 4):
        raise ValueError("delta must lie in (0, 1/4)")
    ps = PointSet.of(points)
    one = 1 << ps.S
    width = (2 * delta.numerator * one) // delta.denominator
    remaining = sorted(ps.mids[coord])
    N = ps.N
    clusters = []
    while remaining:
        n = len(remaining)
        ext = remaining + [v + one for v in remaining]
        best, best_i, j = 0, 0, 0
        for i in range(n):
            if j < i:
                j = i
            while j < i + n and ext[j] - ext[i] <= width:
                j += 1
            if j - i > best:
                best, best_i = j - i, i
        if Fraction(best, N) < mass_min or best == 0:
            break
        members = ext[best_i:best_i + best]
        loc = Fraction((members[0] + members[-1]) // 2, one) % 1
        label = nearest_rational(loc, delta, q_max)
        clusters.append(Cluster(loc, best / N, best, delta, label))
        # remove exactly `best` occurrences, respecting multiplicity
        counts: dict[int, int] = {}
        for v in members:
            counts[v % one] = counts.get(v % one, 0) + 1
        rest = []
        for v in remaining:
            c = counts.get(v, 0)
            if c:
                counts[v] = c - 1
            else:
                rest.append(v)
        remaining = rest
    return AtomReport(N, clusters)


def mass_near(points, location, radius, coord: int = 0) -> dict:
    """Fraction of points whose enclosure lies within torus distance ``radius`` of ``location``.

    ``certain`` counts enclosures entirely inside, ``possible`` those that
    merely intersect the window.
    """
    ps = PointSet.of(points)
    one = 1 << ps.S
    loc = Fraction(location) % 1
    r = Fraction(radius)
    certain = possible = 0
    for mid, rad in zip(ps.mids[coord], ps.rads[coord]):
        x = Fraction(mid, one)
        d = torus_distance(x, loc)
        e = Fraction(rad, one)
        if d + e <= r:
            certain += 1
            possible += 1
        elif d - e <= r:
            possible += 1
    return {"N": ps.N, "certain": certain, "possible": possible, "mass": certain / ps.N}


def fraction_in(points, lo, hi, coord: int = 0, closed: bool = False) -> dict:
    """Exact share of midpoints in the open interval (lo, hi) of [0, 1) (closed if asked)."""
    ps = PointSet.of(points)
    one = 1 << ps.S
    lo, hi = Fraction(lo), Fraction(hi)
    L = lo * one
    H = hi * one
    count = contested = 0
    for mid, rad in zip(ps.mids[coord], ps.rads[coord]):
        inside = (L <= mid <= H) if closed else (L < mid < H)
        if inside:
            count += 1
        if rad and (mid - rad <= L <= mid + rad or mid - rad <= H <= mid + rad):
            contested += 1
    return {"N": ps.N, "count": count, "fraction": Fraction(count, ps.N), "contested": contested}


# -- Cesaro drift ----------------------------------------------------------------------------


@dataclass
class DriftReport:
    N1: int
    N2: int
    grid: int
    interval_metric: float
    torus_metric: float
    box: tuple | None = None
    box_drift: float | None = None

    def to_json(self) -> dict:
        out = {
            "N1": self.N1,
            "N2": self.N2,
            "grid": self.grid,
            "interval_metric": format_decimal(Fraction(self.interval_metric)),
            "torus_metric": format_decimal(Fraction(self.torus_metric)),
        }
        if self.box is not None:
            out["box"] = [str(b) for b in self.box]
            out["box_drift"] = format_decimal(Fraction(self.box_drift))
        return out


def _tent_weights(ps: PointSet, n: int, m: int) -> np.ndarray:
    """Mass of the first n points on the m grid nodes via periodic tent functions."""
    d = ps.d
    W = np.zeros((m,) * d)
    fl = [ps.floats(k)[:n] * m for k in range(d)]
    base = [np.floor(f).astype(np.int64) for f in fl]
    frac = [f - b for f, b in zip(fl, base)]
    for corner in range(1 << d):
        idx = []
        w = np.ones(n)
        for k in range(d):
            up = (corner >> k) & 1
            idx.append((base[k] + up) % m)
            w = w * (frac[k] if up else 1 - frac[k])
        np.add.at(W, tuple(idx), w)
    return W / n


def _anchored_sup(diff: np.ndarray) -> float:
    C = diff
    for k in range(diff.ndim):
        C = np.cumsum(C, axis=k)
    if diff.ndim == 1:
        pref = np.concatenate([[0.0], C])
        return float(pref.max() - pref.min())
    return float(np.abs(C).max())


def cesaro_drift(points, N1: int, N2: int, m: int, box: tuple | None = None) -> DriftReport:
    """Change of the empirical measure between the first N1 and first N2 points.

    ``interval_metric``: sup over grid intervals (anchored boxes for d > 1)
    of |mu_N1 - mu_N2| with indicator counting, so 0 and 1 are far apart.
    ``torus_metric``: the same sup for measures smoothed by periodic tent
    functions on the grid, which are continuous across the seam.  ``box``
    (1-d open interval (a, b)) adds the exact drift on that interval.
    """
    ps = PointSet.of(points)
    if not 1 <= N1 < N2 <= ps.N:
        raise ValueError("need 1 <= N1 < N2 <= number of points")
    d = ps.d
    idx, _ = _cell_indices(ps, m)
    h1 = _histogram(idx[:N1], m, d) / N1
    h2 = _histogram(idx[:N2], m, d) / N2
    interval = _anchored_sup(h1 - h2)
    t1 = _tent_weights(ps, N1, m)
    t2 = _tent_weights(ps, N2, m)
    torus = _anchored_sup(t1 - t2)
    rep = DriftReport(N1, N2, m, interval, torus)
    if box is not None:
        a, b = Fraction(box[0]), Fraction(box[1])
        f1 = fraction_in(ps.head(N1), a, b)["fraction"]
        f2 = fraction_in(ps.head(N2), a, b)["fraction"]
        rep.box = (a, b)
        rep.box_drift = float(abs(f1 - f2))
    return rep


# -- perturbation gap ---------------------------------------------------------------------------


def limsup_gap(cfg: ScalarConfig, N: int, F: int = 64) -> dict:
    """max over n <= N of |{P0(n)} - {sum f_j(P_j(n))}|."""
    best = Fraction(-1)
    best_n = 0
    rad = Fraction(0)
    for n, a, b in scalar_parts(cfg, 1, N, F):
        v = abs(a.mid_fraction - b.mid_fraction)
        if v > best:
            best, best_n = v, n
        rad = max(rad, Fraction(a.radius, 1 << a.scale_bits) + Fraction(b.radius, 1 << b.scale_bits))
    return {"gap": best, "at": best_n, "error_bound": rad, "N": N}


def write_histogram(points, m: int, path, coord: int = 0) -> None:
    """Two-column (cell center, share) dump for plotting."""
    ps = PointSet.of(points)
    idx, _ = _cell_indices(ps, m)
    counts = np.bincount(idx[:, coord], minlength=m)
    with open(path, "w") as fh:
        for i, c in enumerate(counts):
            fh.write(f"{(i + 0.5) / m:.10f} {c / ps.N:.10f}\n")


__all__ = [
    "PointSet",
    "DiscrepancyReport",
    "WeylSumReport",
    "AtomReport",
    "Cluster",
    "DriftReport",
    "star_discrepancy_1d",
    "box_discrepancy",
    "weyl_sum",
    "covering_radius",
    "atom_scan",
    "mass_near",
    "fraction_in",
    "cesaro_drift",
    "limsup_gap",
    "nearest_rational",
    "torus_distance",
    "write_histogram",
]
