"""Explicit constructions: Dirichlet approximation, density witnesses and
counterexample perturbations that break uniform distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import (
    Basis,
    FixedInterval,
    SymbolicReal,
    as_fraction,
    frac_scaled,
    kernel_full_support,
    rational_kernel,
)
from .generator import SequenceGenerator
from .independence import (
    rational_independence,
    q_independence_polys,
    substitute_total,
    total_q_independence,
    total_q_independence_polys,
)
from .model import (
    Config,
    PeriodicFunction,
    Perturbation,
    PiecewiseLinear,
    PolynomialSR,
    ScalarConfig,
    VectorConfig,
)

DEFAULT_EPS = Fraction(1, 10)


class NoRelation(ValueError):
    """The rational relation needed by the construction does not exist (uniform distribution holds)."""


class NoViolation(ValueError):
    """The tuples are totally Q-independent (uniform distribution holds)."""


# -- Dirichlet approximation and witnesses -------------------------------------------------


def _torus_dist_upper(iv: FixedInterval, target: Fraction = Fraction(0)) -> Fraction:
    """Upper bound on the torus distance between the enclosed value and ``target``."""
    d = (iv.mid_fraction - target) % 1
    d = min(d, 1 - d)
    return d + Fraction(iv.radius, 1 << iv.scale_bits)


def _torus_dist_lower(iv: FixedInterval, target: Fraction = Fraction(0)) -> Fraction:
    d = (iv.mid_fraction - target) % 1
    d = min(d, 1 - d)
    return max(d - Fraction(iv.radius, 1 << iv.scale_bits), Fraction(0))


def _certified_close(x: SymbolicReal, k: int, bound: Fraction) -> bool:
    """Decide ||k x|| < bound, raising precision until the enclosure settles it."""
    if x.is_rational():
        d = (k * x.rational) % 1
        return min(d, 1 - d) < bound
    for F in (64, 128, 256, 512):
        iv = frac_scaled(x, k, F)
        if _torus_dist_upper(iv) < bound:
            return True
        if _torus_dist_lower(iv) >= bound:
            return False
    # an irrational ||k x|| never equals a rational bound, so this is unreachable in practice
    return _torus_dist_upper(iv) < bound


def dirichlet_simultaneous(thetas: Sequence[SymbolicReal], Q: int) -> int:
    """Smallest k in [1, Q**d] with ||k theta_i|| < 1/Q for every i.

    Pigeonhole over Q**d half-open boxes guarantees such a k exists.
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    d = len(thetas)
    if not 1 <= d <= 4:
        raise ValueError("exhaustive search supports 1..4 numbers")
    bound = Fraction(1, Q)
    for k in range(1, Q ** d + 1):
        if all(_certified_close(t, k, bound) for t in thetas):
            return k
    raise AssertionError("no k found; contradicts Dirichlet's theorem")


def witness_find(cfg: Config, target, eps, n_max: int, F: int = 64, chunk: int = 1024) -> int | None:
    """Smallest n <= n_max whose point is certified within torus distance eps of target."""
    eps = as_fraction(eps)
    if eps <= Fraction(1, 1 << 60):
        raise ValueError("eps must exceed 2**-60")
    tgt = [as_fraction(t) for t in (target if isinstance(target, (list, tuple)) else [target])]
    gen = SequenceGenerator(cfg, F)
    if len(tgt) != gen.dim:
        raise ValueError("target dimension does not match the configuration")
    for p in gen.iterate(1, n_max, chunk=chunk):
        if all(_torus_dist_upper(c, t) <= eps for c, t in zip(p.coords, tgt)):
            return p.n
    return None


# -- counterexample plans ----------------------------------------------------------------------


def _linear_g(slope: Fraction, eps: Fraction) -> PiecewiseLinear:
    """slope*x on [0, 1-eps], returning linearly to 0 at 1."""
    if slope == 0:
        return PiecewiseLinear(((Fraction(0), Fraction(0)),))
    return PiecewiseLinear(((Fraction(0), Fraction(0)), (1 - eps, slope * (1 - eps))))


def _scaled_body(body: PiecewiseLinear, s: Fraction) -> PiecewiseLinear:
    return PiecewiseLinear(tuple((p, v * s) for p, v in body.points))


def _as_list(b) -> list:
    return list(b) if isinstance(b, (list, tuple)) else [b]


@dataclass
class CounterexamplePlan:
    """Everything needed to rebuild and check a counterexample.

    ``relation`` holds the integers q > 0, p_0 and p_j (plus subset and
    a_l for vector plans, and the integer polynomial R for polynomial
    plans).  ``g`` are the unit-period bodies, ``f`` the rescaled
    functions; atoms are predicted at t/q with |t| <= M and mass at least
    ``mass_floor`` for large N.
    """

    kind: str
    basis: Basis
    relation: dict
    eps: Fraction
    M: int
    g: list[PiecewiseLinear]
    f: list[PeriodicFunction]
    predicted_atoms: list[Fraction]
    config: Config
    trivial: bool = False
    combination: list[int] | None = None
    notes: list[str] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    mass_floor: Fraction | None = None

    def __post_init__(self):
        if self.mass_floor is None:
            self.mass_floor = Fraction(1, 2 * (2 * self.M + 1))

    def to_json(self) -> dict:
        from .configio import dump_body, dump_config, dump_periodic

        return {
            "kind": self.kind,
            "basis": self.basis.to_json(),
            "relation": _json_relation(self.relation),
            "eps": str(self.eps),
            "M": self.M,
            "mass_floor": str(self.mass_floor),
            "g": [dump_body(g) for g in self.g],
            "f": [dump_periodic(f) for f in self.f],
            "predicted_atoms": [str(t) for t in self.predicted_atoms],
            "combination": self.combination,
            "trivial": self.trivial,
            "notes": list(self.notes),
            "checks": {k: str(v) if isinstance(v, Fraction) else v for k, v in self.checks.items()},
            "config": dump_config(self.config),
        }

    @classmethod
    def from_json(cls, d: dict) -> "CounterexamplePlan":
        from .configio import parse_basis, parse_body, parse_config, parse_periodic

        basis = parse_basis(d["basis"])
        return cls(
            d["kind"],
            basis,
            dict(d["relation"]),
            Fraction(d["eps"]),
            int(d["M"]),
            [parse_body(g, f"g[{i}]") for i, g in enumerate(d.get("g", []))],
            [parse_periodic(basis, f, f"f[{i}]") for i, f in enumerate(d.get("f", []))],
            [Fraction(t) for t in d.get("predicted_atoms", [])],
            parse_config(basis, d["config"]),
            bool(d.get("trivial", False)),
            d.get("combination"),
            list(d.get("notes", [])),
            dict(d.get("checks", {})),
            Fraction(d["mass_floor"]) if "mass_floor" in d else None,
        )


def _json_relation(rel: dict) -> dict:
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in rel.items()}


def _atoms(q: int, M: int) -> list[Fraction]:
    return sorted({Fraction(t, q) % 1 for t in range(-M, M + 1)})


def _default_checks(kind: str) -> dict:
    return {"N": 10000, "atom_tolerance": Fraction(1, 10 ** 6), "mass_slack": Fraction(1, 50)}


def _scalar_relation(alpha: SymbolicReal, gammas: list[SymbolicReal]) -> tuple[int, list[int], int] | None:
    """Integers (q > 0, p_j, p_0) with q*alpha + sum p_j gamma_j = p_0, or None."""
    basis = alpha.basis
    cols = [alpha.coords()] + [g.coords() for g in gammas] + [(-basis.rational(1)).coords()]
    M = [[c[i] for c in cols] for i in range(len(cols[0]))]
    ker = rational_kernel(M)
    if not ker or not kernel_full_support(ker, [0]):
        return None
    # simplest kernel vector with nonzero alpha coordinate
    cands = [v for v in ker if v[0] != 0]
    v = min(cands, key=lambda v: sum(abs(x) for x in v))
    if v[0] < 0:
        v = tuple(-x for x in v)
    return v[0], list(v[1:-1]), v[-1]


def _trivial_scalar(basis: Basis, p0: PolynomialSR, betas, eps, kind: str, note: str) -> CounterexamplePlan:
    cfg = ScalarConfig(basis, p0, (), f"construction:{kind}")
    return CounterexamplePlan(
        kind, basis, {"q": 1, "p0": 0, "p": [0] * len(betas)}, eps, 1, [], [], [], cfg, True,
        notes=[note], checks={},
    )


def build_counterexample_scalar(alpha: SymbolicReal, betas: Sequence[SymbolicReal], eps=DEFAULT_EPS) -> CounterexamplePlan:
    """Perturbations f_j of period beta_j making {n alpha + sum f_j(n)} non-uniform.

    Uses a relation q alpha + sum p_j gamma_j = p_0 (gamma_j = 1/beta_j) and
    g_j(x) = (p_j/q) x on [0, 1-eps].
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise ValueError("eps must lie in (0, 1/4)")
    basis = alpha.basis
    betas = list(betas)
    p0 = PolynomialSR.linear(alpha) if not alpha.is_zero() else PolynomialSR(basis, ())
    if alpha.is_rational():
        return _trivial_scalar(basis, p0, betas, eps, "scalar", "alpha is rational: f_j = 0 already gives finitely many values")
    gammas = [basis.reciprocal(b) for b in betas]
    rel = _scalar_relation(alpha, gammas)
    if rel is None:
        raise NoRelation("alpha is not a rational combination of 1 and the gamma_j; uniform distribution holds")
    q, ps, p_0 = rel
    M = q + sum(abs(p) for p in ps)
    g = [_linear_g(Fraction(p, q), eps) for p in ps]
    f = [PeriodicFunction(b, body) for b, body in zip(betas, g)]
    one = PolynomialSR.linear(basis.rational(1))
    cfg = ScalarConfig(basis, p0, tuple(Perturbation(fj, one) for fj in f), "construction:scalar")
    return CounterexamplePlan(
        "scalar", basis, {"q": q, "p0": p_0, "p": ps}, eps, M, g, f, _atoms(q, M), cfg,
        checks=_default_checks("scalar"),
    )


def _poly_relation(P0: PolynomialSR, units: list[PolynomialSR]):
    """(q, p_j, R) with q P0 + sum p_j units_j = R having integer coefficients, or None."""
    from .classifier import _irrational_coords

    D = max([P0.degree] + [U.degree for U in units] + [1])
    cols = [_irrational_coords(P0, D)] + [_irrational_coords(U, D) for U in units]
    M = [[c[i] for c in cols] for i in range(len(cols[0]))]
    ker = rational_kernel(M) if M else []
    if not ker or not kernel_full_support(ker, [0]):
        return None
    v = min((v for v in ker if v[0] != 0), key=lambda v: sum(abs(x) for x in v))
    if v[0] < 0:
        v = tuple(-x for x in v)
    R = P0.scale(v[0])
    for c, U in zip(v[1:], units):
        if c:
            R = R + U.scale(c)
    den = 1
    for c in R.coeffs:
        den = den * c.rational.denominator // math.gcd(den, c.rational.denominator)
    v = tuple(x * den for x in v)
    R = R.scale(den)
    return v[0], list(v[1:]), R


def build_counterexample_poly(P0: PolynomialSR, Ps: Sequence[PolynomialSR], betas: Sequence[SymbolicReal], eps=DEFAULT_EPS) -> CounterexamplePlan:
    """Polynomial version: q P0 + sum p_j gamma_j P_j = R with R integer-coefficient."""
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise ValueError("eps must lie in (0, 1/4)")
    basis = P0.basis
    Ps, betas = list(Ps), list(betas)
    if len(Ps) != len(betas):
        raise ValueError("one period per argument polynomial")
    if not P0.has_irrational_coefficient():
        return _trivial_scalar(basis, P0, betas, eps, "poly", "P0 has rational coefficients: finitely many values with f_j = 0")
    gammas = [basis.reciprocal(b) for b in betas]
    units = [P.scale(g) for P, g in zip(Ps, gammas)]
    rel = _poly_relation(P0, units)
    if rel is None:
        raise NoRelation("P0 is not a rational combination of the P_j/beta_j plus a rational polynomial")
    q, ps, R = rel
    M = q + sum(abs(p) for p in ps)
    g = [_linear_g(Fraction(p, q), eps) for p in ps]
    f = [PeriodicFunction(b, body) for b, body in zip(betas, g)]
    cfg = ScalarConfig(basis, P0, tuple(Perturbation(fj, P) for fj, P in zip(f, Ps)), "construction:poly")
    relation = {"q": q, "p": ps, "p0": 1, "R": [str(c.rational) for c in R.coeffs]}
    return CounterexamplePlan("poly", basis, relation, eps, M, g, f, _atoms(q, M), cfg, checks=_default_checks("poly"))


def _vector_plan(kind, basis, Q_polys, arg_polys, betas, witness_a, witness_subset, eps, relation_extra) -> CounterexamplePlan:
    """Shared tail of the vector constructions.

    ``relation_extra`` carries (q, {(i, j): p}) for the combined relation
    sum a_l Q_l + sum (p/q) gamma P = R/q.
    """
    q, pmap = relation_extra
    d = len(Q_polys)
    a_full = [0] * d
    for i, a in zip(witness_subset, witness_a):
        a_full[i] = a
    M = q + sum(abs(p) for p in pmap.values())
    comps = []
    g_all, f_all = [], []
    for i in range(d):
        perts = []
        for j, (beta, P) in enumerate(zip(betas[i], arg_polys[i])):
            p = pmap.get((i, j), 0)
            if a_full[i] == 0 or p == 0:
                continue
            h = _linear_g(Fraction(p, q), eps)
            body = _scaled_body(h, Fraction(1, a_full[i]))
            fj = PeriodicFunction(beta, body)
            g_all.append(h)
            f_all.append(fj)
            perts.append(Perturbation(fj, P))
        comps.append(ScalarConfig(basis, Q_polys[i], tuple(perts)))
    cfg = VectorConfig(basis, tuple(comps), f"construction:{kind}")
    relation = {
        "subset": list(witness_subset),
        "a": list(witness_a),
        "q": q,
        "p": [{"component": i, "beta": j, "p": p} for (i, j), p in sorted(pmap.items())],
    }
    return CounterexamplePlan(
        kind, basis, relation, eps, M, g_all, f_all, _atoms(q, M), cfg, combination=a_full,
        checks=_default_checks(kind),
    )


def build_counterexample_vector(alphas: Sequence[SymbolicReal], betas: Sequence, eps=DEFAULT_EPS) -> CounterexamplePlan:
    """Vector version: a violating subset L with integers a_l gives f_l = h_l / a_l.

    ``betas[i]`` is a period or a list of periods for component i.
    """
    eps = as_fraction(eps)
    alphas = list(alphas)
    basis = alphas[0].basis
    betas = [_as_list(b) for b in betas]
    if len(betas) != len(alphas):
        raise ValueError("one period list per component")
    one = PolynomialSR.linear(basis.rational(1))
    Qs = [PolynomialSR.linear(a) for a in alphas]
    if not rational_independence(alphas).independent:
        cfg = VectorConfig(basis, tuple(ScalarConfig(basis, Q) for Q in Qs), "construction:vector")
        return CounterexamplePlan(
            "vector", basis, {"q": 1, "p": []}, eps, 1, [], [], [], cfg, True,
            notes=["1, alpha_1..alpha_d are rationally dependent: f = 0 is already non-uniform"],
        )
    gammas = [[basis.reciprocal(b) for b in bs] for bs in betas]
    verdict = total_q_independence(list(zip(alphas, gammas)))
    if verdict.independent:
        raise NoViolation("the tuples are totally Q-independent; uniform distribution holds")
    w = verdict.witness
    # sum a alpha - r0 - sum r gamma = 0, i.e. q = 1, p = -r, p0 = r0
    pmap = {(e["tuple"], e["beta"]): -e["coeff"] for e in w["r"] if e["coeff"]}
    plan = _vector_plan("vector", basis, Qs, [[one] * len(bs) for bs in betas], betas, w["a"], w["subset"], eps, (1, pmap))
    plan.relation["p0"] = w["r0"]
    return plan


def build_counterexample_polyvec(Qs: Sequence[PolynomialSR], Ps: Sequence, betas: Sequence, eps=DEFAULT_EPS) -> CounterexamplePlan:
    """Polynomial vector version; ``Ps[i]``/``betas[i]`` may be single items or lists."""
    eps = as_fraction(eps)
    Qs = list(Qs)
    basis = Qs[0].basis
    Ps = [_as_list(P) for P in Ps]
    betas = [_as_list(b) for b in betas]
    if not q_independence_polys(Qs).independent:
        cfg = VectorConfig(basis, tuple(ScalarConfig(basis, Q) for Q in Qs), "construction:polyvec")
        return CounterexamplePlan(
            "polyvec", basis, {"q": 1, "p": []}, eps, 1, [], [], [], cfg, True,
            notes=["Q_1..Q_d are Q-dependent: f = 0 is already non-uniform"],
        )
    gammas = [[basis.reciprocal(b) for b in bs] for bs in betas]
    units = [[P.scale(g) for P, g in zip(Pl, gl)] for Pl, gl in zip(Ps, gammas)]
    verdict = total_q_independence_polys(list(zip(Qs, units)))
    if verdict.independent:
        raise NoViolation("the polynomial tuples are totally Q-independent; uniform distribution holds")
    w = verdict.witness
    R = w["rational_polynomial"]
    den = 1
    for c in R.coeffs:
        den = den * c.rational.denominator // math.gcd(den, c.rational.denominator)
    a = [x * den for x in w["a"]]
    pmap = {(e["tuple"], e["sibling"]): -e["coeff"] * den for e in w["r"] if e["coeff"]}
    plan = _vector_plan("polyvec", basis, Qs, Ps, betas, a, w["subset"], eps, (1, pmap))
    plan.relation["R"] = [str(c.rational * den) for c in R.coeffs]
    return plan


# -- plan checks ------------------------------------------------------------------------------


def relation_residual(plan: CounterexamplePlan):
    """The plan's relation evaluated exactly.

    Scalar and polynomial plans return the difference from the claimed
    right-hand side (zero iff sound).  Vector plans return the polynomial
    sum a_l Q_l + sum (p/q) gamma P, which must have rational coefficients.
    """
    cfg = plan.config
    basis = plan.basis
    rel = plan.relation
    if plan.trivial:
        return basis.zero()
    if plan.kind == "scalar":
        alpha = cfg.p0.coeffs[0]
        total = alpha * rel["q"] - rel["p0"]
        for p, fj in zip(rel["p"], plan.f):
            total = total + basis.reciprocal(fj.period) * p
        return total
    if plan.kind == "poly":
        P = cfg.p0.scale(rel["q"])
        for p, pert in zip(rel["p"], cfg.perturbations):
            P = P + pert.arg.scale(basis.reciprocal(pert.f.period)).scale(p)
        claimed = PolynomialSR(basis, tuple(basis.rational(Fraction(c)) for c in rel["R"]))
        return P - claimed
    comps = cfg.components
    total = PolynomialSR(basis, ())
    for i, a in zip(rel["subset"], rel["a"]):
        total = total + comps[i].p0.scale(a)
    for i, comp in enumerate(comps):
        for pert in comp.perturbations:
            # f = h / a_i with h of slope p/q near 0, so p/q = slope * a_i
            slope = pert.f.body.segment_slopes()[0] * plan.combination[i]
            total = total + pert.arg.scale(basis.reciprocal(pert.f.period)).scale(slope)
    return total


def combined_points(plan: CounterexamplePlan, points) -> list[FixedInterval]:
    """Project vector points onto the violating combination sum a_i x_i (mod 1)."""
    if plan.combination is None:
        return [p.coords[0] for p in points]
    out = []
    for p in points:
        S = max(c.scale_bits for c in p.coords)
        mid = rad = 0
        for a, c in zip(plan.combination, p.coords):
            if a:
                c = c.rescale(S) if c.scale_bits != S else c
                mid += a * c.midpoint
                rad += abs(a) * c.radius
        out.append(FixedInterval(S, mid % (1 << S), rad))
    return out


def verify_counterexample(plan: CounterexamplePlan, N: int | None = None, F: int = 64) -> list[dict]:
    """Run a plan's predicted checks; each entry has name, value, bound, ok."""
    from .diagnostics import mass_near

    out = []
    if plan.trivial:
        out.append({"name": "trivial_plan", "value": "f = 0", "bound": "", "ok": True})
        return out
    out.extend(_relation_checks(plan))
    for j, g in enumerate(plan.g):
        slope = g.segment_slopes()[0]
        end = 1 - plan.eps
        ok = g.value_at(end) == slope * end and g.value_at(0) == 0
        out.append({"name": f"g{j}_linear_on_[0,1-eps]", "value": str(slope), "bound": str(end), "ok": ok})
    N = N or int(plan.checks.get("N", 10000))
    tol = Fraction(plan.checks.get("atom_tolerance", Fraction(1, 10 ** 6)))
    slack = Fraction(plan.checks.get("mass_slack", Fraction(1, 50)))
    pts = SequenceGenerator(plan.config, F).chunk(1, N)
    vals = combined_points(plan, pts)
    best, best_at = 0.0, None
    for t in plan.predicted_atoms:
        m = mass_near(vals, t, tol)["mass"]
        if m > best:
            best, best_at = m, t
    formula = Fraction(1, 2 * (2 * plan.M + 1))
    out.append({"name": "mass_floor_formula", "value": str(plan.mass_floor), "bound": str(formula), "ok": plan.mass_floor == formula})
    floor = float(plan.mass_floor - slack)
    out.append({
        "name": "atom_mass",
        "value": best,
        "at": None if best_at is None else f"{best_at.numerator}/{best_at.denominator}",
        "bound": floor,
        "ok": best >= floor,
    })
    return out


def _relation_checks(plan: CounterexamplePlan) -> list[dict]:
    res = relation_residual(plan)
    if plan.kind in ("scalar", "poly"):
        return [{"name": "relation_exact", "value": str(res), "bound": "0", "ok": res.is_zero()}]
    ok = not res.has_irrational_coefficient()
    return [{"name": "relation_rational", "value": str(res), "bound": "rational coefficients", "ok": ok}]


# -- a sequence without a limiting distribution ---------------------------------------------


class ScanExhausted(RuntimeError):
    """The orbit scan reached its limit before the required counts were certified."""


H0_POINTS = ((Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(-1, 2)), (Fraction(3, 4), Fraction(0)))

ORBIT_SCALE = 162  # orbit positions are integers at this binary scale
ENDPOINT_BITS = 64  # interval endpoints are dyadic at this scale
AVOID_BITS = 80  # required clearance between endpoints and orbit points


def h0() -> PiecewiseLinear:
    """-x on [0, 1/2], rising with slope 2 to 0 at 3/4, then 0."""
    return PiecewiseLinear(H0_POINTS)


class _Orbit:
    """Positions {m alpha} as integers at scale ORBIT_SCALE with radius rad*m."""

    def __init__(self, alpha: SymbolicReal):
        from .exactnum import eval_interval

        iv = eval_interval(alpha, ORBIT_SCALE - 2)
        self.S = iv.scale_bits
        self.one = 1 << self.S
        self.step = iv.midpoint % self.one
        self.rad = iv.radius
        self.xs: list[int] = [0]  # index 0 unused
        self._cur = 0

    def extend(self, n: int) -> None:
        xs, step, one = self.xs, self.step, self.one
        cur = self._cur
        while len(xs) <= n:
            cur = (cur + step) % one
            xs.append(cur)
        self._cur = cur

    def radius(self, m: int) -> int:
        return self.rad * m

    def fixed(self, q: Fraction) -> int:
        """A dyadic (or rational) threshold at the orbit scale, rounded down."""
        return (q.numerator << self.S) // q.denominator


@dataclass
class NoDistStage:
    k: int
    N: int
    M: int
    L: list[int]
    intervals: list[tuple[Fraction, Fraction, Fraction]]
    delta: Fraction
    added_length: Fraction
    count_kl: int
    count_13: int

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "N": self.N,
            "M": self.M,
            "L": self.L,
            # endpoints are dyadic at 2**-64 and apexes at 2**-65
            "interval_scale_bits": ENDPOINT_BITS + 1,
            "intervals": [[int(x * _IV_DEN) for x in iv] for iv in self.intervals],
            "delta": str(self.delta),
            "added_length": str(self.added_length),
            "count_kl": self.count_kl,
            "count_13": self.count_13,
        }


@dataclass
class NoDistPlan:
    """Stages of the iterative construction of h with h_{k+1} = h_k + sum of triangles.

    Stage k records N_{k+1}, M_{k+1}, the index set L_k and the intervals
    (a, c, b) added at that stage; ``delta`` is the budget available before
    the stage.
    """

    alpha: SymbolicReal
    K: int
    stages: list[NoDistStage]
    scan_limit: int
    slack: Fraction
    min_scale: int
    orbit_checked: int
    caveats: list[str] = field(default_factory=list)

    def h(self, k: int | None = None) -> PiecewiseLinear:
        """h_k (defaults to the final function h_K)."""
        k = self.K if k is None else k
        pts = list(H0_POINTS)
        for st in self.stages[:k]:
            for a, c, b in st.intervals:
                pts.extend(((a, -a), (c, -b), (b, -b)))
        pts.sort()
        return PiecewiseLinear(tuple(pts))

    @property
    def total_length(self) -> Fraction:
        return sum((st.added_length for st in self.stages), Fraction(0))

    def scalar_config(self) -> ScalarConfig:
        """{n alpha + f(n)} with f(t) = h({alpha t}), period 1/alpha."""
        basis = self.alpha.basis
        f = PeriodicFunction(basis.reciprocal(self.alpha), self.h())
        one = PolynomialSR.linear(basis.rational(1))
        return ScalarConfig(basis, PolynomialSR.linear(self.alpha), (Perturbation(f, one),), "construction:nodist")

    def torus_config(self):
        """The same sequence as G({n alpha}) with G(x) = x + h(x) of winding number 1."""
        from .model import TorusComponent, TorusConfig, TorusMap

        basis = self.alpha.basis
        G = TorusMap((1,), (self.h(),))
        comp = TorusComponent(G, (PolynomialSR.linear(self.alpha),))
        return TorusConfig(basis, (comp,), "construction:nodist")

    def to_json(self) -> dict:
        from .configio import dump_config

        return {
            "kind": "nodist",
            "basis": self.alpha.basis.to_json(),
            "config": dump_config(self.scalar_config()),
            "alpha": self.alpha.to_json(),
            "K": self.K,
            "scan_limit": self.scan_limit,
            "slack": str(self.slack),
            "min_scale": self.min_scale,
            "orbit_checked": self.orbit_checked,
            "caveats": self.caveats,
            "total_length": str(self.total_length),
            "stages": [st.to_json() for st in self.stages],
        }

    @classmethod
    def from_json(cls, d: dict) -> "NoDistPlan":
        from .configio import parse_basis, parse_sr

        alpha = parse_sr(parse_basis(d["basis"]), d["alpha"], "alpha")
        stages = [
            NoDistStage(
                st["k"], st["N"], st["M"], list(st["L"]),
                _parse_intervals(st),
                Fraction(st["delta"]), Fraction(st["added_length"]), st["count_kl"], st["count_13"],
            )
            for st in d["stages"]
        ]
        return cls(alpha, d["K"], stages, d["scan_limit"], Fraction(d["slack"]), d["min_scale"], d["orbit_checked"], list(d.get("caveats", [])))


_IV_DEN = 1 << (ENDPOINT_BITS + 1)


def _parse_intervals(st: dict) -> list[tuple[Fraction, Fraction, Fraction]]:
    if "interval_scale_bits" in st:
        den = 1 << int(st["interval_scale_bits"])
        return [tuple(Fraction(int(x), den) for x in iv) for iv in st["intervals"]]
    return [tuple(Fraction(x) for x in iv) for iv in st["intervals"]]


class _Modified:
    """Sorted open intervals (a, b) where h differs from h_0, at the orbit scale."""

    def __init__(self, S: int):
        self.S = S
        self.starts: list[int] = []
        self.ends: list[int] = []

    def add_all(self, ivs: list[tuple[Fraction, Fraction, Fraction]]) -> None:
        import bisect

        for a, _, b in ivs:
            A = (a.numerator << self.S) // a.denominator
            B = (b.numerator << self.S) // b.denominator
            i = bisect.bisect_left(self.starts, A)
            self.starts.insert(i, A)
            self.ends.insert(i, B)

    def locate(self, x: int, r: int) -> bool:
        """Whether the point x (radius r) lies inside some interval; the decision must be certain."""
        import bisect

        i = bisect.bisect_right(self.starts, x) - 1
        if i < 0:
            if self.starts and abs(self.starts[0] - x) <= r:
                raise ArithmeticError("orbit point too close to an interval endpoint")
            return False
        A, B = self.starts[i], self.ends[i]
        if min(abs(x - A), abs(x - B)) <= r or (i + 1 < len(self.starts) and abs(self.starts[i + 1] - x) <= r):
            raise ArithmeticError("orbit point too close to an interval endpoint")
        return A < x < B

    def gap(self, x: int) -> int | None:
        """Distance from x (outside every interval) to the nearest interval endpoint."""
        import bisect

        if not self.starts:
            return None
        i = bisect.bisect_right(self.starts, x)
        best = None
        if i > 0:
            best = x - self.ends[i - 1]
        if i < len(self.starts):
            d = self.starts[i] - x
            best = d if best is None else min(best, d)
        return best


def _classify_orbit(orb: _Orbit, mod: _Modified, m: int, thr: dict) -> tuple[bool, bool, bool]:
    """(in (7/8,1), in (15/16,1), unmodified point of (0,1/2)) for x_m + h(x_m) mod 1."""
    x = orb.xs[m]
    r = orb.radius(m)
    for t in thr.values():
        if abs(x - t) <= r:
            raise ArithmeticError(f"orbit point {m} is not separated from a threshold")
    if mod.locate(x, r):
        return True, True, False
    if x < thr["1/2"]:
        return False, False, x > 0
    if x < thr["3/4"]:
        return False, False, False
    return x > thr["7/8"], x > thr["15/16"], False


def nodist_construct(
    alpha: SymbolicReal,
    K: int = 2,
    scan_limit: int = 10 ** 6,
    min_scale: int = 1000,
    slack=Fraction(1, 10),
) -> NoDistPlan:
    """Build h = h_K so that {n alpha + h({n alpha})} has no limiting distribution.

    Stage k scans for N_{k+1} (share of x + h_k(x) in (7/8, 1) at most
    (1 - slack)/4) and M_{k+1} (unmodified points of (0, 1/2) after N_{k+1}
    at least (1 + slack) 3/8 of M_{k+1}), then hangs a narrow triangle
    below h_k around each such point.
    """
    import bisect

    if alpha.is_rational():
        raise ValueError("alpha must be irrational over the basis")
    if not 1 <= K <= 4:
        raise ValueError("depth K must lie in 1..4")
    slack = as_fraction(slack)
    orb = _Orbit(alpha)
    S = orb.S
    thr = {k: orb.fixed(Fraction(k)) for k in ("1/2", "3/4", "7/8", "15/16")}
    mod = _Modified(S)
    stages: list[NoDistStage] = []
    delta = Fraction(1, 8)
    M_prev = 0
    kl_ratio = (1 - slack) / 4
    l_ratio = (1 + slack) * Fraction(3, 8)
    for k in range(K):
        # (i) N_{k+1}
        start = max(M_prev + 1, min_scale)
        orb.extend(start)
        count = sum(_classify_orbit(orb, mod, m, thr)[0] for m in range(1, start))
        N = start - 1
        while True:
            N += 1
            if N > scan_limit:
                raise ScanExhausted(f"stage {k}: no N <= {scan_limit} met the (7/8,1) count bound")
            orb.extend(N)
            count += _classify_orbit(orb, mod, N, thr)[0]
            if N >= start and count <= kl_ratio * N:
                break
        count_kl = count
        # (ii) M_{k+1}
        L: list[int] = []
        M = N
        while True:
            M += 1
            if M > scan_limit:
                raise ScanExhausted(f"stage {k}: no M <= {scan_limit} met the (0,1/2) count bound")
            orb.extend(M)
            if _classify_orbit(orb, mod, M, thr)[2]:
                L.append(M)
            if len(L) >= l_ratio * M:
                break
        # (iii) intervals around x_m for m in L
        prefix = sorted(orb.xs[1:N + 1])
        Ls = sorted(L, key=lambda m: orb.xs[m])
        budget = delta / (16 * (k + 1))
        cap = (budget.numerator << S) // (2 * len(L) * budget.denominator)
        half, one = thr["1/2"], orb.one
        ulp_shift = S - ENDPOINT_BITS
        ivs = []
        for idx, m in enumerate(Ls):
            x = orb.xs[m]
            rx = orb.radius(m)
            j = bisect.bisect_left(prefix, x)
            cands = [cap, x, half - x]
            if j > 0:
                cands.append(x - prefix[j - 1])
            if j < len(prefix):
                cands.append(prefix[j] - x)
            if idx > 0:
                cands.append((x - orb.xs[Ls[idx - 1]]) // 2)
            if idx + 1 < len(Ls):
                cands.append((orb.xs[Ls[idx + 1]] - x) // 2)
            g = mod.gap(x)
            if g is not None:
                cands.append(g)
            r = min(cands) - rx
            # dyadic endpoints strictly inside the admissible window
            lo = ((x - r) >> ulp_shift) + 1
            hi = ((x + r) >> ulp_shift) - 1
            if (hi - lo) < 4 or (lo << ulp_shift) >= x - rx or (hi << ulp_shift) <= x + rx:
                raise ArithmeticError(f"no room for an interval around x_{m}")
            a = Fraction(lo, 1 << ENDPOINT_BITS)
            b = Fraction(hi, 1 << ENDPOINT_BITS)
            ivs.append((a, (a + b) / 2, b))
        added = sum((b - a for a, _, b in ivs), Fraction(0))
        assert added < budget
        stages.append(NoDistStage(k, N, M, sorted(L), ivs, delta, added, count_kl, len(L)))
        mod.add_all(ivs)
        delta -= added
        M_prev = M
    # endpoint clearance from the orbit up to scan_limit
    orb.extend(scan_limit)
    allx = sorted(orb.xs[1:scan_limit + 1])
    clearance = 1 << (S - AVOID_BITS)
    maxrad = orb.radius(scan_limit)
    for st in stages:
        for a, _, b in st.intervals:
            for e in (a, b):
                E = (e.numerator << S) // e.denominator
                j = bisect.bisect_left(allx, E)
                near = [abs(allx[i] - E) for i in (j - 1, j) if 0 <= i < len(allx)]
                if min(near) - maxrad < clearance:
                    raise ArithmeticError(f"endpoint {e} within 2**-{AVOID_BITS} of the orbit")
    caveats = [
        f"interval endpoints avoid x_1..x_{scan_limit} by at least 2**-{AVOID_BITS}; the rest of the orbit is not checked",
        "triangle apexes sit at dyadic midpoints of (a, b), within the interval but not exactly at x_m",
    ]
    return NoDistPlan(alpha, K, stages, scan_limit, slack, min_scale, scan_limit, caveats)


def nodist_counts(plan: NoDistPlan) -> list[dict]:
    """Shares of x_m + h(x_m) in (7/8,1) up to N_{k+1} and in (15/16,1) up to M_{k+1}, using the final h."""
    orb = _Orbit(plan.alpha)
    thr = {k: orb.fixed(Fraction(k)) for k in ("1/2", "3/4", "7/8", "15/16")}
    mod = _Modified(orb.S)
    for st in plan.stages:
        mod.add_all(st.intervals)
    top = max(st.M for st in plan.stages)
    orb.extend(top)
    flags = [None] + [_classify_orbit(orb, mod, m, thr) for m in range(1, top + 1)]
    out = []
    for st in plan.stages:
        a = sum(1 for m in range(1, st.N + 1) if flags[m][0])
        b = sum(1 for m in range(1, st.M + 1) if flags[m][1])
        out.append({"k": st.k, "N": st.N, "share_78": Fraction(a, st.N), "M": st.M, "share_1516": Fraction(b, st.M)})
    return out


def verify_nodist(plan: NoDistPlan) -> list[dict]:
    """Exact checks of the plan invariants; entries have name, value, bound, ok."""
    out = []
    for st in plan.stages:
        budget = st.delta / (16 * (st.k + 1))
        out.append({"name": f"stage{st.k}_added_length", "value": str(st.added_length), "bound": str(budget), "ok": st.added_length < budget})
    total = plan.total_length
    out.append({"name": "total_modified_length", "value": str(total), "bound": "1/8", "ok": total < Fraction(1, 8)})
    # h_{k+1} <= h_k: both piecewise linear, so the knots of either suffice
    for k in range(plan.K):
        hk, hk1 = plan.h(k), plan.h(k + 1)
        xs = sorted({p for p, _ in hk.points} | {p for p, _ in hk1.points})
        ok = all(u <= v for u, v in zip(hk1.values_at(xs), hk.values_at(xs)))
        out.append({"name": f"h{k + 1}<=h{k}", "value": len(xs), "bound": "all knots", "ok": ok})
    # disjointness and h_k = -x on each new interval
    ivs = sorted(iv for st in plan.stages for iv in st.intervals)
    disjoint = all(b1 < a2 for (_, _, b1), (a2, _, _) in zip(ivs, ivs[1:]))
    inside = all(0 < a and b < Fraction(1, 2) for a, _, b in ivs)
    out.append({"name": "intervals_disjoint_in_(0,1/2)", "value": len(ivs), "bound": "", "ok": disjoint and inside})
    # x + h(x) = chi(x) on a modified interval, so the dip is at most half its width
    worst = max(((b - a) / 2 for a, _, b in ivs), default=Fraction(0))
    out.append({"name": "dip_depth", "value": str(worst), "bound": "1/16", "ok": worst <= Fraction(1, 16)})
    for row, st in zip(nodist_counts(plan), plan.stages):
        out.append({"name": f"stage{st.k}_recorded_count_kl", "value": st.count_kl, "bound": float(st.N / 4), "ok": st.count_kl <= Fraction(st.N, 4)})
        out.append({"name": f"stage{st.k}_recorded_count_13", "value": st.count_13, "bound": float(3 * st.M / 8), "ok": st.count_13 >= Fraction(3 * st.M, 8)})
        out.append({"name": f"stage{row['k']}_share_78_at_N", "value": float(row["share_78"]), "bound": 0.25, "ok": row["share_78"] <= Fraction(1, 4)})
        out.append({"name": f"stage{row['k']}_share_1516_at_M", "value": float(row["share_1516"]), "bound": 0.375, "ok": row["share_1516"] >= Fraction(3, 8)})
    return out


__all__ = [
    "NoRelation",
    "NoViolation",
    "CounterexamplePlan",
    "DEFAULT_EPS",
    "dirichlet_simultaneous",
    "witness_find",
    "build_counterexample_scalar",
    "build_counterexample_poly",
    "build_counterexample_vector",
    "build_counterexample_polyvec",
    "relation_residual",
    "combined_points",
    "verify_counterexample",
    "ScanExhausted",
    "NoDistStage",
    "NoDistPlan",
    "h0",
    "nodist_construct",
    "nodist_counts",
    "verify_nodist",
]
