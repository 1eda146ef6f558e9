"""Criterion-driven verdicts on density, uniform distribution and distribution existence.

Verdicts come only from the exact oracles in :mod:`equidist.independence`;
numerical relation detection never feeds in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import kernel_full_support, rational_kernel
from .independence import (
    BASIS_ASSUMPTION,
    q_independence_polys,
    rational_independence,
    total_q_independence_polys,
)
from .model import (
    Config,
    PolynomialSR,
    ScalarConfig,
    TorusConfig,
    VectorConfig,
)

GUARANTEED = "Guaranteed"
NOT_DENSE = "NotDense"
UNKNOWN = "Unknown"
NOT_UD = "NotUD"
COUNTEREXAMPLE = "NotGuaranteed_CounterexampleExistsInClass"
NOT_APPLICABLE = "NotApplicable"

RULES = {
    "R1": "density: P0 has an irrational coefficient, so {P0(n) + sum f_j(P_j(n))} is dense for any almost periodic f_j",
    "R2": "not dense: every relevant coefficient is rational, so the sequence takes finitely many values mod 1",
    "R3": "density (vector, linear): 1, alpha_1..alpha_d rationally independent gives density in the unit cube",
    "R4": "density (vector, polynomial): Q-independent P_1..P_d give density in the unit cube",
    "R5": "uniform distribution: P0 is not a rational combination of the gamma_j P_j plus a rational polynomial",
    "R6": "uniform distribution (vector): the tuples (P_i, gamma_ij P_ij) are totally Q-independent",
    "R7": "sharpness: the uniform-distribution criterion fails, so some perturbation in the class breaks uniform distribution",
    "R8": "torus density: the winding combinations sum_j w_ij P_ij have an irrational coefficient (d = 1) or are Q-independent",
    "R9": "distribution existence: continuous torus maps of polynomial arguments always have a limiting distribution",
    "UD=>dense": "a uniformly distributed sequence is dense",
    "provenance": "configuration produced by a counterexample construction; non-uniformity is established by the construction",
}


@dataclass
class Verdict:
    density: str = UNKNOWN
    uniform: str = UNKNOWN
    distribution_exists_on_torus: str = NOT_APPLICABLE
    rules_fired: list[tuple[str, str]] = field(default_factory=list)
    constructor: str | None = None
    assumption: str = BASIS_ASSUMPTION

    def fire(self, rule: str) -> None:
        self.rules_fired.append((rule, RULES[rule]))

    @property
    def rule_ids(self) -> list[str]:
        return [r for r, _ in self.rules_fired]

    def to_json(self) -> dict:
        out = {
            "density": self.density,
            "uniform": self.uniform,
            "distribution_exists_on_torus": self.distribution_exists_on_torus,
            "rules_fired": [{"rule": r, "anchor": a} for r, a in self.rules_fired],
            "assumption": self.assumption,
        }
        if self.constructor:
            out["constructor"] = self.constructor
        return out


def _irrational_coords(P: PolynomialSR, D: int) -> list[Fraction]:
    z = P.basis.zero()
    out = []
    for k in range(D):
        c = P.coeffs[k] if k < P.degree else z
        out.extend(c.coords()[1:])
    return out


def ud_relation_exists(p0: PolynomialSR, unit_args: list[PolynomialSR]) -> bool:
    """Is P0 = sum r_j (gamma_j P_j) + (rational polynomial) for some rationals r_j?"""
    if not p0.has_irrational_coefficient():
        return True
    D = max([p0.degree] + [P.degree for P in unit_args])
    cols = [_irrational_coords(p0, D)] + [_irrational_coords(P, D) for P in unit_args]
    M = [[c[i] for c in cols] for i in range(len(cols[0]))]
    ker = rational_kernel(M)
    return bool(ker) and kernel_full_support(ker, [0])


def _finitely_many_values(cfg: ScalarConfig, units) -> bool:
    return not cfg.p0.has_irrational_coefficient() and all(not P.has_irrational_coefficient() for P, _ in units)


def _scalar_constructor(cfg: ScalarConfig) -> str:
    linear = cfg.p0.degree <= 1 and all(p.arg.degree == 1 and p.arg.coeffs[0].is_rational() and p.arg.coeffs[0].rational == 1 for p in cfg.perturbations)
    return "build_counterexample_scalar" if linear else "build_counterexample_poly"


def _is_construction(cfg) -> bool:
    return bool(cfg.provenance) and str(cfg.provenance).startswith("construction:")


def classify_scalar(cfg: ScalarConfig) -> Verdict:
    v = Verdict()
    units = cfg.unit_arguments()
    if cfg.p0.has_irrational_coefficient():
        v.density = GUARANTEED
        v.fire("R1")
    elif _finitely_many_values(cfg, units):
        v.density = NOT_DENSE
        v.uniform = NOT_UD
        v.fire("R2")
    if v.uniform == UNKNOWN:
        if not ud_relation_exists(cfg.p0, [P for P, _ in units]):
            v.uniform = GUARANTEED
            v.fire("R5")
        else:
            v.uniform = COUNTEREXAMPLE
            v.constructor = _scalar_constructor(cfg)
            v.fire("R7")
    v.distribution_exists_on_torus = GUARANTEED
    v.fire("R9")
    return _finish(v, cfg)


def classify_vector(cfg: VectorConfig) -> Verdict:
    v = Verdict()
    comps = list(cfg.components)
    p0s = [c.p0 for c in comps]
    units = [c.unit_arguments() for c in comps]
    linear = all(P.degree <= 1 for P in p0s)
    if linear:
        alphas = [P.coeffs[0] if P.degree else P.basis.zero() for P in p0s]
        if rational_independence(alphas).independent:
            v.density = GUARANTEED
            v.fire("R3")
    if v.density == UNKNOWN and q_independence_polys(p0s).independent:
        v.density = GUARANTEED
        v.fire("R4")
    if v.density == UNKNOWN:
        all_finite = all(_finitely_many_values(c, u) for c, u in zip(comps, units))
        no_perturbations = all(not c.perturbations for c in comps)
        if all_finite or no_perturbations:
            # Q-dependent P's without perturbations satisfy a rational relation
            v.density = NOT_DENSE
            v.uniform = NOT_UD
            v.fire("R2")
    if v.uniform == UNKNOWN:
        tuples = [(c.p0, [P for P, _ in u]) for c, u in zip(comps, units)]
        if total_q_independence_polys(tuples).independent:
            v.uniform = GUARANTEED
            v.fire("R6")
        else:
            v.uniform = COUNTEREXAMPLE
            v.constructor = "build_counterexample_vector" if linear else "build_counterexample_polyvec"
            v.fire("R7")
    v.distribution_exists_on_torus = GUARANTEED
    v.fire("R9")
    return _finish(v, cfg)


def classify_torus(cfg: TorusConfig) -> Verdict:
    v = Verdict()
    combos = [c.combination() for c in cfg.components]
    if len(combos) == 1:
        if combos[0].has_irrational_coefficient():
            v.density = GUARANTEED
            v.fire("R8")
    elif q_independence_polys(combos).independent:
        v.density = GUARANTEED
        v.fire("R8")
    v.distribution_exists_on_torus = GUARANTEED
    v.fire("R9")
    return _finish(v, cfg)


def _finish(v: Verdict, cfg) -> Verdict:
    if _is_construction(cfg) and v.uniform != GUARANTEED:
        v.uniform = NOT_UD
        v.fire("provenance")
    if v.uniform == GUARANTEED and v.density != GUARANTEED:
        v.density = GUARANTEED
        v.fire("UD=>dense")
    assert not (v.density == NOT_DENSE and v.uniform == GUARANTEED)
    return v


def classify(cfg: Config) -> Verdict:
    if isinstance(cfg, ScalarConfig):
        return classify_scalar(cfg)
    if isinstance(cfg, VectorConfig):
        return classify_vector(cfg)
    if isinstance(cfg, TorusConfig):
        return classify_torus(cfg)
    raise TypeError(f"unsupported config type {type(cfg).__name__}")


__all__ = [
    "Verdict",
    "RULES",
    "classify",
    "classify_scalar",
    "classify_vector",
    "classify_torus",
    "ud_relation_exists",
    "GUARANTEED",
    "NOT_DENSE",
    "UNKNOWN",
    "NOT_UD",
    "COUNTEREXAMPLE",
    "NOT_APPLICABLE",
]
