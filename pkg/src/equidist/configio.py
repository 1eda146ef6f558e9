"""JSON (de)serialization of bases, polynomials, periodic functions and configs.

Schema summary (see docs/config_schema.md for the full description)::

    {"basis": [{"name": "sqrt2", "kind": "sqrt", "of": "2"}, ...],
     "config": {"kind": "scalar", "p0": <poly>, "perturbations": [{"f": <periodic>, "arg": <poly>}]},
     "run": {"n": 10000, "F": 64, ...}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .exactnum import Basis, SymbolicReal, as_fraction
from .model import (
    MultiTrigTerm,
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
    Config,
)


class SchemaError(ValueError):
    """Malformed configuration; the message names the offending field."""


def _frac(v, where: str) -> Fraction:
    try:
        return as_fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: not a rational: {v!r}") from exc


# -- symbolic reals ---------------------------------------------------------------


def parse_sr(basis: Basis, v: Any, where: str = "value") -> SymbolicReal:
    """Accepts a rational (number/string), {"gen": name, "coeff": q} or [[gen|"1", q], ...]."""
    try:
        if isinstance(v, (int, str)) and not isinstance(v, bool):
            return basis.rational(_frac(v, where))
        if isinstance(v, float):
            raise SchemaError(f"{where}: floats are not accepted, write rationals as strings")
        if isinstance(v, Mapping):
            if "gen" not in v:
                raise SchemaError(f"{where}: object form needs a 'gen' key")
            out = basis.gen(v["gen"], _frac(v.get("coeff", "1"), f"{where}.coeff"))
            if "rational" in v:
                out = out + _frac(v["rational"], f"{where}.rational")
            return out
        if isinstance(v, list):
            total = basis.zero()
            for i, pair in enumerate(v):
                if not isinstance(pair, list) or len(pair) != 2:
                    raise SchemaError(f"{where}[{i}]: expected [generator, coefficient]")
                name, c = pair
                c = _frac(c, f"{where}[{i}]")
                total = total + (basis.rational(c) if name == "1" else basis.gen(name, c))
            return total
    except KeyError as exc:
        raise SchemaError(f"{where}: undeclared generator {exc.args[0]!r}") from exc
    raise SchemaError(f"{where}: cannot parse {v!r}")


def dump_sr(x: SymbolicReal) -> Any:
    if x.is_rational():
        return str(x.rational)
    return x.to_json()


# -- polynomials --------------------------------------------------------------------


def parse_poly(basis: Basis, d: Any, where: str = "poly") -> PolynomialSR:
    """{"coeffs": <sr>, "degree": D} (monomial) or {"monomials": [{"coeffs":..,"degree":..}, ...]}."""
    if not isinstance(d, Mapping):
        raise SchemaError(f"{where}: expected an object")
    if "monomials" in d:
        total = PolynomialSR(basis, ())
        for i, m in enumerate(d["monomials"]):
            total = total + parse_poly(basis, m, f"{where}.monomials[{i}]")
        return total
    if "coeffs" not in d:
        raise SchemaError(f"{where}: needs 'coeffs' or 'monomials'")
    deg = d.get("degree", 1)
    if not isinstance(deg, int) or deg < 1:
        raise SchemaError(f"{where}.degree: must be an integer >= 1")
    c = parse_sr(basis, d["coeffs"], f"{where}.coeffs")
    if c.is_zero():
        return PolynomialSR(basis, ())
    return PolynomialSR.monomial(c, deg)


def dump_poly(P: PolynomialSR) -> dict:
    mons = [{"coeffs": dump_sr(c), "degree": k} for k, c in enumerate(P.coeffs, start=1) if not c.is_zero()]
    if len(mons) == 1:
        return mons[0]
    return {"monomials": mons}


# -- bodies and periodic functions ---------------------------------------------------------


def parse_body(d: Mapping, where: str):
    kind = d.get("kind")
    if kind == "trig":
        terms = []
        for i, t in enumerate(d.get("terms", [])):
            h = t.get("harmonic", 1)
            if not isinstance(h, int) or h < 0:
                raise SchemaError(f"{where}.terms[{i}].harmonic: must be a nonnegative integer")
            terms.append(
                TrigTerm(
                    _frac(t.get("amp"), f"{where}.terms[{i}].amp"),
                    h,
                    _frac(t.get("phase", "0"), f"{where}.terms[{i}].phase"),
                    _frac(t.get("phase_rad", "0"), f"{where}.terms[{i}].phase_rad"),
                )
            )
        return TrigBody(tuple(terms))
    if kind == "pwl":
        if "ipoints" in d:
            # compact form: integer positions/values over 2**scale_bits
            s = int(d["scale_bits"])
            den = 1 << s
            pts = [(Fraction(p, den), Fraction(v, den)) for p, v in d["ipoints"]]
        else:
            pts = [
                (_frac(p, f"{where}.points[{i}][0]"), _frac(v, f"{where}.points[{i}][1]"))
                for i, (p, v) in enumerate(d.get("points", []))
            ]
        try:
            return PiecewiseLinear(tuple(pts))
        except ValueError as exc:
            raise SchemaError(f"{where}.points: {exc}") from exc
    raise SchemaError(f"{where}.kind: expected 'trig' or 'pwl', got {kind!r}")


def dump_body(body) -> dict:
    if isinstance(body, PiecewiseLinear):
        dens = {p.denominator for p, _ in body.points} | {v.denominator for _, v in body.points}
        if len(body.points) > 64 and all(dd & (dd - 1) == 0 for dd in dens):
            s = max(dd.bit_length() - 1 for dd in dens)
            den = 1 << s
            return {
                "kind": "pwl",
                "scale_bits": s,
                "ipoints": [[int(p * den), int(v * den)] for p, v in body.points],
            }
        return {"kind": "pwl", "points": body.to_json()}
    terms = []
    for t in body.terms:
        e = {"amp": str(t.amp), "harmonic": t.harmonic, "phase": str(t.phase)}
        if t.phase_rad:
            e["phase_rad"] = str(t.phase_rad)
        terms.append(e)
    return {"kind": "trig", "terms": terms}


def parse_periodic(basis: Basis, d: Any, where: str = "f") -> PeriodicFunction:
    if not isinstance(d, Mapping):
        raise SchemaError(f"{where}: expected an object")
    period = parse_sr(basis, d.get("period", "1"), f"{where}.period")
    body = parse_body(d, where)
    try:
        return PeriodicFunction(period, body)
    except ValueError as exc:
        raise SchemaError(f"{where}.period: {exc}") from exc


def dump_periodic(f: PeriodicFunction) -> dict:
    out = dump_body(f.body)
    out["period"] = dump_sr(f.period)
    return out


# -- configs -------------------------------------------------------------------------


def _parse_scalar(basis: Basis, d: Mapping, where: str, provenance=None) -> ScalarConfig:
    if "p0" not in d:
        raise SchemaError(f"{where}.p0: missing")
    p0 = parse_poly(basis, d["p0"], f"{where}.p0")
    perts = []
    for i, p in enumerate(d.get("perturbations", [])):
        f = parse_periodic(basis, p.get("f"), f"{where}.perturbations[{i}].f")
        arg = parse_poly(basis, p.get("arg", {"coeffs": "1", "degree": 1}), f"{where}.perturbations[{i}].arg")
        perts.append(Perturbation(f, arg))
    return ScalarConfig(basis, p0, tuple(perts), d.get("provenance", provenance))


def _dump_scalar(c: ScalarConfig) -> dict:
    out = {
        "p0": dump_poly(c.p0),
        "perturbations": [{"f": dump_periodic(p.f), "arg": dump_poly(p.arg)} for p in c.perturbations],
    }
    return out


def _parse_torus_map(d: Mapping, where: str) -> TorusMap:
    w = d.get("winding")
    if not isinstance(w, list) or not all(isinstance(x, int) for x in w):
        raise SchemaError(f"{where}.winding: expected a list of integers")
    res = []
    raw = d.get("residuals", [None] * len(w))
    if len(raw) != len(w):
        raise SchemaError(f"{where}.residuals: need one entry (or null) per variable")
    for i, r in enumerate(raw):
        res.append(None if r is None else parse_body(r, f"{where}.residuals[{i}]"))
    multi = []
    for i, m in enumerate(d.get("multi", [])):
        multi.append(MultiTrigTerm(_frac(m["amp"], f"{where}.multi[{i}].amp"), tuple(m["ks"]), _frac(m.get("phase", "0"), f"{where}.multi[{i}].phase")))
    try:
        return TorusMap(tuple(w), tuple(res), tuple(multi))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _dump_torus_map(G: TorusMap) -> dict:
    out = {"winding": list(G.winding), "residuals": [None if r is None else dump_body(r) for r in G.residuals]}
    if G.multi:
        out["multi"] = [{"amp": str(m.amp), "ks": list(m.ks), "phase": str(m.phase)} for m in G.multi]
    return out


def parse_config(basis: Basis, d: Mapping, where: str = "config") -> Config:
    kind = d.get("kind")
    prov = d.get("provenance")
    if kind == "scalar":
        return _parse_scalar(basis, d, where)
    if kind == "vector":
        comps = d.get("components")
        if not comps:
            raise SchemaError(f"{where}.components: at least one component required")
        return VectorConfig(basis, tuple(_parse_scalar(basis, c, f"{where}.components[{i}]") for i, c in enumerate(comps)), prov)
    if kind == "torus":
        comps = d.get("components")
        if not comps:
            raise SchemaError(f"{where}.components: at least one component required")
        out = []
        for i, c in enumerate(comps):
            G = _parse_torus_map(c.get("G", {}), f"{where}.components[{i}].G")
            args = tuple(parse_poly(basis, a, f"{where}.components[{i}].args[{j}]") for j, a in enumerate(c.get("args", [])))
            try:
                out.append(TorusComponent(G, args))
            except ValueError as exc:
                raise SchemaError(f"{where}.components[{i}]: {exc}") from exc
        return TorusConfig(basis, tuple(out), prov)
    raise SchemaError(f"{where}.kind: expected scalar|vector|torus, got {kind!r}")


def dump_config(cfg: Config) -> dict:
    if isinstance(cfg, ScalarConfig):
        out = {"kind": "scalar", **_dump_scalar(cfg)}
    elif isinstance(cfg, VectorConfig):
        out = {"kind": "vector", "components": [_dump_scalar(c) for c in cfg.components]}
    else:
        out = {
            "kind": "torus",
            "components": [{"G": _dump_torus_map(c.G), "args": [dump_poly(a) for a in c.args]} for c in cfg.components],
        }
    if cfg.provenance:
        out["provenance"] = cfg.provenance
    return out


def parse_basis(items: Any) -> Basis:
    if not isinstance(items, list):
        raise SchemaError("basis: expected a list of generator declarations")
    try:
        return Basis.from_json(items)
    except (ValueError, KeyError, ArithmeticError) as exc:
        raise SchemaError(f"basis: {exc}") from exc


@dataclass
class ExperimentConfig:
    """A parsed experiment file: basis, sequence config and run parameters."""

    basis: Basis
    config: Config | None
    run: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def F(self) -> int:
        return int(self.run.get("F", 64))


def load_experiment(d: Mapping) -> ExperimentConfig:
    if not isinstance(d, Mapping):
        raise SchemaError("top level: expected an object")
    basis = parse_basis(d.get("basis", []))
    cfg = parse_config(basis, d["config"]) if "config" in d else None
    run = dict(d.get("run", {}))
    if "F" in run and (not isinstance(run["F"], int) or run["F"] < 64):
        raise SchemaError("run.F: must be an integer >= 64")
    return ExperimentConfig(basis, cfg, run, dict(d))


def load_experiment_file(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return load_experiment(data)


def experiment_to_json(cfg: Config, run: Mapping | None = None) -> dict:
    out = {"basis": cfg.basis.to_json(), "config": dump_config(cfg)}
    if run:
        out["run"] = dict(run)
    return out


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed indentation."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


__all__ = [
    "SchemaError",
    "parse_sr",
    "dump_sr",
    "parse_poly",
    "dump_poly",
    "parse_periodic",
    "dump_periodic",
    "parse_body",
    "dump_body",
    "parse_config",
    "dump_config",
    "parse_basis",
    "ExperimentConfig",
    "load_experiment",
    "load_experiment_file",
    "experiment_to_json",
    "dumps",
]
