"""Command-line front end.

Exit codes: 0 success, 1 usage or schema error, 2 precision failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import classifier, constructions, diagnostics, independence
from .configio import SchemaError, dump_config, dumps, load_experiment_file, parse_basis, parse_poly, parse_sr
from .exactnum import (
    InverseNotRepresentable,
    PrecisionUnavailable,
    ProductNotRepresentable,
    SymbolicReal,
    format_decimal,
)
from .generator import SequenceGenerator, write_csv

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _clean(x: Any) -> Any:
    """Make a report JSON-ready: rationals and floats become 20-digit decimal strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return format_decimal(x)
    if isinstance(x, float):
        return format_decimal(Fraction(x))
    if isinstance(x, SymbolicReal):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "to_json"):
        return _clean(x.to_json())
    return str(x)


def _emit(obj: Any, out: str | None = None) -> None:
    text = dumps(_clean(obj))
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def _experiment(path: str):
    exp = load_experiment_file(path)
    if exp.config is None:
        raise SchemaError(f"{path}: missing 'config'")
    return exp


def _run_param(args, exp, name: str, default):
    v = getattr(args, name, None)
    if v is None:
        v = exp.run.get(name, default)
    if name == "F" and (not isinstance(v, int) or v < 64):
        raise UsageError(f"F: precision must be an integer >= 64, got {v!r}")
    return v


# -- subcommands ------------------------------------------------------------------------


def cmd_classify(args) -> int:
    exp = _experiment(args.config)
    _emit(classifier.classify(exp.config).to_json(), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    exp = _experiment(args.config)
    F = _run_param(args, exp, "F", 64)
    n1 = _run_param(args, exp, "n1", 1)
    n2 = _run_param(args, exp, "n2", None) or _run_param(args, exp, "n", 1000)
    gen = SequenceGenerator(exp.config, F)
    pts = gen.iterate(n1, n2, threads=args.threads)
    if args.out:
        with open(args.out, "w") as fh:
            write_csv(pts, fh)
    else:
        write_csv(pts, sys.stdout)
    return EXIT_OK


def cmd_analyze(args) -> int:
    exp = _experiment(args.config)
    F = _run_param(args, exp, "F", 64)
    N = _run_param(args, exp, "n", 10000)
    m = _run_param(args, exp, "grid", 64)
    delta = Fraction(str(_run_param(args, exp, "delta", "1/1000")))
    mass_min = Fraction(str(_run_param(args, exp, "mass_min", "1/20")))
    pts = list(SequenceGenerator(exp.config, F).iterate(1, N, threads=args.threads))
    d = len(pts[0].coords)
    report: dict[str, Any] = {"N": N, "F": F, "dim": d}
    report["discrepancy"] = (diagnostics.star_discrepancy_1d(pts) if d == 1 else diagnostics.box_discrepancy(pts, m)).to_json()
    weyl = args.weyl if args.weyl else [[1] + [0] * (d - 1)]
    sums = []
    for a in weyl:
        if len(a) != d:
            raise UsageError(f"--weyl {a}: expected {d} integers")
        sums.append(diagnostics.weyl_sum(pts, a).to_json())
    report["weyl"] = sums
    report["atoms"] = [diagnostics.atom_scan(pts, delta, mass_min, coord=k).to_json() for k in range(d)]
    if args.covering:
        report["covering_radius"] = diagnostics.covering_radius(pts, m)
    if args.drift is not None:
        if not 1 <= args.drift < N:
            raise UsageError(f"--drift {args.drift}: must lie in [1, n)")
        box = tuple(args.box) if args.box else None
        report["drift"] = diagnostics.cesaro_drift(pts, args.drift, N, m, box=box).to_json()
    if args.emit_hist:
        diagnostics.write_histogram(pts, m, args.emit_hist)
    _emit(report, args.out)
    return EXIT_OK


def _sr_list(basis, items, where):
    if not isinstance(items, list):
        raise SchemaError(f"{where}: expected a list")
    return [parse_sr(basis, v, f"{where}[{i}]") for i, v in enumerate(items)]


def cmd_independence(args) -> int:
    d = _load_json(args.input)
    basis = parse_basis(d.get("basis", []))
    mode = d.get("mode")
    if mode == "rational":
        v = independence.rational_independence(_sr_list(basis, d.get("values"), "values"))
    elif mode == "polys":
        v = independence.q_independence_polys([parse_poly(basis, p, f"polys[{i}]") for i, p in enumerate(d.get("polys", []))])
    elif mode == "total":
        tuples = []
        for i, t in enumerate(d.get("tuples", [])):
            tuples.append((parse_sr(basis, t.get("alpha"), f"tuples[{i}].alpha"), _sr_list(basis, t.get("betas", []), f"tuples[{i}].betas")))
        v = independence.total_q_independence(tuples)
    elif mode == "total_polys":
        tuples = []
        for i, t in enumerate(d.get("tuples", [])):
            P = parse_poly(basis, t.get("poly"), f"tuples[{i}].poly")
            sibs = [parse_poly(basis, q, f"tuples[{i}].siblings[{j}]") for j, q in enumerate(t.get("siblings", []))]
            tuples.append((P, sibs))
        v = independence.total_q_independence_polys(tuples)
    else:
        raise SchemaError(f"mode: expected rational|polys|total|total_polys, got {mode!r}")
    _emit(v.to_json(), args.out)
    return EXIT_OK


def _build_plan(kind: str, d: dict):
    basis = parse_basis(d.get("basis", []))
    eps = Fraction(str(d.get("eps", "1/10")))
    if kind == "scalar":
        return constructions.build_counterexample_scalar(parse_sr(basis, d.get("alpha"), "alpha"), _sr_list(basis, d.get("betas", []), "betas"), eps)
    if kind == "poly":
        P0 = parse_poly(basis, d.get("p0"), "p0")
        Ps = [parse_poly(basis, p, f"ps[{i}]") for i, p in enumerate(d.get("ps", []))]
        return constructions.build_counterexample_poly(P0, Ps, _sr_list(basis, d.get("betas", []), "betas"), eps)
    if kind == "vector":
        alphas = _sr_list(basis, d.get("alphas"), "alphas")
        betas = [_sr_list(basis, b if isinstance(b, list) else [b], f"betas[{i}]") for i, b in enumerate(d.get("betas", []))]
        return constructions.build_counterexample_vector(alphas, betas, eps)
    if kind == "polyvec":
        Qs = [parse_poly(basis, q, f"qs[{i}]") for i, q in enumerate(d.get("qs", []))]
        Ps = [[parse_poly(basis, p, f"ps[{i}][{j}]") for j, p in enumerate(ps if isinstance(ps, list) else [ps])] for i, ps in enumerate(d.get("ps", []))]
        betas = [_sr_list(basis, b if isinstance(b, list) else [b], f"betas[{i}]") for i, b in enumerate(d.get("betas", []))]
        return constructions.build_counterexample_polyvec(Qs, Ps, betas, eps)
    if kind == "nodist":
        alpha = parse_sr(basis, d.get("alpha"), "alpha")
        return constructions.nodist_construct(
            alpha,
            int(d.get("K", 2)),
            int(d.get("scan_limit", 10 ** 6)),
            int(d.get("min_scale", 1000)),
            Fraction(str(d.get("slack", "1/10"))),
        )
    raise UsageError(f"--kind {kind!r}")


def cmd_construct(args) -> int:
    d = _load_json(args.input)
    plan = _build_plan(args.kind, d)
    _emit(plan.to_json(), args.out)
    if args.emit_config:
        cfg = plan.scalar_config() if args.kind == "nodist" else plan.config
        _emit({"basis": cfg.basis.to_json(), "config": dump_config(cfg)}, args.emit_config)
    return EXIT_OK


def cmd_witness(args) -> int:
    exp = _experiment(args.config)
    F = _run_param(args, exp, "F", 64)
    target = [Fraction(t) for t in args.target]
    n = constructions.witness_find(exp.config, target if len(target) > 1 else target[0], Fraction(args.eps), args.n_max, F)
    _emit({"found": n is not None, "n": n if n is not None else "NotFound", "target": [str(t) for t in target], "eps": args.eps}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    d = _load_json(args.plan)
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError(f"{args.plan}: not a plan (missing 'kind')")
    try:
        if d["kind"] == "nodist":
            plan = constructions.NoDistPlan.from_json(d)
            checks = constructions.verify_nodist(plan)
        else:
            plan = constructions.CounterexamplePlan.from_json(d)
            checks = constructions.verify_counterexample(plan, N=args.n)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{args.plan}: malformed plan ({exc!r})") from exc
    ok = all(c["ok"] for c in checks)
    _emit({"ok": ok, "checks": checks}, args.out)
    return EXIT_OK if ok else EXIT_VERIFY


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="equidist", description="Equidistribution of perturbed polynomial sequences.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        if config:
            sp.add_argument("config", help="experiment JSON (basis, config, run)")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--threads", type=int, default=1)
        return sp

    sp = common(sub.add_parser("classify", help="density / uniform-distribution verdict"))
    sp.set_defaults(func=cmd_classify)

    sp = common(sub.add_parser("gen", help="dump sequence points as CSV"))
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--F", type=int)
    sp.set_defaults(func=cmd_gen)

    sp = common(sub.add_parser("analyze", help="discrepancy, Weyl sums and atoms"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--F", type=int)
    sp.add_argument("--grid", type=int)
    sp.add_argument("--delta")
    sp.add_argument("--mass-min", dest="mass_min")
    sp.add_argument("--weyl", type=int, nargs="+", action="append", help="Weyl frequency vector (repeatable)")
    sp.add_argument("--covering", action="store_true")
    sp.add_argument("--drift", type=int, metavar="N1", help="Cesaro drift between N1 and n")
    sp.add_argument("--box", nargs=2, metavar=("A", "B"), help="extra drift box (a, b)")
    sp.add_argument("--emit-hist", dest="emit_hist", metavar="PATH")
    sp.set_defaults(func=cmd_analyze)

    sp = common(sub.add_parser("independence", help="rational / Q- / total Q-independence"), config=False)
    sp.add_argument("input", help="JSON with basis, mode and values/polys/tuples")
    sp.set_defaults(func=cmd_independence)

    sp = common(sub.add_parser("construct", help="build a counterexample or no-distribution plan"), config=False)
    sp.add_argument("input", help="JSON with basis and construction inputs")
    sp.add_argument("--kind", required=True, choices=["scalar", "poly", "vector", "polyvec", "nodist"])
    sp.add_argument("--emit-config", dest="emit_config", metavar="PATH")
    sp.set_defaults(func=cmd_construct)

    sp = common(sub.add_parser("witness", help="find n with the point near a target"))
    sp.add_argument("--target", nargs="+", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--n-max", dest="n_max", type=int, default=10 ** 6)
    sp.add_argument("--F", type=int)
    sp.set_defaults(func=cmd_witness)

    sp = common(sub.add_parser("verify", help="re-run a plan's predicted checks"), config=False)
    sp.add_argument("plan")
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrecisionUnavailable as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (SchemaError, UsageError, InverseNotRepresentable, ProductNotRepresentable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (constructions.NoRelation, constructions.NoViolation, constructions.ScanExhausted) as exc:
        print(f"construction not applicable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (independence.SubsetBlowup, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
