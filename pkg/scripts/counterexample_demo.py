"""Build a scalar counterexample, check it, and compare with the unperturbed sequence.

The plan perturbs {n sqrt2} by a function of period sqrt2/2; the resulting
sequence piles mass onto a few rationals while {n sqrt2} stays uniform.

Usage: python3 scripts/counterexample_demo.py [--n 100000]
"""
import argparse

from equidist import Basis, IrrationalGenerator, ScalarConfig, PolynomialSR, classify, generate
from equidist.constructions import build_counterexample_scalar, verify_counterexample
from equidist.diagnostics import atom_scan, star_discrepancy_1d, weyl_sum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100000)
    ap.add_argument("--eps", default="1/10")
    args = ap.parse_args()

    basis = Basis([IrrationalGenerator("s2", "sqrt", radicand=2)])
    s2 = basis.gen("s2")
    plan = build_counterexample_scalar(s2, [s2 / 2], eps=args.eps)
    print("relation:", plan.relation)
    print("predicted atoms:", [str(t) for t in plan.predicted_atoms], "mass floor:", plan.mass_floor)

    for label, cfg in (("unperturbed", ScalarConfig(basis, PolynomialSR.linear(s2))), ("perturbed", plan.config)):
        v = classify(cfg)
        pts = generate(cfg, 1, args.n)
        D = star_discrepancy_1d(pts)
        S = weyl_sum(pts, 1)
        atoms = atom_scan(pts, "1/1000", "1/100")
        where = ", ".join(f"{c.label if c.label is not None else float(c.location)}:{c.mass:.3f}" for c in atoms.clusters) or "none"
        print(f"{label:12s} uniform={v.uniform:14s} D*={float(D.star_discrepancy):.3e} |S_N(1)|={S.magnitude:.3e} atoms={where}")

    print("verification:")
    for c in verify_counterexample(plan, args.n):
        print(f"  [{'ok' if c['ok'] else 'FAIL'}] {c['name']}: {c['value']} (bound {c['bound']})")


if __name__ == "__main__":
    main()
