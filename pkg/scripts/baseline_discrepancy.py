"""Classify each shipped configuration and track its discrepancy as N grows.

Usage: python3 scripts/baseline_discrepancy.py [--max-exp 5]
"""
import argparse
from pathlib import Path

from equidist.classifier import classify
from equidist.configio import load_experiment_file
from equidist.diagnostics import box_discrepancy, star_discrepancy_1d, weyl_sum
from equidist.generator import generate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
NAMES = ["sqrt2", "cos_perturbed", "constant_half", "quintic", "yuditskii", "resonant", "rational_rotation", "vector_linear", "torus_benign"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-exp", type=int, default=5)
    ap.add_argument("--grid", type=int, default=32, help="grid for d > 1 box discrepancy")
    args = ap.parse_args()
    sizes = [10 ** k for k in range(2, args.max_exp + 1)]
    for name in NAMES:
        cfg = load_experiment_file(CONFIGS / f"{name}.json").config
        v = classify(cfg)
        print(f"{name:18s} density={v.density:10s} uniform={v.uniform:14s} rules={','.join(v.rule_ids)}")
        pts = generate(cfg, 1, sizes[-1])
        for N in sizes:
            head = pts[:N]
            rep = star_discrepancy_1d(head) if cfg.dim == 1 else box_discrepancy(head, args.grid)
            S = weyl_sum(head, [1] * cfg.dim)
            print(f"    N={N:>8d}  D*={float(rep.star_discrepancy):.3e}  N*D*={N * float(rep.star_discrepancy):9.2f}  |S_N(1)|={S.magnitude:.3e}")


if __name__ == "__main__":
    main()
