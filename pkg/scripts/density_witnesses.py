"""First visits of several sequences to small neighbourhoods of chosen targets.

A found index is a certified visit; a miss up to n_max proves nothing.

Usage: python3 scripts/density_witnesses.py [--eps 1/100] [--n-max 100000]
"""
import argparse
from pathlib import Path

from equidist.configio import load_experiment_file
from equidist.constructions import witness_find

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
TARGETS = ["0", "1/7", "1/4", "1/3", "1/2", "2/3", "3/4", "9/10", "99/100"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", default="1/100")
    ap.add_argument("--n-max", type=int, default=100000)
    args = ap.parse_args()
    print(f"{'config':18s}" + "".join(f"{t:>8s}" for t in TARGETS))
    for name in ("sqrt2", "yuditskii", "cos_perturbed", "resonant", "quintic", "rational_rotation"):
        cfg = load_experiment_file(CONFIGS / f"{name}.json").config
        hits = [witness_find(cfg, t, args.eps, args.n_max) for t in TARGETS]
        print(f"{name:18s}" + "".join(f"{h if h is not None else '-':>8}" for h in hits))


if __name__ == "__main__":
    main()
