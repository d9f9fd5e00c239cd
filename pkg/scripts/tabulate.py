"""Build the Wiener reference table on the 100x100 midpoint grid and print critical values.

    python3 scripts/tabulate.py --paths 10000 --seed 20240601 --out data/reference_100x100.json
"""
import argparse
import time

from copula_gof.transform import GridSpec
from copula_gof.wiener import build_reference

TARGET_CV = {"kappa": (2.100, 2.362, 2.865), "omega2": (0.526, 0.708, 1.186)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", default="100x100")
    ap.add_argument("--paths", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="data/reference_100x100.json")
    args = ap.parse_args()

    t0 = time.time()
    table = build_reference(GridSpec.parse(args.grid), args.paths, args.seed, threads=args.threads)
    table.save(args.out)
    print(f"{args.paths} paths in {time.time() - t0:.1f}s -> {args.out}")
    for stat, ref in TARGET_CV.items():
        cv = table.critical_values(stat)
        row = "  ".join(f"{a:.0%}: {cv[a]:.4f} (ref {r:.3f})" for a, r in zip(sorted(cv, reverse=True), ref))
        print(f"{stat:7s} {row}")


if __name__ == "__main__":
    main()
