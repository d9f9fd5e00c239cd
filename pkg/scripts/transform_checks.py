"""Numerical diagnostics of the transform: annihilation of score signals and the isometry ||g|| = ||h||.

    python3 scripts/transform_checks.py --nodes 200 400 800
"""
import argparse
import time

import numpy as np

from copula_gof.copulas import CLAYTON
from copula_gof.margins import EXPONENTIAL
from copula_gof.power import LIBRARY_FREQS, library_direction, project_g
from copula_gof.transform import DEFAULT_DELTA, GridSpec, ScoreContext, SignalDriver, compute_Wn


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    ap.add_argument("--nodes", type=int, nargs="+", default=[200, 400, 800])
    args = ap.parse_args()
    ctx = ScoreContext(EXPONENTIAL, [[1.0], [1.0]], CLAYTON, [2.0], args.delta)
    grid = GridSpec.midpoints(100, 100)

    print("sup |W| for the score signals K_1..K_q")
    for m in args.nodes:
        t0 = time.time()
        sups = [np.abs(compute_Wn(ctx, grid=grid, nodes=m, driver=SignalDriver(i)).values).max() for i in range(ctx.q)]
        print(f"  nodes={m:5d}  " + "  ".join(f"{s:.2e}" for s in sups) + f"  ({time.time() - t0:.0f}s)")

    print("||g|| / ||h|| - 1 for the library directions")
    for name in LIBRARY_FREQS:
        h = library_direction(ctx, name)
        g = project_g(h)
        print(f"  {name}: slab {g.norm() / h.norm() - 1:+.2e}   box only {g.norm('box') / h.norm() - 1:+.2e}")


if __name__ == "__main__":
    main()
