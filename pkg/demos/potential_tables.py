"""Exact potential-theory oracles next to their Monte Carlo shadows.

The Green function of the walk killed on leaving D(0, R) is computed by
a direct sparse linear solve -- no simulation, no error bars.  This
script prints the classic anchors (G_2(0,0) = 3/2, the 1/3 hitting
probability, E[tau(2)] = 9/2), shows G_R(0,0) climbing like
(2/pi) ln R, and then checks the visit-count law of a killed walk
against simulation: the number of origin visits is geometric with
parameters read off two Green values, and its Laplace transform matches
the closed form to Monte Carlo accuracy.

Usage:
    python3 demos/potential_tables.py --radius 16 --walks 50000
"""

import argparse
import math

import numpy as np

from walkcover.experiments import origin_visits_before_exit
from walkcover.potential import (
    exact_expected_exit_time,
    exact_green,
    exact_hit_prob,
    geometric_visit_law,
    green_origin_values,
    laplace_visits,
)
from walkcover.rng import replica_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--radius", type=float, default=16.0)
    ap.add_argument("--walks", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    print("anchors from the linear solver:")
    print(f"  G_2(0,0)              = {exact_green((0, 0), 2):.12f}  (3/2)")
    print(f"  P^(1,0)(T_0 < tau(2)) = {exact_hit_prob((1, 0), 2):.12f}  (1/3)")
    print(f"  E[tau(2)]             = {exact_expected_exit_time(2):.12f}  (9/2)")

    radii = [4.0, 8.0, 16.0, 32.0, 64.0]
    vals = green_origin_values(radii)
    print("\nG_R(0,0) against (2/pi) ln R:")
    for r, g in zip(radii, vals):
        print(f"  R = {r:>4.0f}   G = {g:.6f}   (2/pi) ln R = {2 / math.pi * math.log(r):.6f}")
    slope = float(np.polyfit(np.log(radii), vals, 1)[0])
    print(f"  fitted slope {slope:.5f} vs 2/pi = {2 / math.pi:.5f}")

    r = args.radius
    y = (2, 0)
    g00 = exact_green((0, 0), r)
    gy0 = exact_green(y, r)
    p, q = geometric_visit_law(gy0, g00)
    print(f"\nvisit-count law from y={y} inside D(0,{r:.0f}): "
          f"p = {p:.4f}, q = {q:.4f}")
    seeds = np.array([replica_seed(args.seed, i) for i in range(args.walks)],
                     dtype=np.uint64)
    visits = origin_visits_before_exit(seeds, y, r)
    print(f"  MC over {args.walks} killed walks: "
          f"P(L=0) = {float(np.mean(visits == 0)):.4f} vs 1-p = {1 - p:.4f}")
    for lam in (0.1, math.log(2.0), 2.0):
        mc = float(np.exp(-lam * visits).mean())
        exact = laplace_visits(lam, gy0, g00)
        print(f"  E[e^(-{lam:.3f} L)]: MC {mc:.5f} vs exact {exact:.5f}")


if __name__ == "__main__":
    main()
