"""Count annulus excursions and check the geometric-tail sandwich.

Two views of the same machinery.  First, one long walk is scanned
against a nested (k!)^3 radius ladder around a off-origin centre: the
per-level excursion counts come from the streaming state machine and
are re-derived by a plain rescan to show they agree.  Second, an
ensemble of walks counts (rho -> R) excursions around a centre until
leaving a big stop disc; the tail ratios P(N > j+1)/P(N > j) are
bracketed by exact return probabilities computed from the harmonic
oracle on the outer ring -- the sandwich that makes excursion counts
behave like a geometric variable.

Usage:
    python3 demos/excursion_ladder.py --walks 20000
"""

import argparse

import numpy as np

from walkcover.excursions import annulus_levels, count_excursions, factorial_radii
from walkcover.experiments import excursion_tail_replicas
from walkcover.geometry import closed_radius_threshold, disc_boundary
from walkcover.potential import hit_before_exit_prob
from walkcover.reference import rescan_excursion_counts
from walkcover.walk import walk_positions


def ladder_view(seed: int) -> None:
    m, beta = 4, 0.8
    sched = factorial_radii(m)
    levels, ks = annulus_levels(m, beta)
    center = (0, 0)
    # Stop at a nearer boundary than the ladder top (13824) so a
    # desk-scale path can actually leave the stop disc.
    stop = 2 * levels[-1][1]
    steps = 6_000_000
    xs, ys = walk_positions(seed, steps)
    trace = count_excursions(xs, ys, center, levels, stop_radius=stop)
    ref = rescan_excursion_counts(xs, ys, center, levels, stop)
    print(f"radius ladder (m={m}): radii {sched.radii}, stop at {stop}")
    for k, (inner, outer), fast, slow in zip(ks, levels, trace.counts, ref):
        print(f"  level {k}: annulus ({inner}, {outer})  "
              f"counts {fast} (state machine) == {slow} (rescan)")
    verdict = "exited the stop disc" if trace.stopped else "path ended inside"
    print(f"  {verdict} after {len(xs) - 1} steps\n")


def sandwich_view(master_seed: int, walks: int) -> None:
    center, rho, big_r, stop = (16, 0), 4, 8, 64
    q_in = closed_radius_threshold(rho)
    absorb = [(center[0] + dx, center[1] + dy)
              for dx in range(-rho, rho + 1)
              for dy in range(-rho, rho + 1)
              if dx * dx + dy * dy <= q_in]
    probs = hit_before_exit_prob(stop, absorb)
    ring_vals = [probs[s] for s in disc_boundary(center, big_r)]
    lo, hi = min(ring_vals), max(ring_vals)
    print(f"return probabilities on the outer ring: [{lo:.4f}, {hi:.4f}]")

    counts = excursion_tail_replicas(master_seed, center, rho, big_r, stop,
                                     replicas=walks)
    print(f"{walks} walks, excursion counts: mean {counts.mean():.2f}, "
          f"max {counts.max()}")
    print(f"{'j':>3} {'P(N>j)':>9} {'ratio':>7}   inside sandwich?")
    for j in range(6):
        c_j = int(np.sum(counts > j))
        c_next = int(np.sum(counts > j + 1))
        ratio = c_next / c_j
        tag = "yes" if lo - 0.02 <= ratio <= hi + 0.02 else "NO"
        print(f"{j:>3} {c_j / counts.size:>9.4f} {ratio:>7.4f}   {tag}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--walks", type=int, default=20_000)
    args = ap.parse_args()
    ladder_view(args.seed)
    sandwich_view(args.seed + 1, args.walks)


if __name__ == "__main__":
    main()
