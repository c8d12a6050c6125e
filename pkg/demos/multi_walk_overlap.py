"""Joint coverage by several independent walks.

A disc is jointly covered when every one of ell independent walks has
visited each of its sites.  Each extra walk slows the covered-disc
growth: the joint exponent drops from 1/4 toward 1/(2 + 2 sqrt(ell)).
This script runs a small ensemble for ell = 1, 2, 3 and prints the
median covered radii side by side, plus the crude per-checkpoint
exponent ln R~ / ln n so the ordering is visible without a fit.

Usage:
    python3 demos/multi_walk_overlap.py --replicas 20 --n-max 1000000
"""

import argparse
import math

import numpy as np

from walkcover.harness import RunConfig, collect_values, run_ensemble


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=97)
    ap.add_argument("--replicas", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=1_000_000)
    args = ap.parse_args()

    checkpoints = []
    n = 10_000
    while n <= args.n_max:
        checkpoints.append(n)
        n *= 10
    checkpoints = tuple(checkpoints)

    medians: dict[int, list[float]] = {}
    for ell in (1, 2, 3):
        cfg = RunConfig(experiment="cover_multi", master_seed=args.seed + ell,
                        replicas=args.replicas, walkers=ell,
                        checkpoints=checkpoints)
        records = run_ensemble(cfg)
        medians[ell] = [
            float(np.median(collect_values(records, "r_tilde_multi_sq", n=n)))
            for n in checkpoints
        ]

    print(f"median jointly covered radius^2, {args.replicas} replicas per ell")
    header = f"{'n':>10} " + " ".join(f"{'ell=%d' % ell:>10}" for ell in (1, 2, 3))
    print(header)
    print("-" * len(header))
    for i, n in enumerate(checkpoints):
        print(f"{n:>10d} " + " ".join(f"{medians[ell][i]:>10.1f}" for ell in (1, 2, 3)))

    print("\nper-checkpoint exponent ln R~ / ln n:")
    for i, n in enumerate(checkpoints):
        row = []
        for ell in (1, 2, 3):
            rsq = max(medians[ell][i], 1.0)
            row.append(0.5 * math.log(rsq) / math.log(n))
        pred = ", ".join(f"{1 / (2 + 2 * math.sqrt(e)):.3f}" for e in (1, 2, 3))
        print(f"{n:>10d} " + " ".join(f"{v:>10.3f}" for v in row))
    print(f"{'limits':>10} " + " ".join(
        f"{1 / (2 + 2 * math.sqrt(e)):>10.3f}" for e in (1, 2, 3)
    ))


if __name__ == "__main__":
    main()
