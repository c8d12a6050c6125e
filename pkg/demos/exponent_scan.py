"""Fit the covered-disc and exit-time scaling exponents from ensembles.

Runs two small reproducible ensembles through the harness: covered-disc
radii at geometric checkpoints (slope of median ln R~ against ln n) and
first-exit times from nested discs (slope of ln mean tau(r) against
ln r, which should sit hard on 2).  Every number here is a pure
function of the master seed.

Usage:
    python3 demos/exponent_scan.py --replicas 40 --n-max 1000000
"""

import argparse

import numpy as np

from walkcover.experiments import exit_times_multi
from walkcover.harness import RunConfig, estimate_exponent, run_ensemble
from walkcover.rng import replica_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=20260814)
    ap.add_argument("--replicas", type=int, default=40)
    ap.add_argument("--n-max", type=int, default=1_000_000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    checkpoints = []
    n = 10_000
    while n <= args.n_max:
        checkpoints.append(n)
        n *= 10
    cfg = RunConfig(experiment="cover", master_seed=args.seed,
                    replicas=args.replicas, threads=args.threads,
                    checkpoints=tuple(checkpoints))
    print(f"covered-disc ensemble: {args.replicas} replicas, "
          f"checkpoints {checkpoints}")
    records = run_ensemble(cfg)
    est = estimate_exponent(records, "r_tilde_sq", sqrt_values=True)
    print(f"  ln R~(n) vs ln n      slope {est.slope:+.4f} +- {est.half_width:.4f}")
    est_rn = estimate_exponent(records, "origin_radius_sq", sqrt_values=True)
    print(f"  ln R_n  vs ln n       slope {est_rn.slope:+.4f} +- {est_rn.half_width:.4f}")

    radii = [8.0, 16.0, 32.0, 64.0]
    walks = 2000
    seeds = np.array([replica_seed(args.seed + 1, i) for i in range(walks)],
                     dtype=np.uint64)
    times = exit_times_multi(seeds, radii)
    means = times.mean(axis=0)
    slope = float(np.polyfit(np.log(radii), np.log(means), 1)[0])
    print(f"exit times, {walks} walks per radius:")
    for r, m in zip(radii, means):
        print(f"  r = {r:>5.0f}   mean tau = {m:>10.1f}   tau/r^2 = {m / r**2:.3f}")
    print(f"  ln mean tau vs ln r   slope {slope:+.4f} (diffusive value is 2)")


if __name__ == "__main__":
    main()
