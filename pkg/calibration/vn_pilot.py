"""Pilot calibration for the waiting-time running-max thresholds.

Generates the committed oracle file ``vn_pilot.json``: 100 independent
replicas run to 1e7 steps, V(n) sampled on a 160-point geometric grid in
[1e3, 1e7].  The recorded quantiles justify the acceptance band
[0.30, 0.65] for the running max of ln V(n)/ln n and the 10% floor for
the fraction of sampled n with V(n) = 1.

Rerun with ``python calibration/vn_pilot.py`` (about two minutes); the
output is deterministic for a fixed master seed.
"""

import json
import pathlib
import time

import numpy as np

from walkcover.experiments import vn_replica, vn_sample_grid
from walkcover.rng import replica_seed

MASTER_SEED = 990001
REPLICAS = 100
N_MAX = 10**7
GRID_MIN, GRID_POINTS = 1000, 160
BAND = (0.30, 0.65)
V1_FLOOR = 0.10


def main() -> None:
    t0 = time.time()
    samples = vn_sample_grid(GRID_MIN, N_MAX, GRID_POINTS)
    maxes, v1 = [], []
    for i in range(REPLICAS):
        rows = vn_replica(replica_seed(MASTER_SEED, i), N_MAX, samples)
        stats = {r.statistic: r.value for r in rows}
        maxes.append(stats["max_log_vn_ratio"])
        v1.append(stats["v1_fraction"])
    maxes = np.array(maxes)
    v1 = np.array(v1)
    in_band = (maxes >= BAND[0]) & (maxes <= BAND[1])

    result = {
        "master_seed": MASTER_SEED,
        "replicas": REPLICAS,
        "n_max": N_MAX,
        "sample_grid": {"min": GRID_MIN, "max": N_MAX, "points": GRID_POINTS,
                        "realized_points": int(len(samples))},
        "band": list(BAND),
        "v1_floor": V1_FLOOR,
        "running_max": {
            "min": float(maxes.min()),
            "q10": float(np.quantile(maxes, 0.10)),
            "median": float(np.median(maxes)),
            "q90": float(np.quantile(maxes, 0.90)),
            "max": float(maxes.max()),
            "in_band_fraction": float(in_band.mean()),
        },
        "v1_fraction": {
            "min": float(v1.min()),
            "median": float(np.median(v1)),
            "at_least_floor_fraction": float((v1 >= V1_FLOOR).mean()),
        },
        "per_replica_running_max": [round(float(m), 6) for m in maxes],
        "elapsed_seconds": round(time.time() - t0, 1),
    }
    out = pathlib.Path(__file__).with_name("vn_pilot.json")
    out.write_text(json.dumps(result, indent=2) + "\n")
    print(f"wrote {out} ({result['elapsed_seconds']}s)")
    print(f"in-band fraction: {result['running_max']['in_band_fraction']:.2%}"
          f"  (band {BAND[0]}..{BAND[1]})")
    print(f"v1 >= {V1_FLOOR}: {result['v1_fraction']['at_least_floor_fraction']:.2%}")


if __name__ == "__main__":
    main()
