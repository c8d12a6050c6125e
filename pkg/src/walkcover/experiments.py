"""Per-replica measurement routines behind the ensemble harness.

Each routine simulates what one replica needs and returns plain
Measurement tuples (checkpoint, statistic name, value, extra params);
the harness owns seeds, threading and serialization.  The heavy loops
are numba kernels over the packed position arrays, and covered-disc
statistics reuse the exact banded transform from `cover`.

The dense tally trick: a replica allocates one uint16 count array over
the *full* path's bounding box and accumulates prefixes checkpoint by
checkpoint.  Sites outside a prefix's own bounding box simply hold
count zero, i.e. they are deficient sources, so a single fixed box plus
its exterior ring yields exact distance fields for every prefix.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from numba import njit

from . import rng
from .cover import DEFAULT_CELL_BUDGET, _check_k, _dense_builder, _lexmax_result, new_site_times, v_at_samples
from .geometry import closed_radius_threshold, open_radius_threshold
from .occupancy import CAP
from .walk import default_step_budget, walk_positions


class Measurement(NamedTuple):
    """One statistic of one replica at one checkpoint."""

    n: int
    statistic: str
    value: float
    extra: dict


# -- dense tally + covered-disc extraction --------------------------------------


@njit(cache=True, nogil=True)
def _tally_kernel(xs, ys, a, b, x0, y0, counts, cap):
    """Add path positions a..b-1 into the dense count array (saturating).
    Returns the number of saturated-increment events."""
    sat = 0
    for t in range(a, b):
        ix = np.int64(xs[t]) - x0
        iy = np.int64(ys[t]) - y0
        c = counts[iy, ix]
        if c < cap:
            counts[iy, ix] = c + 1
        else:
            sat += 1
    return sat


def _origin_radius_sq(counts: np.ndarray, x0: int, y0: int) -> int:
    """Exact squared distance from the world origin to the nearest
    zero-count site (sites outside the array count as zero)."""
    h, w = counts.shape
    ox, oy = -x0, -y0
    # nearest site outside the box is axis-aligned one past the closest edge
    edge = min(ox + 1, w - ox, oy + 1, h - oy)
    best = edge * edge
    half = 8
    while True:
        ax0, ax1 = max(0, ox - half), min(w - 1, ox + half)
        ay0, ay1 = max(0, oy - half), min(h - 1, oy + half)
        win = counts[ay0 : ay1 + 1, ax0 : ax1 + 1]
        yy, xx = np.nonzero(win == 0)
        if yy.size:
            d2 = (xx + ax0 - ox) ** 2 + (yy + ay0 - oy) ** 2
            best = min(best, int(d2.min()))
        whole = ax0 == 0 and ay0 == 0 and ax1 == w - 1 and ay1 == h - 1
        if best <= half * half or whole:
            return best
        half *= 2


class _TallyState:
    """One walk's full path, dense count array and tally cursor."""

    def __init__(self, seed: int, n_max: int):
        self.seed = seed
        self.xs, self.ys = walk_positions(seed, n_max)
        self.x0 = int(self.xs.min())
        self.x1 = int(self.xs.max())
        self.y0 = int(self.ys.min())
        self.y1 = int(self.ys.max())
        h = self.y1 - self.y0 + 1
        w = self.x1 - self.x0 + 1
        self.counts = np.zeros((h, w), dtype=np.uint16)
        self.cursor = 0
        self.saturated = False

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x0, self.x1, self.y0, self.y1)

    def advance(self, n: int) -> None:
        """Tally positions up to and including step n."""
        sat = _tally_kernel(
            self.xs, self.ys, self.cursor, n + 1,
            np.int64(self.x0), np.int64(self.y0), self.counts, np.int64(CAP),
        )
        if sat:
            self.saturated = True
        self.cursor = n + 1


def _covered_extra(k: int, saturated: bool) -> dict:
    extra: dict = {"k": int(k)}
    if saturated:
        extra["saturated"] = 1
    return extra


def cover_replica(seed: int, checkpoints, ks_by_n=None,
                  origin_stat: bool = True, cell_budget: int | None = None):
    """Covered-disc statistics of one walk at several checkpoints.

    Emits r_tilde_sq (largest fully covered disc, squared radius) for
    every requested multiplicity k at each checkpoint, and the squared
    origin clearance origin_radius_sq.
    """
    checkpoints = sorted(int(n) for n in checkpoints)
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    state = _TallyState(seed, checkpoints[-1])
    out: list[Measurement] = []
    for n in checkpoints:
        state.advance(n)
        ks = (ks_by_n or {}).get(n, (1,))
        for k in sorted(int(k) for k in ks):
            _check_k(k)
            res = _lexmax_result(_dense_builder(state.counts, k), state.box, k, budget)
            out.append(Measurement(n, "r_tilde_sq", float(res.radius_sq),
                                   _covered_extra(k, state.saturated)))
        if origin_stat:
            r2 = _origin_radius_sq(state.counts, state.x0, state.y0)
            out.append(Measurement(n, "origin_radius_sq", float(r2), {}))
    return out


def _multi_dense_builder(states, ibox, k: int = 1):
    """Padded-source builder over the walks' intersection box: a site is
    deficient unless every walk has count >= k there."""
    minx, maxx, miny, maxy = ibox
    hp = (maxy - miny + 1) + 2
    w = maxx - minx + 1

    def build(a: int, b: int) -> np.ndarray:
        block = np.ones((b - a, w + 2), dtype=np.bool_)
        lo = max(a, 1)
        hi = min(b, hp - 1)
        if lo < hi:
            ya = miny + lo - 1
            yb = miny + hi - 1  # exclusive
            lacking = np.zeros((hi - lo, w), dtype=np.bool_)
            for st in states:
                sub = st.counts[ya - st.y0 : yb - st.y0, minx - st.x0 : maxx + 1 - st.x0]
                lacking |= sub < k
            block[lo - a : hi - a, 1:-1] = lacking
        return block

    return build


def cover_multi_replica(seeds, checkpoints, ks_by_n=None,
                        cell_budget: int | None = None):
    """Joint covered-disc statistics of several independent walks.

    Per checkpoint: each walk's own r_tilde_sq (tagged with its walk
    index) plus r_tilde_multi_sq, the largest disc fully covered by
    every walk at once.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one walk seed")
    checkpoints = sorted(int(n) for n in checkpoints)
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    states = [_TallyState(s, checkpoints[-1]) for s in seeds]
    minx = max(st.x0 for st in states)
    maxx = min(st.x1 for st in states)
    miny = max(st.y0 for st in states)
    maxy = min(st.y1 for st in states)
    overlap = minx <= maxx and miny <= maxy
    out: list[Measurement] = []
    for n in checkpoints:
        for st in states:
            st.advance(n)
        ks = (ks_by_n or {}).get(n, (1,))
        for j, st in enumerate(states):
            for k in sorted(int(k) for k in ks):
                _check_k(k)
                res = _lexmax_result(_dense_builder(st.counts, k), st.box, k, budget)
                extra = _covered_extra(k, st.saturated)
                extra["walk"] = j
                out.append(Measurement(n, "r_tilde_sq", float(res.radius_sq), extra))
        if overlap:
            ibox = (minx, maxx, miny, maxy)
            res = _lexmax_result(_multi_dense_builder(states, ibox), ibox, 1, budget)
            multi_sq = float(res.radius_sq)
        else:
            multi_sq = 0.0
        out.append(Measurement(n, "r_tilde_multi_sq", multi_sq, {"ell": len(states)}))
    return out


# -- origin clearance without a full tally ---------------------------------------


@njit(cache=True, nogil=True)
def _mark_window_kernel(xs, ys, a, b, half, visited):
    for t in range(a, b):
        x = np.int64(xs[t])
        y = np.int64(ys[t])
        if -half <= x <= half and -half <= y <= half:
            visited[y + half, x + half] = True


def origin_radius_replica(seed: int, checkpoints, half: int = 512):
    """origin_radius_sq at each checkpoint via a visited-window scan.

    Tracks first visits only inside a (2*half+1)^2 window around the
    origin; if a checkpoint's clearance cannot be certified inside the
    window, the whole replica retries with the window doubled.
    """
    checkpoints = sorted(int(n) for n in checkpoints)
    xs, ys = walk_positions(seed, checkpoints[-1])
    while True:
        visited = np.zeros((2 * half + 1, 2 * half + 1), dtype=np.bool_)
        span = np.arange(-half, half + 1, dtype=np.int64)
        d2 = span[:, None] ** 2 + span[None, :] ** 2
        vals: list[tuple[int, int]] = []
        cursor = 0
        ok = True
        for n in checkpoints:
            _mark_window_kernel(xs, ys, cursor, n + 1, np.int64(half), visited)
            cursor = n + 1
            unvisited = ~visited
            if not unvisited.any():
                ok = False
                break
            m = int(d2[unvisited].min())
            if m > half * half:  # nearest certified gap may lie outside the window
                ok = False
                break
            vals.append((n, m))
        if ok:
            return [Measurement(n, "origin_radius_sq", float(m), {}) for n, m in vals]
        half *= 2


# -- waiting time for fresh territory --------------------------------------------


def vn_sample_grid(n_min: int, n_max: int, points: int) -> np.ndarray:
    """Geometric grid of integer sample times in [n_min, n_max]."""
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    grid = np.geomspace(float(n_min), float(n_max), int(points))
    return np.unique(np.rint(grid).astype(np.int64))


def vn_replica(seed: int, n_max: int, samples) -> list[Measurement]:
    """V(n) at the sampled times, plus the replica's running summary.

    Emits one v_of_n row per sample where V(n) is defined (the path may
    end before the next discovery), then max_log_vn_ratio — the maximum
    of ln V(n)/ln n over the defined samples — and v1_fraction, the
    fraction of defined samples with V(n) = 1.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0 or samples.min() < 1 or samples.max() > n_max:
        raise ValueError("sample times must lie in [1, n_max]")
    xs, ys = walk_positions(seed, int(n_max))
    times = new_site_times(xs, ys)
    vals, defined = v_at_samples(times, samples)
    out = [
        Measurement(int(n), "v_of_n", float(v), {})
        for n, v, d in zip(samples, vals, defined)
        if d
    ]
    if defined.any():
        nn = samples[defined].astype(np.float64)
        vv = vals[defined].astype(np.float64)
        ratios = np.log(vv) / np.log(nn)
        out.append(Measurement(int(n_max), "max_log_vn_ratio", float(ratios.max()), {}))
        out.append(Measurement(int(n_max), "v1_fraction", float(np.mean(vv == 1.0)), {}))
    return out


# -- batch kernels: exit times, origin visits, annulus excursions ----------------


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _multi_exit_kernel(seeds, thresholds, budget, times):
    golden = np.uint64(0x9E3779B97F4A7C15)
    n_r = thresholds.size
    for i in range(seeds.size):
        ctr = seeds[i]
        x = np.int64(0)
        y = np.int64(0)
        level = 0
        t = np.int64(0)
        while t < budget:
            t += 1
            ctr += golden
            d = _mix64(ctr) >> np.uint64(62)
            if d == np.uint64(0):
                x += 1
            elif d == np.uint64(1):
                x -= 1
            elif d == np.uint64(2):
                y += 1
            else:
                y -= 1
            d2 = x * x + y * y
            while level < n_r and d2 >= thresholds[level]:
                times[i, level] = t
                level += 1
            if level == n_r:
                break
        while level < n_r:
            times[i, level] = -1
            level += 1


def exit_times_multi(seeds, radii, step_budget: int | None = None) -> np.ndarray:
    """First exit times of nested discs D(0, r) for each seed, one pass
    per walk.  times[i, j] = tau(radii[j]) for walk i; -1 marks a walk
    that exhausted the step budget first (radii must be increasing)."""
    radii = list(radii)
    if any(float(a) >= float(b) for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    thresholds = np.array([open_radius_threshold(r) for r in radii], dtype=np.int64)
    budget = default_step_budget(radii[-1]) if step_budget is None else int(step_budget)
    seeds = np.asarray(seeds, dtype=np.uint64)
    times = np.empty((seeds.size, thresholds.size), dtype=np.int64)
    _multi_exit_kernel(seeds, thresholds, np.int64(budget), times)
    return times


def exit_time_replica(seed: int, radii, step_budget: int | None = None) -> list[Measurement]:
    """One walk's nested exit times tau(r), one exit_time row per radius."""
    times = exit_times_multi(np.array([seed], dtype=np.uint64), radii, step_budget)[0]
    out = []
    for r, t in zip(radii, times):
        extra: dict = {"r": float(r)}
        if t < 0:
            extra["budget_exceeded"] = 1
        out.append(Measurement(0, "exit_time", float(t), extra))
    return out


@njit(cache=True, nogil=True)
def _origin_visits_kernel(seeds, sx, sy, t_stop, budget, visits):
    golden = np.uint64(0x9E3779B97F4A7C15)
    for i in range(seeds.size):
        ctr = seeds[i]
        x = sx
        y = sy
        count = np.int64(0)
        t = np.int64(0)
        while t < budget:
            if x * x + y * y >= t_stop:
                break
            if x == 0 and y == 0:
                count += 1
            t += 1
            ctr += golden
            d = _mix64(ctr) >> np.uint64(62)
            if d == np.uint64(0):
                x += 1
            elif d == np.uint64(1):
                x -= 1
            elif d == np.uint64(2):
                y += 1
            else:
                y -= 1
        visits[i] = count


def origin_visits_before_exit(seeds, start, r_stop, step_budget: int | None = None) -> np.ndarray:
    """Visits to the origin before exiting D(0, r_stop), per seed, for
    walks started at `start` (the time-0 position counts if it is 0)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    budget = default_step_budget(r_stop) if step_budget is None else int(step_budget)
    visits = np.empty(seeds.size, dtype=np.int64)
    _origin_visits_kernel(
        seeds, np.int64(start[0]), np.int64(start[1]),
        np.int64(open_radius_threshold(r_stop)), np.int64(budget), visits,
    )
    return visits


@njit(cache=True, nogil=True)
def _annulus_count_kernel(seeds, cx, cy, q_in, t_out, t_stop, budget, counts):
    """Excursion counts around (cx, cy) for walks from the origin, gated
    by the stop disc D(0, sqrt(t_stop)); mirrors the trace state machine
    (completion, then entry, then halt)."""
    golden = np.uint64(0x9E3779B97F4A7C15)
    for i in range(seeds.size):
        ctr = seeds[i]
        x = np.int64(0)
        y = np.int64(0)
        n = np.int64(0)
        in_flight = False
        started = False
        t = np.int64(0)
        while t < budget:
            ds = x * x + y * y
            if started or ds < t_stop:
                started = True
                dx = x - cx
                dy = y - cy
                d2 = dx * dx + dy * dy
                if in_flight and d2 >= t_out:
                    n += 1
                    in_flight = False
                if not in_flight and d2 <= q_in:
                    in_flight = True
                if ds >= t_stop:
                    break
            t += 1
            ctr += golden
            d = _mix64(ctr) >> np.uint64(62)
            if d == np.uint64(0):
                x += 1
            elif d == np.uint64(1):
                x -= 1
            elif d == np.uint64(2):
                y += 1
            else:
                y -= 1
        counts[i] = n
    return 0


def annulus_excursion_counts(seeds, center, rho, big_r, stop_radius,
                             step_budget: int | None = None) -> np.ndarray:
    """Completed (rho -> big_r) excursion counts around `center` for
    walks from the origin, counted until the walk exits D(0, stop_radius)."""
    if not float(rho) < float(big_r) < float(stop_radius):
        raise ValueError("need rho < big_r < stop_radius")
    seeds = np.asarray(seeds, dtype=np.uint64)
    budget = default_step_budget(stop_radius) if step_budget is None else int(step_budget)
    counts = np.empty(seeds.size, dtype=np.int64)
    _annulus_count_kernel(
        seeds, np.int64(center[0]), np.int64(center[1]),
        np.int64(closed_radius_threshold(rho)), np.int64(open_radius_threshold(big_r)),
        np.int64(open_radius_threshold(stop_radius)), np.int64(budget), counts,
    )
    return counts


def excursion_tail_replicas(master_seed: int, center, rho, big_r, stop_radius,
                            replicas: int) -> np.ndarray:
    """Excursion counts for `replicas` independent walks (seed-split from
    the master seed), ready for tail-ratio estimation."""
    seeds = np.array(
        [rng.replica_seed(master_seed, i) for i in range(replicas)], dtype=np.uint64
    )
    return annulus_excursion_counts(seeds, center, rho, big_r, stop_radius)


def multiplicity_thresholds(alphas, n: int) -> list[int]:
    """k(alpha) = max(1, ceil(alpha (ln n)^2 / pi)) for each alpha."""
    if n < 2:
        raise ValueError("n must be >= 2")
    out = []
    for a in alphas:
        if a < 0:
            raise ValueError(f"alpha must be >= 0, got {a}")
        out.append(max(1, math.ceil(a * math.log(n) ** 2 / math.pi)))
    return out
