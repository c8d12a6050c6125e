"""Slow reference implementations used to validate the fast paths.

Everything here favours directness over speed: the distance transform
scans every (cell, source) pair, the excursion rescanner is a plain
Python loop re-deriving its thresholds from first principles, and the
covered-disc search tries every candidate centre.  The test suite pins
the production code against these.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numba import njit


@njit(cache=True)
def _brute_edt_kernel(sxs, sys, h, w, out):
    for y in range(h):
        for x in range(w):
            best = np.int64(1) << 62
            for i in range(sxs.size):
                dx = x - sxs[i]
                dy = y - sys[i]
                d = dx * dx + dy * dy
                if d < best:
                    best = d
            out[y, x] = best


def brute_squared_distance_transform(sources: np.ndarray) -> np.ndarray:
    """Exact squared distances by scanning every source for every cell."""
    src = np.asarray(sources, dtype=np.bool_)
    if src.ndim != 2 or src.size == 0:
        raise ValueError("sources must be a nonempty 2D mask")
    ys, xs = np.nonzero(src)
    if xs.size == 0:
        raise ValueError("sources mask has no True cell")
    out = np.empty(src.shape, dtype=np.int64)
    _brute_edt_kernel(xs.astype(np.int64), ys.astype(np.int64),
                      src.shape[0], src.shape[1], out)
    return out


def rescan_excursion_counts(xs, ys, center, levels, stop_radius, stop_center=None):
    """Re-derive per-level excursion counts with a plain Python scan.

    Same definitions as `excursions.count_excursions`, independently
    coded: entry on reaching the closed inner disc, completion on
    reaching the outer radius, gated by the stop clock (armed on first
    entry to the open stop disc, halted at the first exit after that,
    with completions at the halt step still counted).
    """
    if stop_center is None:
        stop_center = center
    cx, cy = center
    sx, sy = stop_center
    q_in = [math.floor(Fraction(inner) ** 2) for inner, _ in levels]
    t_out = [math.ceil(Fraction(outer) ** 2) for _, outer in levels]
    t_stop = math.ceil(Fraction(stop_radius) ** 2)
    counts = [0] * len(levels)
    flying = [False] * len(levels)
    armed = False
    for x, y in zip(xs, ys):
        ds = (x - sx) ** 2 + (y - sy) ** 2
        if not armed:
            if ds < t_stop:
                armed = True
            else:
                continue
        d2 = (x - cx) ** 2 + (y - cy) ** 2
        for i in range(len(levels)):
            if flying[i] and d2 >= t_out[i]:
                counts[i] += 1
                flying[i] = False
            if not flying[i] and d2 <= q_in[i]:
                flying[i] = True
        if ds >= t_stop:
            break
    return counts


def rescan_visits_during_excursions(xs, ys, z, rho, big_r, n_exc):
    """Visits to z during its first n_exc completed excursions, rescanned.

    Returns (visits, completed); completed may fall short of n_exc.
    """
    zx, zy = z
    q_in = math.floor(Fraction(rho) ** 2)
    t_out = math.ceil(Fraction(big_r) ** 2)
    visits = 0
    completed = 0
    flying = False
    for x, y in zip(xs, ys):
        d2 = (x - zx) ** 2 + (y - zy) ** 2
        if flying and d2 >= t_out:
            completed += 1
            flying = False
            if completed >= n_exc:
                break
        if not flying and d2 <= q_in:
            flying = True
        if flying and d2 == 0:
            visits += 1
    return visits, completed


def brute_largest_covered_disc(sites_with_counts, k=1):
    """Largest k-covered disc by trying every candidate centre.

    `sites_with_counts` maps (x, y) -> visit count.  Returns
    (center, radius_sq) with the lexicographically smallest centre, or
    (None, 0) when no site reaches multiplicity k.
    """
    hit = sorted(s for s, c in sites_with_counts.items() if c >= k)
    if not hit:
        return None, 0
    minx = min(x for x, _ in hit) - 1
    maxx = max(x for x, _ in hit) + 1
    miny = min(y for _, y in hit) - 1
    maxy = max(y for _, y in hit) + 1
    best_center, best_d = None, 0
    for cx, cy in hit:
        d = None
        for x in range(minx, maxx + 1):
            for y in range(miny, maxy + 1):
                if sites_with_counts.get((x, y), 0) < k:
                    dd = (x - cx) ** 2 + (y - cy) ** 2
                    if d is None or dd < d:
                        d = dd
        # the ring one beyond the bbox is deficient too
        edge = min(cx - minx, maxx - cx, cy - miny, maxy - cy)
        d = min(d, edge * edge) if d is not None else edge * edge
        if d > best_d:
            best_center, best_d = (cx, cy), d
    return best_center, best_d


def brute_cover_time(xs, ys, center, r, k=1):
    """First step covering D(center, r) k-fold, by direct simulation of counts."""
    t_open = math.ceil(Fraction(r) ** 2)
    cx, cy = center
    lim = math.isqrt(max(t_open - 1, 0))
    todo = {}
    for dx in range(-lim, lim + 1):
        for dy in range(-lim, lim + 1):
            if dx * dx + dy * dy < t_open:
                todo[(cx + dx, cy + dy)] = k
    if not todo:
        return 0 if k == 0 else None
    for t, (x, y) in enumerate(zip(xs, ys)):
        need = todo.get((x, y))
        if need is not None:
            if need == 1:
                del todo[(x, y)]
                if not todo:
                    return t
            else:
                todo[(x, y)] = need - 1
    return None


def brute_first_fresh_after(xs, ys, n):
    """Waiting time after step n for a never-before-visited site (or None)."""
    seen = set(zip(xs[: n + 1], ys[: n + 1]))
    for t in range(n + 1, len(xs)):
        if (xs[t], ys[t]) not in seen:
            return t - n
        seen.add((xs[t], ys[t]))
    return None
