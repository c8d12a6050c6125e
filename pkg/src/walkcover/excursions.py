"""Multiscale excursion machinery.

An excursion of level (inner, outer) around a centre starts when the
walk enters the closed disc of radius `inner` and completes when it
next reaches distance >= `outer`.  Counting runs while a stop clock is
live: the clock arms when the walk first enters the open stop disc and
halts everything at the first subsequent exit (a completion occurring
exactly at the halt step still counts).

The factorial radius ladder r_k = (k!)^3 makes consecutive annuli
(r_m/r_k, r_m/r_{k-1}) thick enough that excursion counts concentrate;
`successful` bundles the resulting verdict: every per-scale count
inside its target window, and the innermost disc fully covered by the
time the deep excursions ran out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cover import cover_time
from .errors import IncompleteTraceError, InsufficientPathError
from .geometry import Site, closed_radius_threshold, dist_sq, open_radius_threshold

# -- radius ladder -------------------------------------------------------------


@dataclass(frozen=True)
class RadiiSchedule:
    """The ladder r_k = (k!)^3 (r_0 = 1) up to index m, with exact ratios."""

    m: int
    radii: tuple[int, ...]

    def ratio(self, k: int) -> int:
        """r_m / r_k, exact (the ladder divides exactly)."""
        return self.radii[self.m] // self.radii[k]

    def annulus(self, k: int) -> tuple[int, int]:
        """(inner, outer) radii of the level-k annulus around a centre."""
        return self.ratio(k), self.ratio(k - 1)


def factorial_radii(m: int) -> RadiiSchedule:
    """Exact ladder up to index m.  Values are exact big integers for any
    m >= 1; simulation-facing helpers are only practical for m <= 12 or
    so (r_13 already exceeds 10^29 sites of radius)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    radii = tuple(math.factorial(k) ** 3 for k in range(m + 1))
    return RadiiSchedule(m=m, radii=radii)


def target_count(k: int, a: float) -> int:
    """Typical number of level-k excursions: floor(3 a k^2 ln k)."""
    if k < 2:
        raise ValueError("scale index k must be >= 2")
    if a <= 0:
        raise ValueError("a must be positive")
    return math.floor(3.0 * a * k * k * math.log(k))


def sluggish_target_count(k: int, h: float, a_margin: float, m: int) -> int:
    """Target count for the slow-growth schedule: floor(3 h (k + a_margin*m)^2 ln m)."""
    if m < 2:
        raise ValueError("m must be >= 2 for the slow-growth schedule")
    if h <= 0 or a_margin < 0:
        raise ValueError("need h > 0 and a_margin >= 0")
    return math.floor(3.0 * h * (k + a_margin * m) ** 2 * math.log(m))


@dataclass(frozen=True)
class CountWindowSchedule:
    """Per-scale excursion-count targets with tolerance +-k at scale k.

    kind is "successful" (targets 3 a k^2 ln k) or "sluggish" (targets
    3 h (k + a_margin m)^2 ln m); params records the numbers the targets
    were built from.
    """

    kind: str
    ks: tuple[int, ...]
    targets: tuple[int, ...]
    params: tuple[tuple[str, float], ...]

    def target(self, k: int) -> int:
        return self.targets[self.ks.index(k)]

    def window(self, k: int) -> tuple[int, int]:
        """Inclusive (low, high) count window at scale k."""
        t = self.target(k)
        return t - k, t + k

    def contains(self, k: int, count: int) -> bool:
        return abs(count - self.target(k)) <= k


def window_schedule(kind: str, *, m: int, beta: float | None = None,
                    ks=None, a: float | None = None, h: float | None = None,
                    a_margin: float = 0.0) -> CountWindowSchedule:
    """Build the per-scale count windows for one success predicate.

    kind "successful" needs the growth factor `a`; kind "sluggish" needs
    `h` (and optionally `a_margin`).  The scale range is given either as
    an explicit iterable `ks` or as (m, beta), meaning 3..floor(beta*m).
    """
    if ks is None:
        if beta is None:
            raise ValueError("give either an explicit scale range ks or beta")
        ks = range(3, _deep_scale(m, beta) + 1)
    ks = tuple(int(k) for k in ks)
    if not ks:
        raise ValueError("empty scale range")
    if kind == "successful":
        if a is None:
            raise ValueError("kind 'successful' needs the growth factor a")
        if min(ks) < 3 or max(ks) > m:
            raise ValueError(f"scale range {ks} must lie within [3, m={m}]")
        targets = tuple(target_count(k, a) for k in ks)
        params: tuple[tuple[str, float], ...] = (("a", float(a)),)
    elif kind == "sluggish":
        if h is None:
            raise ValueError("kind 'sluggish' needs the rate h")
        if min(ks) < 1 or max(ks) > m:
            raise ValueError(f"scale range {ks} must lie within [1, m={m}]")
        targets = tuple(sluggish_target_count(k, h, a_margin, m) for k in ks)
        params = (("h", float(h)), ("a_margin", float(a_margin)), ("m", float(m)))
    else:
        raise ValueError(f"unknown window kind {kind!r} (use 'successful' or 'sluggish')")
    return CountWindowSchedule(kind=kind, ks=ks, targets=targets, params=params)


def _deep_scale(m: int, beta: float) -> int:
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    bm = math.floor(beta * m)
    if bm < 3:
        raise ValueError(f"floor(beta*m) = {bm} < 3: no scales to window (m={m}, beta={beta})")
    return bm


# -- excursion counting --------------------------------------------------------


@dataclass(frozen=True)
class ExcursionTrace:
    """Counts per level for one path and one centre.

    stopped is False when the path ran out before exiting the stop disc
    (counts are then a lower bound and the success predicates refuse to
    judge).  last_completion[i] is the absolute step of level i's latest
    completed excursion, -1 if none.  ks labels each level with its
    ladder scale when the levels came from a factorial schedule.
    """

    center: Site
    levels: tuple[tuple[float, float], ...]
    counts: np.ndarray
    last_completion: np.ndarray
    in_flight: np.ndarray
    stop_center: Site
    stop_radius: float
    stop_time: int
    stopped: bool
    ks: tuple[int, ...] | None = None

    @property
    def stop_reason(self) -> str:
        return "hit-stop-boundary" if self.stopped else "path-exhausted"

    def to_csv(self, path) -> None:
        """Write one row per level: level, inner_r, outer_r, count.

        The level column is the ladder scale when known, else the
        1-based position in the levels list.
        """
        labels = self.ks if self.ks is not None else range(1, len(self.levels) + 1)
        with open(path, "w", newline="") as fh:
            fh.write("level,inner_r,outer_r,count\n")
            for label, (inner, outer), c in zip(labels, self.levels, self.counts):
                fh.write(f"{label},{inner},{outer},{int(c)}\n")


@njit(cache=True)
def _count_kernel(xs, ys, cx, cy, q_in, t_out, sx, sy, t_stop,
                  counts, last_t, state):
    started = False
    n_levels = q_in.size
    for t in range(xs.size):
        dxs = np.int64(xs[t]) - sx
        dys = np.int64(ys[t]) - sy
        ds = dxs * dxs + dys * dys
        if not started:
            if ds < t_stop:
                started = True
            else:
                continue
        dx = np.int64(xs[t]) - cx
        dy = np.int64(ys[t]) - cy
        d2 = dx * dx + dy * dy
        for i in range(n_levels):
            if state[i] == 1 and d2 >= t_out[i]:
                counts[i] += 1
                last_t[i] = t
                state[i] = 0
            if state[i] == 0 and d2 <= q_in[i]:
                state[i] = 1
        if ds >= t_stop:
            return t, True
    return xs.size - 1, False


def count_excursions(xs, ys, center: Site, levels, stop_radius,
                     stop_center: Site | None = None, ks=None) -> ExcursionTrace:
    """Count completed excursions per level along a stored path.

    levels is a sequence of (inner, outer) radius pairs around `center`;
    the stop radius must exceed every outer radius.  Counting is gated
    by the stop clock around `stop_center` (default: the excursion
    centre) with radius `stop_radius`.  ks optionally labels the levels
    with their ladder scales for reporting.
    """
    if stop_center is None:
        stop_center = center
    levels = [(inner, outer) for inner, outer in levels]
    if not levels:
        raise ValueError("need at least one (inner, outer) level")
    q_in = np.empty(len(levels), dtype=np.int64)
    t_out = np.empty(len(levels), dtype=np.int64)
    for i, (inner, outer) in enumerate(levels):
        if not float(inner) < float(outer):
            raise ValueError(f"level {i}: inner radius {inner} must be < outer {outer}")
        if not float(outer) < float(stop_radius):
            raise ValueError(
                f"level {i}: outer radius {outer} must stay below the stop radius {stop_radius}"
            )
        q_in[i] = closed_radius_threshold(inner)
        t_out[i] = open_radius_threshold(outer)
        if q_in[i] >= t_out[i]:
            raise ValueError(f"level {i}: radii {inner}, {outer} are indistinguishable on the lattice")
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    counts = np.zeros(len(levels), dtype=np.int64)
    last_t = np.full(len(levels), -1, dtype=np.int64)
    state = np.zeros(len(levels), dtype=np.uint8)
    stop_time, stopped = _count_kernel(
        xs, ys, np.int64(center[0]), np.int64(center[1]), q_in, t_out,
        np.int64(stop_center[0]), np.int64(stop_center[1]),
        np.int64(open_radius_threshold(stop_radius)), counts, last_t, state,
    )
    return ExcursionTrace(
        center=(int(center[0]), int(center[1])),
        levels=tuple((inner, outer) for inner, outer in levels),
        counts=counts,
        last_completion=last_t,
        in_flight=state.astype(np.bool_),
        stop_center=(int(stop_center[0]), int(stop_center[1])),
        stop_radius=stop_radius,
        stop_time=int(stop_time),
        stopped=bool(stopped),
        ks=tuple(int(k) for k in ks) if ks is not None else None,
    )


# -- success predicates --------------------------------------------------------


def annulus_levels(m: int, beta: float) -> tuple[list[tuple[int, int]], list[int]]:
    """The (inner, outer) ladder annuli and their scale indices 3..floor(beta*m)."""
    bm = _deep_scale(m, beta)
    if bm + 1 > m:
        raise ValueError(f"beta={beta} leaves no room below scale m={m}")
    sched = factorial_radii(m)
    ks = list(range(3, bm + 1))
    return [sched.annulus(k) for k in ks], ks


def is_successful(trace: ExcursionTrace, xs, ys, schedule: CountWindowSchedule,
                  beta: float, m: int, k_vis: int = 1) -> bool:
    """Covering-success verdict for a finished excursion trace.

    True iff every tracked scale-k count lands in its window (target
    +- k) and the innermost disc D(center, r_m/r_{floor(beta*m)+1}) is
    fully visited k_vis times by the end of the last deepest-scale
    excursion.  The trace must track exactly the scales 3..floor(beta*m)
    of the factorial ladder and must have reached its stop boundary.
    """
    bm = _deep_scale(m, beta)
    ks = tuple(range(3, bm + 1))
    if schedule.ks != ks:
        raise ValueError(f"schedule tracks scales {schedule.ks}, need {ks}")
    if len(trace.levels) != len(ks) or (trace.ks is not None and trace.ks != ks):
        raise ValueError("trace levels do not match the scales 3..floor(beta*m)")
    if not trace.stopped:
        raise IncompleteTraceError(
            "path ended before exiting the stop disc; excursion counts are not final"
        )
    for i, k in enumerate(ks):
        if not schedule.contains(k, int(trace.counts[i])):
            return False
    deep = len(ks) - 1
    if trace.counts[deep] == 0:
        return False
    t_star = int(trace.last_completion[deep])
    deep_radius = factorial_radii(m).ratio(bm + 1)
    t_cov = cover_time(xs[: t_star + 1], ys[: t_star + 1], trace.center, deep_radius, k=k_vis)
    return t_cov is not None


def is_multi_successful(traces, paths, schedule: CountWindowSchedule,
                        beta: float, m: int, k_vis: int = 1) -> bool:
    """Joint verdict over several walks' traces at one centre: the
    conjunction of is_successful over the walks."""
    traces = list(traces)
    paths = list(paths)
    if not traces or len(traces) != len(paths):
        raise ValueError("need one (xs, ys) path per trace")
    return all(
        is_successful(trace, xs, ys, schedule, beta, m, k_vis)
        for trace, (xs, ys) in zip(traces, paths)
    )


def successful_verdict(xs, ys, center: Site, m: int, beta: float, a: float,
                       k_vis: int = 1, windows: CountWindowSchedule | None = None):
    """(verdict, trace) of the covering-success test at centre `center`.

    Convenience wrapper: counts the ladder excursions with the stop disc
    D(center, r_m), then applies is_successful.
    """
    levels, ks = annulus_levels(m, beta)
    sched = factorial_radii(m)
    if windows is None:
        windows = window_schedule("successful", m=m, beta=beta, a=a)
    trace = count_excursions(xs, ys, center, levels, stop_radius=sched.radii[m], ks=ks)
    return is_successful(trace, xs, ys, windows, beta, m, k_vis), trace


def successful(xs, ys, center: Site, m: int, beta: float, a: float, k_vis: int = 1) -> bool:
    """Single-walk covering success (see successful_verdict)."""
    ok, _ = successful_verdict(xs, ys, center, m, beta, a, k_vis)
    return ok


def successful_multi(paths, center: Site, m: int, beta: float, h: float,
                     a_margin: float = 0.0, k_vis: int = 1) -> bool:
    """Joint covering success for several independent walks.

    Each walk must keep every scale count inside the slow-growth window
    and individually cover the innermost disc in time; the joint event
    is the conjunction.
    """
    windows = window_schedule("sluggish", m=m, beta=beta, h=h, a_margin=a_margin)
    results = []
    for xs, ys in paths:
        ok, _ = successful_verdict(xs, ys, center, m, beta, a=1.0,
                                   k_vis=k_vis, windows=windows)
        results.append(ok)
    return all(results)


def counts_capped(counts, cap: int) -> bool:
    """Did every centre keep its excursion count at or below the cap?"""
    return bool(np.all(np.asarray(counts) <= cap))


def each_center_has_capped_walk(counts_matrix, cap: int) -> bool:
    """For every centre (row), does some walk (column) stay at or below the cap?"""
    m = np.asarray(counts_matrix)
    return bool(np.all((m <= cap).any(axis=1)))


# -- visit counting inside excursions -------------------------------------------


@njit(cache=True)
def _visits_kernel(xs, ys, zx, zy, q_in, t_out, n_exc):
    visits = np.int64(0)
    completed = np.int64(0)
    in_flight = False
    for t in range(xs.size):
        dx = np.int64(xs[t]) - zx
        dy = np.int64(ys[t]) - zy
        d2 = dx * dx + dy * dy
        if in_flight and d2 >= t_out:
            completed += 1
            in_flight = False
            if completed >= n_exc:
                return visits, completed
        if not in_flight and d2 <= q_in:
            in_flight = True
        if in_flight and d2 == 0:
            visits += 1
    return visits, completed


def visits_during_excursions(xs, ys, z: Site, rho, big_r, n_exc: int) -> int:
    """Visits to the site z during its first n_exc completed excursions
    between entering the closed disc D(z, rho) and reaching distance big_r.

    Raises InsufficientPathError if the path completes fewer than n_exc
    excursions."""
    if n_exc < 1:
        raise ValueError("n_exc must be >= 1")
    if not float(rho) < float(big_r):
        raise ValueError("rho must be smaller than big_r")
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    visits, completed = _visits_kernel(
        xs, ys, np.int64(z[0]), np.int64(z[1]),
        np.int64(closed_radius_threshold(rho)), np.int64(open_radius_threshold(big_r)),
        np.int64(n_exc),
    )
    if completed < n_exc:
        raise InsufficientPathError(
            f"path completed only {int(completed)} of {n_exc} requested excursions"
        )
    return int(visits)


def visits_within_excursions(xs, ys, z: Site, annulus, n_exc: int, threshold: int) -> bool:
    """Is z under-visited during its first n_exc completed excursions?

    annulus is the (rho, big_r) radius pair around z; the answer is True
    iff the walk visits z fewer than `threshold` times while those
    excursions run.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    rho, big_r = annulus
    return visits_during_excursions(xs, ys, z, rho, big_r, n_exc) < threshold


# -- geometry of centre sets -----------------------------------------------------


def scale_index(x: Site, y: Site, sched: RadiiSchedule) -> int:
    """Smallest scale j >= 1 at which the discs D(x, r_m/r_j + 1) and
    D(y, r_m/r_j + 1) are disjoint.  Centres produced by `pack_region`
    always have one; for x = y (or closer than any scale separates)
    this is undefined and raises."""
    if tuple(x) == tuple(y):
        raise ValueError("scale index is undefined for identical centres")
    d2 = dist_sq(x, y)
    for j in range(1, sched.m + 1):
        rr = 2 * (sched.ratio(j) + 1)
        if d2 >= rr * rr:
            return j
    raise ValueError(f"centres {x} and {y} are too close for any scale up to m={sched.m}")


@njit(cache=True)
def _pack_kernel(x0, x1, y0, y1, sep_sq, cell, nx, ny, slots, counts, px, py):
    n = 0
    for x in range(x0, x1 + 1):
        for y in range(y0, y1 + 1):
            cx = (x - x0) // cell
            cy = (y - y0) // cell
            ok = True
            for gx in range(max(0, cx - 1), min(nx - 1, cx + 1) + 1):
                for gy in range(max(0, cy - 1), min(ny - 1, cy + 1) + 1):
                    base = (gx * ny + gy) * slots
                    for s in range(counts[gx * ny + gy]):
                        ddx = px[base + s] - x
                        ddy = py[base + s] - y
                        if ddx * ddx + ddy * ddy < sep_sq:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                c = cx * ny + cy
                if counts[c] >= slots:
                    return -1  # cell overflow: caller retries with more slots
                px[c * slots + counts[c]] = x
                py[c * slots + counts[c]] = y
                counts[c] += 1
                n += 1
    return n


def pack_region(box: tuple[int, int, int, int], separation) -> list[Site]:
    """Greedy maximal set of sites in the box (xmin, xmax, ymin, ymax),
    pairwise at distance >= separation, scanned in lexicographic (x, y)
    order.  Deterministic; every omitted site is within `separation` of
    a chosen one (maximality)."""
    x0, x1, y0, y1 = (int(v) for v in box)
    if x1 < x0 or y1 < y0:
        raise ValueError(f"empty box {box}")
    if float(separation) < 1.0:
        raise ValueError(f"separation must be >= 1, got {separation}")
    sep_sq = open_radius_threshold(separation)
    cell = max(1, math.isqrt(max(sep_sq - 1, 0)) + 1)
    nx = (x1 - x0) // cell + 1
    ny = (y1 - y0) // cell + 1
    if nx * ny > 50_000_000:
        raise ValueError("separation too fine for this box (cell grid would not fit)")
    slots = 8
    while True:
        counts = np.zeros(nx * ny, dtype=np.int32)
        px = np.empty(nx * ny * slots, dtype=np.int64)
        py = np.empty(nx * ny * slots, dtype=np.int64)
        n = _pack_kernel(np.int64(x0), np.int64(x1), np.int64(y0), np.int64(y1),
                         np.int64(sep_sq), np.int64(cell), np.int64(nx), np.int64(ny),
                         np.int64(slots), counts, px, py)
        if n >= 0:
            break
        slots *= 2
    chosen = []
    for cx in range(nx):
        for cy in range(ny):
            c = cx * ny + cy
            for s in range(counts[c]):
                chosen.append((int(px[c * slots + s]), int(py[c * slots + s])))
    chosen.sort()
    return chosen
