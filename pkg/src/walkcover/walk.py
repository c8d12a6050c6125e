"""Simple random walk on Z^2.

Three synchronized ways to advance the same walk:

* `Walk` — stateful, one step at a time (the reference semantics),
* `walk_positions` — the whole path as numpy arrays in one shot,
* numba kernels (`exit_time_batch`, ...) — tight loops for ensembles.

All three consume the counter stream from `rng`, so a walk advanced by
any mixture of them visits exactly the same sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import rng
from .errors import StepBudgetExceeded
from .geometry import Site, dist_sq, open_radius_threshold

_GOLDEN_U = np.uint64(rng.GOLDEN)

# (dx, dy) per direction code; must match rng.DIR_DX / DIR_DY
_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def default_step_budget(r) -> int:
    """Default step allowance for waiting on an exit from D(., r): 64 * r^4.

    Exit times concentrate near r^2; the r^4 allowance makes a budget hit
    astronomically unlikely for any honest caller while still bounding
    runaway loops.
    """
    rr = float(r)
    return int(np.ceil(64.0 * rr * rr * rr * rr))


@dataclass(frozen=True)
class ExitRecord:
    """Outcome of waiting for a walk to leave a disc.

    exit_time is the absolute step index (S_0 is index 0) at which the
    walk first sat outside the open disc; exit_site is where it landed.
    """

    exit_time: int
    exit_site: Site


class Walk:
    """A planar simple random walk with reproducible, seekable randomness."""

    __slots__ = ("seed", "position", "step_count", "_start")

    def __init__(self, seed: int, start: Site = (0, 0)):
        self.seed = seed & rng.MASK64
        self.position: Site = (int(start[0]), int(start[1]))
        self.step_count = 0
        self._start = self.position

    def __repr__(self) -> str:  # pragma: no cover - debugging nicety
        return f"Walk(seed={self.seed:#x}, position={self.position}, step_count={self.step_count})"

    @property
    def start(self) -> Site:
        return self._start

    @property
    def rng_state(self) -> int:
        """Opaque 64-bit generator state: the counter the next step will mix."""
        return (self.seed + self.step_count * rng.GOLDEN) & rng.MASK64

    def step(self) -> Site:
        """Advance one step and return the new position."""
        d = rng.direction(self.seed, self.step_count)
        dx, dy = _STEPS[d]
        x, y = self.position
        self.position = (x + dx, y + dy)
        self.step_count += 1
        return self.position

    def run_until_exit(self, center: Site, r, step_budget: int | None = None) -> ExitRecord:
        """Advance until the walk leaves the open disc D(center, r).

        Returns an ExitRecord with the absolute exit step and landing site.
        The walk must currently be inside the disc.  Raises
        StepBudgetExceeded after `step_budget` steps (default 64*r^4)
        without an exit; the walk keeps the state it reached.
        """
        threshold = open_radius_threshold(r)
        if dist_sq(self.position, center) >= threshold:
            raise ValueError(f"walk at {self.position} is not inside D({center}, {r})")
        if step_budget is None:
            step_budget = default_step_budget(r)
        ctr = (self.seed + self.step_count * rng.GOLDEN) & rng.MASK64
        t, x, y = _exit_kernel(
            np.uint64(ctr),
            np.int64(self.position[0] - center[0]),
            np.int64(self.position[1] - center[1]),
            np.int64(threshold),
            np.int64(step_budget),
        )
        x_abs, y_abs = int(x) + center[0], int(y) + center[1]
        self.position = (x_abs, y_abs)
        self.step_count += int(t) if t >= 0 else int(step_budget)
        if t < 0:
            raise StepBudgetExceeded(
                f"no exit from D({center}, {r}) within {step_budget} steps",
                steps_taken=int(step_budget),
            )
        return ExitRecord(exit_time=self.step_count, exit_site=self.position)

    def hitting_time(self, target, cutoff: int) -> int | None:
        """Absolute step index of the first visit to `target`, or None.

        `target` may be a site, a set of sites, or a predicate on sites.
        The current position counts (a walk already on the target reports
        its current step_count).  At most `cutoff` further steps are
        taken; exceeding the cutoff is an ordinary None result, with the
        walk left wherever the budget ran out.
        """
        pred = _as_predicate(target)
        if pred(self.position):
            return self.step_count
        for _ in range(cutoff):
            self.step()
            if pred(self.position):
                return self.step_count
        return None


def _as_predicate(target):
    if callable(target):
        return target
    if isinstance(target, tuple) and len(target) == 2 and not isinstance(target[0], tuple):
        t = (int(target[0]), int(target[1]))
        return lambda p: p == t
    sites = {(int(x), int(y)) for x, y in target}
    return lambda p: p in sites


def walk_positions(seed: int, n: int, start: Site = (0, 0)) -> tuple[np.ndarray, np.ndarray]:
    """Positions S_0..S_n of a walk as two int32 arrays of length n+1.

    Materializes the whole path (~8 bytes/step); fine up to a few 10^7
    steps, chunk by `offset` arithmetic beyond that.
    """
    dirs = rng.directions(seed, n)
    xs = np.empty(n + 1, dtype=np.int32)
    ys = np.empty(n + 1, dtype=np.int32)
    xs[0] = start[0]
    ys[0] = start[1]
    if n:
        np.cumsum(rng.DIR_DX[dirs], dtype=np.int32, out=xs[1:])
        np.cumsum(rng.DIR_DY[dirs], dtype=np.int32, out=ys[1:])
        if start[0]:
            xs[1:] += np.int32(start[0])
        if start[1]:
            ys[1:] += np.int32(start[1])
    return xs, ys


def direction_counts(seed: int, n: int) -> np.ndarray:
    """How often each of the four directions occurs in the first n steps."""
    return np.bincount(rng.directions(seed, n), minlength=4)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _exit_kernel(ctr, x, y, threshold, budget):
    """Advance from (x, y) until x^2+y^2 >= threshold; (-1, x, y) on budget."""
    t = np.int64(0)
    while t < budget:
        ctr = ctr + np.uint64(0x9E3779B97F4A7C15)
        d = _mix64(ctr) >> np.uint64(62)
        if d == np.uint64(0):
            x += 1
        elif d == np.uint64(1):
            x -= 1
        elif d == np.uint64(2):
            y += 1
        else:
            y -= 1
        t += 1
        if x * x + y * y >= threshold:
            return t, x, y
    return np.int64(-1), x, y


@njit(cache=True)
def _exit_batch_kernel(seeds, threshold, budget, times, ex, ey):
    for i in range(seeds.size):
        t, x, y = _exit_kernel(seeds[i], np.int64(0), np.int64(0), threshold, budget)
        times[i] = t
        ex[i] = x
        ey[i] = y


def exit_time_batch(seeds, r, step_budget: int | None = None):
    """First-exit times from D(0, r) for walks started at the origin.

    Returns (times, exit_x, exit_y) int64 arrays; time -1 marks a walk
    that exhausted the budget (callers decide whether that is an error).
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    if step_budget is None:
        step_budget = default_step_budget(r)
    threshold = open_radius_threshold(r)
    times = np.empty(seeds.size, dtype=np.int64)
    ex = np.empty(seeds.size, dtype=np.int64)
    ey = np.empty(seeds.size, dtype=np.int64)
    _exit_batch_kernel(seeds, np.int64(threshold), np.int64(step_budget), times, ex, ey)
    return times, ex, ey
