"""Covered-disc statistics of recorded walks.

The central object is the deficiency distance field: for a visit grid
and a multiplicity threshold k, the exact squared Euclidean distance
from each site to the nearest site visited fewer than k times, where
everything outside the visited bounding box counts as deficient.  The
largest fully-k-covered disc centred at x has radius exactly the root
of the field value at x, so maximizing the field over candidate centres
gives the largest covered disc in one sweep.

Fields are computed with the exact integer transform from `edt`.  The
exterior is represented by a one-site ring around the bounding box:
for any cell inside the box, the nearest point of the exterior is
realized on that ring (clamp the escaping coordinate), so the ring is a
faithful stand-in for the infinite deficient plane.

Large boxes are processed in horizontal bands with a halo; a per-row
certificate (computed distance must undercut the distance to any
clipped band edge) triggers halo doubling, so banded results are
bit-identical to the dense transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .edt import _col_dist, _row_envelope, squared_distance_transform
from .errors import InvalidThresholdError
from .geometry import Site, open_radius_threshold
from .occupancy import CAP, VisitGrid

DEFAULT_CELL_BUDGET = 1 << 25  # cells per transform slab (~32M)


@dataclass(frozen=True)
class CoverField:
    """Deficiency distance field over a bounding box.

    values[iy, ix] is the exact squared distance from world site
    (origin[0] + ix, origin[1] + iy) to the nearest k-deficient site.
    """

    values: np.ndarray
    origin: tuple[int, int]
    k: int

    @property
    def region(self) -> tuple[int, int, int, int]:
        h, w = self.values.shape
        return (self.origin[0], self.origin[0] + w - 1, self.origin[1], self.origin[1] + h - 1)

    def value_at(self, site: Site) -> int:
        """Field value at a site; sites outside the box are deficient (0)."""
        ix = int(site[0]) - self.origin[0]
        iy = int(site[1]) - self.origin[1]
        h, w = self.values.shape
        if 0 <= ix < w and 0 <= iy < h:
            return int(self.values[iy, ix])
        return 0

    def to_csv(self, path) -> None:
        """Write the field as CSV with columns x, y, dist_sq (y-major order)."""
        h, w = self.values.shape
        with open(path, "w", newline="") as fh:
            fh.write("x,y,dist_sq\n")
            for iy in range(h):
                row = self.values[iy]
                y = self.origin[1] + iy
                for ix in range(w):
                    fh.write(f"{self.origin[0] + ix},{y},{int(row[ix])}\n")


@dataclass(frozen=True)
class CoveredDiscResult:
    """Largest fully covered disc: centre, its radius, and the exact square.

    An empty result (no site reaches the multiplicity threshold) has
    center None and radius 0.  Ties in radius resolve to the
    lexicographically smallest (x, y) centre.
    """

    center: Site | None
    radius_sq: int
    k: int

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)

    @property
    def is_empty(self) -> bool:
        return self.center is None


def _check_k(k: int, cap: int = CAP) -> None:
    if k < 1:
        raise ValueError(f"multiplicity threshold must be >= 1, got {k}")
    if k > cap:
        raise InvalidThresholdError(
            f"k={k} exceeds the saturating counter cap {cap}: counts that high are not stored exactly"
        )


# -- banded exact transform ---------------------------------------------------


def _iter_field_blocks(builder, hp: int, wp: int, cell_budget: int):
    """Yield (padded_row_start, interior-column block) of the distance field.

    `builder(a, b)` returns the padded source mask for rows a..b-1
    (row 0 and hp-1 and columns 0 and wp-1 are the exterior ring).
    Blocks cover padded rows 1..hp-2 in order; columns are cropped to
    the interior.  Bit-identical to a single dense transform.
    """
    if hp * wp <= cell_budget:
        src = builder(0, hp)
        g = np.empty((hp, wp), dtype=np.int32)
        _col_dist(src, g)
        out = np.empty((hp - 2, wp), dtype=np.int64)
        _row_envelope(g, 1, hp - 1, out)
        yield 1, out[:, 1:-1]
        return
    band = max(64, cell_budget // (3 * wp))
    y = 1
    while y < hp - 1:
        y2 = min(y + band, hp - 1)
        halo = 128
        while True:
            a = max(0, y - halo)
            b = min(hp, y2 + halo)
            src = builder(a, b)
            g = np.empty((b - a, wp), dtype=np.int32)
            _col_dist(src, g)
            out = np.empty((y2 - y, wp), dtype=np.int64)
            _row_envelope(g, y - a, y2 - a, out)
            rows = np.arange(y, y2, dtype=np.int64)
            bound = np.full(rows.size, np.int64(1) << 31)
            if a > 0:
                np.minimum(bound, rows - (a - 1), out=bound)
            if b < hp:
                np.minimum(bound, b - rows, out=bound)
            if a == 0 and b == hp:
                break
            if bool(np.all(out.max(axis=1) < bound * bound)):
                break
            halo *= 2
        yield y, out[:, 1:-1]
        y = y2


@njit(cache=True)
def _block_lexmax(block, x0, y0, best):
    """Fold a field block into best = [value, x, y], preferring larger value,
    then lexicographically smaller (x, y)."""
    h, w = block.shape
    for iy in range(h):
        for ix in range(w):
            v = block[iy, ix]
            if v > best[0]:
                best[0] = v
                best[1] = ix + x0
                best[2] = iy + y0
            elif v == best[0] and v > 0:
                x = ix + x0
                y = iy + y0
                if x < best[1] or (x == best[1] and y < best[2]):
                    best[1] = x
                    best[2] = y


def _dense_builder(counts: np.ndarray, k: int):
    """Padded-source builder over a dense count array (row y-1 of counts
    backs padded row y; the frame is the exterior ring)."""
    h, w = counts.shape
    hp = h + 2

    def build(a: int, b: int) -> np.ndarray:
        block = np.ones((b - a, w + 2), dtype=np.bool_)
        lo = max(a, 1)
        hi = min(b, hp - 1)
        if lo < hi:
            block[lo - a : hi - a, 1:-1] = counts[lo - 1 : hi - 1] < k
        return block

    return build


def _multi_builder(grids, box, k: int = 1):
    """Padded-source builder over the intersection box of several grids:
    a site is deficient unless every grid has count >= k there."""
    minx, maxx, miny, maxy = box
    hp = (maxy - miny + 1) + 2
    w = maxx - minx + 1

    def build(a: int, b: int) -> np.ndarray:
        block = np.ones((b - a, w + 2), dtype=np.bool_)
        lo = max(a, 1)
        hi = min(b, hp - 1)
        if lo < hi:
            y0 = miny + lo - 1
            y1 = miny + hi - 1  # exclusive
            lacking = np.zeros((hi - lo, w), dtype=np.bool_)
            for g in grids:
                lacking |= g.counts_window(minx, maxx, y0, y1 - 1) < k
            block[lo - a : hi - a, 1:-1] = lacking
        return block

    return build


def _lexmax_result(builder, box, k: int, cell_budget: int) -> CoveredDiscResult:
    minx, maxx, miny, maxy = box
    hp = (maxy - miny + 1) + 2
    wp = (maxx - minx + 1) + 2
    best = np.array([0, 1 << 62, 1 << 62], dtype=np.int64)
    for y0p, block in _iter_field_blocks(builder, hp, wp, cell_budget):
        _block_lexmax(block, np.int64(minx), np.int64(miny + y0p - 1), best)
    if best[0] == 0:
        return CoveredDiscResult(center=None, radius_sq=0, k=k)
    return CoveredDiscResult(center=(int(best[1]), int(best[2])), radius_sq=int(best[0]), k=k)


# -- public API ----------------------------------------------------------------


def distance_field(grid: VisitGrid, k: int = 1, cell_budget: int | None = None) -> CoverField:
    """Exact deficiency distance field over the grid's bounding box.

    Materializes an int64 array the size of the box; the transform
    itself runs in bounded memory, but the result does not.
    """
    _check_k(k, grid.cap)
    if grid.bbox is None:
        return CoverField(values=np.zeros((0, 0), dtype=np.int64), origin=(0, 0), k=k)
    minx, maxx, miny, maxy = grid.bbox
    counts, _ = grid.to_dense()
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    hp, wp = counts.shape[0] + 2, counts.shape[1] + 2
    blocks = [b for _, b in _iter_field_blocks(_dense_builder(counts, k), hp, wp, budget)]
    return CoverField(values=np.vstack(blocks), origin=(minx, miny), k=k)


def largest_covered_disc(grid: VisitGrid, k: int = 1, cell_budget: int | None = None) -> CoveredDiscResult:
    """Largest open disc every site of which was visited at least k times.

    Candidate centres are the sites visited >= k times; the winning
    radius is the distance from the centre to the nearest deficient
    site.  Runs the banded transform, so memory stays flat even for
    boxes of 10^8 cells.
    """
    _check_k(k, grid.cap)
    if grid.bbox is None:
        return CoveredDiscResult(center=None, radius_sq=0, k=k)
    counts, _ = grid.to_dense()
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    return _lexmax_result(_dense_builder(counts, k), grid.bbox, k, budget)


def largest_covered_disc_multi(grids, cell_budget: int | None = None) -> CoveredDiscResult:
    """Largest open disc fully visited by every one of several walks.

    Deficiency is the union of the walks' unvisited sets over the
    intersection of their bounding boxes; disjoint boxes give the empty
    result.
    """
    grids = list(grids)
    if not grids:
        raise ValueError("need at least one grid")
    if any(g.bbox is None for g in grids):
        return CoveredDiscResult(center=None, radius_sq=0, k=1)
    minx = max(g.bbox[0] for g in grids)
    maxx = min(g.bbox[1] for g in grids)
    miny = max(g.bbox[2] for g in grids)
    maxy = min(g.bbox[3] for g in grids)
    if minx > maxx or miny > maxy:
        return CoveredDiscResult(center=None, radius_sq=0, k=1)
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    box = (minx, maxx, miny, maxy)
    return _lexmax_result(_multi_builder(grids, box), box, 1, budget)


def origin_covered_radius_sq(grid: VisitGrid, center: Site = (0, 0)) -> int:
    """Exact squared distance from `center` to the nearest unvisited site."""
    cx, cy = int(center[0]), int(center[1])
    if grid.visit_count((cx, cy)) == 0:
        return 0
    # grow a window until an unvisited site appears at distance <= window
    # half-width; anything outside the window is strictly farther, so the
    # minimum is global.  Termination: once the window leaves the bounding
    # box it contains unvisited sites.
    w = 8
    while True:
        win = grid.counts_window(cx - w, cx + w, cy - w, cy + w)
        empty = win == 0
        if empty.any():
            span = np.arange(-w, w + 1, dtype=np.int64)
            d2 = span[:, None] ** 2 + span[None, :] ** 2  # [dy, dx]
            m = int(d2[empty].min())
            if m <= w * w:
                return m
        w *= 2


def origin_covered_radius(grid: VisitGrid, center: Site = (0, 0)) -> float:
    """Distance from `center` (default the origin) to the nearest unvisited site."""
    return math.sqrt(origin_covered_radius_sq(grid, center))


@njit(cache=True)
def _cover_time_kernel(xs, ys, cx, cy, t_open, k, lim):
    w = 2 * lim + 1
    counts = np.zeros((w, w), dtype=np.int32)
    remaining = 0
    for dy in range(-lim, lim + 1):
        for dx in range(-lim, lim + 1):
            if dx * dx + dy * dy < t_open:
                remaining += 1
    for t in range(xs.size):
        dx = np.int64(xs[t]) - cx
        dy = np.int64(ys[t]) - cy
        if dx * dx + dy * dy < t_open:
            c = counts[dy + lim, dx + lim] + 1
            counts[dy + lim, dx + lim] = c
            if c == k:
                remaining -= 1
                if remaining == 0:
                    return t
    return np.int64(-1)


def cover_time(xs, ys, center: Site, r, k: int = 1) -> int | None:
    """First step index t such that S_0..S_t covers every site of
    D(center, r) at least k times; None if the path never does."""
    _check_k(k)
    t_open = open_radius_threshold(r)
    lim = math.isqrt(max(t_open - 1, 0))
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    t = _cover_time_kernel(xs, ys, np.int64(center[0]), np.int64(center[1]),
                           np.int64(t_open), np.int64(k), np.int64(lim))
    return int(t) if t >= 0 else None


def new_site_times(xs, ys) -> np.ndarray:
    """Sorted step indices at which the path discovered a new site (0 first)."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    packed = ((xs + (1 << 30)) << 31) | (ys + (1 << 30))
    _, first = np.unique(packed, return_index=True)
    first.sort()
    return first.astype(np.int64)


def v_of_n(xs, ys, n: int) -> int | None:
    """Steps the walk needs after time n to visit a site it has never
    visited before; None if the recorded path ends first."""
    if n < 0 or n >= len(xs):
        raise ValueError(f"n={n} outside the recorded path (0..{len(xs) - 1})")
    times = new_site_times(xs, ys)
    return v_after(times, n)


def v_after(discovery_times: np.ndarray, n: int) -> int | None:
    """Waiting time for fresh territory after step n, given discovery times."""
    i = int(np.searchsorted(discovery_times, n, side="right"))
    if i >= discovery_times.size:
        return None
    return int(discovery_times[i]) - n


def v_at_samples(discovery_times: np.ndarray, ns) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `v_after` over many sample times.

    Returns (values, defined): values[i] is meaningful only where
    defined[i]; a sample too close to the end of the path is undefined.
    """
    ns = np.asarray(ns, dtype=np.int64)
    idx = np.searchsorted(discovery_times, ns, side="right")
    defined = idx < discovery_times.size
    vals = np.zeros(ns.size, dtype=np.int64)
    vals[defined] = discovery_times[idx[defined]] - ns[defined]
    return vals, defined


def inside_covered_disc(grid: VisitGrid, site: Site, rho, k: int = 1) -> bool:
    """Does `site` lie inside some fully k-covered open disc of radius rho?

    True iff there is a centre x with |site - x| < rho whose distance to
    the nearest k-deficient site is at least rho (i.e. D(x, rho) is
    fully covered and contains the site).  Every candidate centre and
    every deficient site that could disqualify one lies within 2*rho of
    `site`, so a local window of the count field is exact.
    """
    _check_k(k, grid.cap)
    t_open = open_radius_threshold(rho)
    half = math.isqrt(4 * t_open) + 1  # >= 2*rho
    sx, sy = int(site[0]), int(site[1])
    counts = grid.counts_window(sx - half, sx + half, sy - half, sy + half)
    sources = counts < k
    if not sources.any():
        return True  # no deficiency in reach: the disc centred at `site` works
    field = squared_distance_transform(sources)
    span = np.arange(-half, half + 1, dtype=np.int64)
    near = span[:, None] ** 2 + span[None, :] ** 2 < t_open  # [dy, dx] centres
    return bool((field[near] >= t_open).any())
