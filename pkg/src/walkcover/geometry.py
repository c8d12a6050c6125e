"""Exact lattice-disc geometry.

All disc membership tests reduce to comparing an integer squared distance
against an integer threshold, so no float creeps into any decision:

* open disc D(c, r):   member  iff  |p-c|^2 <  ceil(r^2)
* closed disc:         member  iff  |p-c|^2 <= floor(r^2)

``ceil``/``floor`` are taken over exact rationals (`fractions.Fraction`
represents every int and every float exactly), so radii like 2.5 or
13824 behave identically at any magnitude.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

import numpy as np

Site = tuple[int, int]


def open_radius_threshold(r) -> int:
    """Smallest integer T with: |p|^2 < T  iff  |p| < r  (T = ceil(r^2)).

    A walk leaves the open disc D(c, r) exactly when its squared distance
    to c first reaches T.
    """
    rq = Fraction(r)
    if rq <= 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    return math.ceil(rq * rq)


def closed_radius_threshold(r) -> int:
    """Largest integer T with: |p|^2 <= T  iff  |p| <= r  (T = floor(r^2))."""
    rq = Fraction(r)
    if rq < 0:
        raise ValueError(f"radius must be nonnegative, got {r!r}")
    return math.floor(rq * rq)


def dist_sq(a: Site, b: Site) -> int:
    """Exact squared Euclidean distance between two lattice sites."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy


def disc_offsets(r) -> np.ndarray:
    """(m, 2) int64 array of all offsets with |v| < r, lexicographic in (x, y)."""
    t = open_radius_threshold(r)
    lim = math.isqrt(max(t - 1, 0))
    span = np.arange(-lim, lim + 1, dtype=np.int64)
    ox, oy = np.meshgrid(span, span, indexing="ij")  # x-major => lexicographic
    keep = ox * ox + oy * oy < t
    return np.stack([ox[keep], oy[keep]], axis=1)


def disc_sites(center: Site, r) -> list[Site]:
    """All sites of the open disc D(center, r), lexicographic in (x, y)."""
    cx, cy = center
    off = disc_offsets(r)
    return [(cx + int(dx), cy + int(dy)) for dx, dy in off]


def disc_boundary(center: Site, r) -> list[Site]:
    """The one-site outer ring of D(center, r): sites outside the open disc
    that are 4-adjacent to a site inside it.  Lexicographic in (x, y).

    Every nearest-neighbour path leaving the disc lands on this ring.
    """
    t = open_radius_threshold(r)
    cx, cy = center
    ring = set()
    for dx, dy in disc_offsets(r):
        for ax, ay in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx, ny = dx + ax, dy + ay
            if nx * nx + ny * ny >= t:
                ring.add((cx + int(nx), cy + int(ny)))
    return sorted(ring)


def bounding_box(sites: Iterable[Site]) -> tuple[int, int, int, int]:
    """(minx, maxx, miny, maxy) of a nonempty collection of sites."""
    it = iter(sites)
    try:
        x0, y0 = next(it)
    except StopIteration:
        raise ValueError("bounding_box of an empty collection") from None
    minx = maxx = x0
    miny = maxy = y0
    for x, y in it:
        minx = min(minx, x); maxx = max(maxx, x)
        miny = min(miny, y); maxy = max(maxy, y)
    return minx, maxx, miny, maxy
