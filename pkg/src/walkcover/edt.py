"""Exact squared Euclidean distance transform on integer grids.

Two-pass dimensional reduction: a vertical sweep finds, per cell, the
row distance to the nearest source in its column; a horizontal sweep
then takes the lower envelope of the parabolas (x - i)^2 + g_i^2 using
only integer comparisons and floor divisions, so results are exact for
any grid size — no float boundary cases.

The horizontal pass is per-row independent, which lets callers evaluate
just a window of rows after a vertical pass over a taller band (see
`cover` for the banded driver that keeps memory flat on huge boxes).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# column distance assigned where a column has no source; squares stay < 2^63
INF_G = np.int64(1) << 30


@njit(cache=True)
def _col_dist(src, g):
    """Vertical pass: g[y, x] = distance (in rows) to the nearest source in column x."""
    h, w = src.shape
    for x in range(w):
        g[0, x] = 0 if src[0, x] else INF_G
    for y in range(1, h):
        for x in range(w):
            g[y, x] = 0 if src[y, x] else g[y - 1, x] + 1
    for y in range(h - 2, -1, -1):
        for x in range(w):
            if g[y + 1, x] + 1 < g[y, x]:
                g[y, x] = g[y + 1, x] + 1


@njit(cache=True, inline="always")
def _parab(x, i, gi):
    dx = x - i
    return dx * dx + gi * gi


@njit(cache=True)
def _row_envelope(g, y0, y1, out):
    """Horizontal pass for rows y0..y1-1 of g, writing squared distances
    to out[y - y0].  Lower envelope with integer-only comparisons."""
    h, w = g.shape
    s = np.empty(w, dtype=np.int64)  # abscissa of envelope parabolas
    t = np.empty(w, dtype=np.int64)  # where each parabola starts to lead
    for y in range(y0, y1):
        q = 0
        s[0] = 0
        t[0] = 0
        for u in range(1, w):
            gu = np.int64(g[y, u])
            while q >= 0 and _parab(t[q], s[q], np.int64(g[y, s[q]])) > _parab(t[q], u, gu):
                q -= 1
            if q < 0:
                q = 0
                s[0] = u
            else:
                gi = np.int64(g[y, s[q]])
                # first integer column where parabola u beats parabola s[q];
                # the numerator is nonnegative here, so // is a true floor
                wloc = 1 + (u * u - s[q] * s[q] + gu * gu - gi * gi) // (2 * (u - s[q]))
                if wloc < w:
                    q += 1
                    s[q] = u
                    t[q] = wloc
        for u in range(w - 1, -1, -1):
            out[y - y0, u] = _parab(u, s[q], np.int64(g[y, s[q]]))
            if u == t[q]:
                q -= 1


def squared_distance_transform(sources: np.ndarray) -> np.ndarray:
    """Exact squared distance from every cell to the nearest True cell.

    `sources` is a 2D boolean mask with at least one True cell.
    Returns an int64 array of the same shape.
    """
    src = np.ascontiguousarray(sources, dtype=np.bool_)
    if src.ndim != 2 or src.size == 0:
        raise ValueError("sources must be a nonempty 2D mask")
    if not src.any():
        raise ValueError("sources mask has no True cell")
    h, w = src.shape
    g = np.empty((h, w), dtype=np.int64)
    _col_dist(src, g)
    out = np.empty((h, w), dtype=np.int64)
    _row_envelope(g, 0, h, out)
    return out
