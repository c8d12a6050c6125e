"""Sparse visit-count grids.

A VisitGrid stores how often each lattice site has been visited, as a
dict of 64x64 uint16 tiles keyed by tile coordinates.  Counters saturate
at a configurable cap (default 65535) instead of wrapping; a `saturated`
flag records that any site ever hit the cap.  Thresholded queries
(count < k) stay exact despite saturation whenever k <= cap, because
min(true, cap) < k iff true < k.

Snapshots are a small binary format (run-length-encoded tiles plus a
blake2b checksum) documented in `VisitGrid.save`.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .errors import InvalidThresholdError, SnapshotFormatError
from .geometry import Site, disc_offsets

TILE = 64
CAP = 65535

_MAGIC = b"WALKCOVER\x00"
_VERSION = 1
_HEADER = struct.Struct("<10sHQQIIBBH4qI")  # magic, ver, seed, visits, tile, cap,
#                                             saturated, has_bbox, pad, bbox, n_tiles
_TILE_HDR = struct.Struct("<qqI")
# packed site keys use two 31-bit fields, so coordinates must stay below 2^30
_COORD_OFF = 1 << 30
_COORD_MASK = (1 << 31) - 1


class VisitGrid:
    """Saturating per-site visit counts for one or more recorded paths."""

    def __init__(self, seed: int = 0, cap: int = CAP):
        if not 1 <= cap <= CAP:
            raise ValueError(f"cap must be in 1..{CAP} (uint16 storage), got {cap}")
        self.seed = int(seed)
        self.cap = int(cap)
        self.tiles: dict[tuple[int, int], np.ndarray] = {}
        self.visits = 0  # positions recorded, S_0 included
        self.saturated = False
        self._bbox: tuple[int, int, int, int] | None = None

    # -- recording ---------------------------------------------------------

    def record_visit(self, site: Site) -> int:
        """Count one visit; returns the stored (possibly capped) new count."""
        x, y = int(site[0]), int(site[1])
        arr = self._tile(x >> 6, y >> 6)
        lx, ly = x & 63, y & 63
        c = int(arr[ly, lx])
        if c < self.cap:
            c += 1
            arr[ly, lx] = c
        else:
            self.saturated = True
        self.visits += 1
        self._grow_bbox(x, x, y, y)
        return c

    def record_path(self, xs, ys) -> None:
        """Bulk-record every position in xs/ys (one visit per array entry).

        A fresh path should be recorded including S_0; later segments of
        the same path must begin at the step after the previous call's
        last entry, or sites get double-counted.
        """
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.size == 0:
            return
        packed = ((xs + _COORD_OFF) << 31) | (ys + _COORD_OFF)
        sites, counts = np.unique(packed, return_counts=True)
        px = (sites >> 31) - _COORD_OFF
        py = (sites & _COORD_MASK) - _COORD_OFF
        tx = px >> 6
        ty = py >> 6
        tkey = ((tx + _COORD_OFF) << 31) | (ty + _COORD_OFF)
        order = np.argsort(tkey, kind="stable")
        tkey_s = tkey[order]
        cuts = np.flatnonzero(np.diff(tkey_s)) + 1
        starts = np.concatenate(([0], cuts))
        ends = np.concatenate((cuts, [tkey_s.size]))
        for a, b in zip(starts, ends):
            sel = order[a:b]
            arr = self._tile(int(tx[sel[0]]), int(ty[sel[0]]))
            lx = (px[sel] & 63).astype(np.intp)
            ly = (py[sel] & 63).astype(np.intp)
            new = arr[ly, lx].astype(np.int64) + counts[sel]
            if np.any(new > self.cap):
                self.saturated = True
                np.minimum(new, self.cap, out=new)
            arr[ly, lx] = new.astype(np.uint16)
        self.visits += int(xs.size)
        self._grow_bbox(int(xs.min()), int(xs.max()), int(ys.min()), int(ys.max()))

    @classmethod
    def from_positions(cls, xs, ys, seed: int = 0) -> "VisitGrid":
        g = cls(seed=seed)
        g.record_path(xs, ys)
        return g

    # -- queries -----------------------------------------------------------

    @property
    def total_steps(self) -> int:
        """Steps taken by the recorded path: visits minus the S_0 entry."""
        return max(self.visits - 1, 0)

    @property
    def bbox(self) -> tuple[int, int, int, int] | None:
        """(minx, maxx, miny, maxy) of visited sites, None if empty."""
        return self._bbox

    def visit_count(self, site: Site) -> int:
        x, y = int(site[0]), int(site[1])
        arr = self.tiles.get((x >> 6, y >> 6))
        return int(arr[y & 63, x & 63]) if arr is not None else 0

    def counts_window(self, minx: int, maxx: int, miny: int, maxy: int) -> np.ndarray:
        """Dense int32 window [miny..maxy] x [minx..maxx], indexed [y-miny, x-minx]."""
        h, w = maxy - miny + 1, maxx - minx + 1
        out = np.zeros((h, w), dtype=np.int32)
        for tx in range(minx >> 6, (maxx >> 6) + 1):
            for ty in range(miny >> 6, (maxy >> 6) + 1):
                arr = self.tiles.get((tx, ty))
                if arr is None:
                    continue
                x0, y0 = tx << 6, ty << 6
                sx0, sx1 = max(minx, x0), min(maxx, x0 + 63)
                sy0, sy1 = max(miny, y0), min(maxy, y0 + 63)
                out[sy0 - miny : sy1 - miny + 1, sx0 - minx : sx1 - minx + 1] = arr[
                    sy0 - y0 : sy1 - y0 + 1, sx0 - x0 : sx1 - x0 + 1
                ]
        return out

    def to_dense(self) -> tuple[np.ndarray, tuple[int, int]]:
        """Dense counts over the visited bounding box and its (minx, miny) origin.

        Materializes the whole box: ~4 bytes per cell, so mind walks whose
        range spans millions of sites.
        """
        if self._bbox is None:
            return np.zeros((0, 0), dtype=np.int32), (0, 0)
        minx, maxx, miny, maxy = self._bbox
        return self.counts_window(minx, maxx, miny, maxy), (minx, miny)

    def deficient_sites(self, center: Site, r, k: int = 1) -> list[Site]:
        """Sites of the open disc D(center, r) visited fewer than k times,
        in lexicographic (x, y) order."""
        if k < 1:
            raise ValueError(f"threshold k must be >= 1, got {k}")
        if k > self.cap:
            raise InvalidThresholdError(
                f"k={k} exceeds the counter cap {self.cap}; counts that high are not representable"
            )
        off = disc_offsets(r)
        if off.size == 0:
            return []
        cx, cy = int(center[0]), int(center[1])
        ax = off[:, 0] + cx
        ay = off[:, 1] + cy
        win = self.counts_window(int(ax.min()), int(ax.max()), int(ay.min()), int(ay.max()))
        vals = win[ay - int(ay.min()), ax - int(ax.min())]
        lacking = vals < k
        return [(int(x), int(y)) for x, y in zip(ax[lacking], ay[lacking])]

    def copy(self) -> "VisitGrid":
        g = VisitGrid(seed=self.seed, cap=self.cap)
        g.tiles = {k: v.copy() for k, v in self.tiles.items()}
        g.visits = self.visits
        g.saturated = self.saturated
        g._bbox = self._bbox
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, VisitGrid):
            return NotImplemented
        if (self.seed, self.cap, self.visits, self.saturated, self._bbox) != (
            other.seed,
            other.cap,
            other.visits,
            other.saturated,
            other._bbox,
        ):
            return False
        keys = {k for k, v in self.tiles.items() if v.any()}
        if keys != {k for k, v in other.tiles.items() if v.any()}:
            return False
        return all(np.array_equal(self.tiles[k], other.tiles[k]) for k in keys)

    # -- snapshots -----------------------------------------------------------

    def save(self, path) -> None:
        """Write a snapshot.

        Layout (all little-endian): a fixed header
        (magic "WALKCOVER\\x00", u16 version=1, u64 seed, u64 visits,
        u32 tile_size, u32 cap, u8 saturated, u8 has_bbox, u16 pad,
        4 x i64 bbox, u32 tile_count), then per nonempty tile sorted by
        (tx, ty): i64 tx, i64 ty, u32 run_count and run_count pairs of
        (u16 value, u16 length) run-length-encoding the 4096 cells in
        row-major (y outer, x inner) order, then an 8-byte blake2b digest
        of everything before it.
        """
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def to_bytes(self) -> bytes:
        bbox = self._bbox if self._bbox is not None else (0, 0, 0, 0)
        live = sorted(k for k, v in self.tiles.items() if v.any())
        parts = [
            _HEADER.pack(
                _MAGIC,
                _VERSION,
                self.seed & (1 << 64) - 1,
                self.visits,
                TILE,
                self.cap,
                int(self.saturated),
                int(self._bbox is not None),
                0,
                *bbox,
                len(live),
            )
        ]
        for tx, ty in live:
            flat = self.tiles[(tx, ty)].ravel()
            cuts = np.flatnonzero(np.diff(flat)) + 1
            starts = np.concatenate(([0], cuts))
            lengths = np.diff(np.concatenate((starts, [flat.size])))
            vals = flat[starts]
            parts.append(_TILE_HDR.pack(tx, ty, starts.size))
            runs = np.empty(starts.size * 2, dtype=np.uint16)
            runs[0::2] = vals
            runs[1::2] = lengths.astype(np.uint16)  # 4096 never exceeds u16
            parts.append(runs.tobytes())
        body = b"".join(parts)
        return body + hashlib.blake2b(body, digest_size=8).digest()

    @classmethod
    def load(cls, path) -> "VisitGrid":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "VisitGrid":
        if len(blob) < _HEADER.size + 8:
            raise SnapshotFormatError("snapshot truncated: shorter than a header")
        body, digest = blob[:-8], blob[-8:]
        if hashlib.blake2b(body, digest_size=8).digest() != digest:
            raise SnapshotFormatError("snapshot checksum mismatch")
        (magic, version, seed, visits, tile, cap, saturated, has_bbox, _pad,
         b0, b1, b2, b3, n_tiles) = _HEADER.unpack_from(body, 0)
        if magic != _MAGIC:
            raise SnapshotFormatError("not a visit-grid snapshot (bad magic)")
        if version != _VERSION:
            raise SnapshotFormatError(f"unsupported snapshot version {version}")
        if tile != TILE:
            raise SnapshotFormatError(f"snapshot tile size {tile} not supported")
        if not 1 <= cap <= CAP:
            raise SnapshotFormatError(f"snapshot cap {cap} out of range")
        g = cls(seed=seed, cap=cap)
        g.visits = visits
        g.saturated = bool(saturated)
        g._bbox = (b0, b1, b2, b3) if has_bbox else None
        off = _HEADER.size
        for _ in range(n_tiles):
            if off + _TILE_HDR.size > len(body):
                raise SnapshotFormatError("snapshot truncated inside a tile header")
            tx, ty, n_runs = _TILE_HDR.unpack_from(body, off)
            off += _TILE_HDR.size
            nbytes = n_runs * 4
            if off + nbytes > len(body):
                raise SnapshotFormatError("snapshot truncated inside tile runs")
            runs = np.frombuffer(body, dtype=np.uint16, count=n_runs * 2, offset=off)
            off += nbytes
            vals = runs[0::2]
            lengths = runs[1::2].astype(np.int64)
            if int(lengths.sum()) != TILE * TILE:
                raise SnapshotFormatError("tile runs do not cover the tile")
            g.tiles[(tx, ty)] = np.repeat(vals, lengths).reshape(TILE, TILE).copy()
        if off != len(body):
            raise SnapshotFormatError("trailing bytes after the last tile")
        return g

    # -- internals -----------------------------------------------------------

    def _tile(self, tx: int, ty: int) -> np.ndarray:
        arr = self.tiles.get((tx, ty))
        if arr is None:
            arr = np.zeros((TILE, TILE), dtype=np.uint16)
            self.tiles[(tx, ty)] = arr
        return arr

    def _grow_bbox(self, minx: int, maxx: int, miny: int, maxy: int) -> None:
        if self._bbox is None:
            self._bbox = (minx, maxx, miny, maxy)
        else:
            a, b, c, d = self._bbox
            self._bbox = (min(a, minx), max(b, maxx), min(c, miny), max(d, maxy))
