"""Counter-based 64-bit generator driving every walk in the package.

Output i (0-based) of a stream with seed s is
``mix64((s + (i+1)*GOLDEN) mod 2**64)`` — the splitmix64 finalizer
applied to a strided counter.  Because outputs
are pure functions of (seed, index), any segment of a walk can be
regenerated without replaying its prefix, replicas can be sharded freely
across threads, and results are bit-identical regardless of scheduling.

A step direction is the top two bits of an output word (the high bits of
the finalizer are its best-mixed): 0 -> +x, 1 -> -x, 2 -> +y, 3 -> -y.
Using bits instead of a modulus avoids any rounding bias.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, odd
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# direction code -> lattice displacement
DIR_DX = np.array([1, -1, 0, 0], dtype=np.int32)
DIR_DY = np.array([0, 0, 1, -1], dtype=np.int32)

_GOLDEN_U = np.uint64(GOLDEN)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)


def mix64(z: int) -> int:
    """splitmix64 finalizer of a 64-bit word (scalar, exact)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def raw_output(seed: int, index: int) -> int:
    """Output word number `index` (0-based) of the stream with the given seed."""
    return mix64((seed + ((index + 1) * GOLDEN)) & MASK64)


def direction(seed: int, index: int) -> int:
    """Direction code (0..3) of step `index + 1` of the walk seeded with `seed`."""
    return raw_output(seed, index) >> 62


def replica_seed(master: int, index: int) -> int:
    """Per-replica seed: the master xor'd with a golden-ratio stride, then finalized.

    seed_i = mix64(master XOR (GOLDEN * (index + 1) mod 2**64)).  The xor
    decorrelates the master from the stride; the finalizer guarantees that
    consecutive indices land in unrelated parts of the seed space.
    """
    if index < 0:
        raise ValueError("replica index must be nonnegative")
    return mix64((master & MASK64) ^ ((GOLDEN * (index + 1)) & MASK64))


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array (wraps mod 2**64)."""
    z = (z ^ (z >> np.uint64(30))) * _M1_U
    z = (z ^ (z >> np.uint64(27))) * _M2_U
    return z ^ (z >> np.uint64(31))


def raw_outputs(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Output words offset .. offset+count-1 of a stream, as a uint64 array."""
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + idx * _GOLDEN_U
        return mix64_array(z)


def directions(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Direction codes (uint8, 0..3) for `count` consecutive steps of a walk."""
    return (raw_outputs(seed, count, offset) >> np.uint64(62)).astype(np.uint8)
