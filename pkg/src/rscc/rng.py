"""Counter-based random numbers keyed by ``(seed, stream, step, lane)``.

Every draw is a pure function of its key, so results do not depend on the
order in which samples are generated or on how work is split across
workers.  The mixing function is the SplitMix64 finalizer applied to a
Weyl-sequence combination of the key words.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
# odd multipliers separating the key words
_K_STREAM = 0xD1B54A32D192ED03
_K_STEP = 0xABC98388FB8FAC03
_K_LANE = 0x8CB92BA72F3D8DD7

_INV_2_53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def bits(seed: int, stream: int, step: int, lane: int = 0) -> int:
    """64 random bits for the given key."""
    key = _mix(seed & _MASK)
    z = (key
         ^ ((stream & _MASK) * _K_STREAM)
         ^ ((step & _MASK) * _K_STEP)
         ^ ((lane & _MASK) * _K_LANE)) & _MASK
    return _mix(_mix(z))


def uniform(seed: int, stream: int, step: int, lane: int = 0) -> float:
    """A double in [0, 1) built from the top 53 bits of ``bits``."""
    return (bits(seed, stream, step, lane) >> 11) * _INV_2_53


# numpy uint64 arithmetic wraps modulo 2**64, which is exactly what we need.

def _mix_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniform_array(seed: int, stream, step, lane=0) -> np.ndarray:
    """Vectorised ``uniform``; ``stream``, ``step`` and ``lane`` broadcast."""
    with np.errstate(over="ignore"):
        key = np.uint64(_mix(seed & _MASK))
        s = np.asarray(stream, dtype=np.uint64)
        k = np.asarray(step, dtype=np.uint64)
        ln = np.asarray(lane, dtype=np.uint64)
        z = key ^ (s * np.uint64(_K_STREAM)) ^ (k * np.uint64(_K_STEP)) ^ (ln * np.uint64(_K_LANE))
        z = _mix_np(_mix_np(z))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def choose(weights, u: float) -> int:
    """Inverse-CDF pick of a position with positive weight.

    Zero-weight positions are never returned, even when rounding leaves the
    cumulative sum short of ``u``.
    """
    acc = 0.0
    last = -1
    for i, p in enumerate(weights):
        if p <= 0:
            continue
        last = i
        acc += p
        if u < acc:
            return i
    if last < 0:
        raise ValueError("no positive weight to choose from")
    return last
