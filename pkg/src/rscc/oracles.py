"""Independent reference computations used to cross-check the exact modules.

These deliberately avoid the log-radius algebra of ``radial``: they iterate
moduli directly, enumerate words by brute force and bisect on orbit
behaviour, so agreement with the fast code is evidence rather than
tautology.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

from .maps import Monomial
from .scenario import ScenarioSpec

ESCAPE_HI = 1e100
ESCAPE_LO = 1e-100


def orbit_fate(maps: Sequence[Monomial], r: float, max_steps: int = 4000) -> int:
    """+1 if the modulus orbit of ``r`` under the periodic sequence escapes to infinity,
    -1 if it collapses to 0, 0 if undecided within ``max_steps``."""
    n = len(maps)
    for k in range(max_steps):
        m = maps[k % n]
        try:
            r = m.coeff * r ** m.degree
        except OverflowError:
            return 1
        if r > ESCAPE_HI:
            return 1
        if r < ESCAPE_LO:
            return -1
    return 0


def bounded_orbit_radius(maps: Sequence[Monomial], lo: float = 1e-3, hi: float = 1e3,
                         iters: int = 200) -> float:
    """Log of the unique radius whose orbit stays bounded away from 0 and infinity.

    Bisection on ``log r``: radii below the circle collapse, radii above escape.
    """
    a, b = math.log(lo), math.log(hi)
    if orbit_fate(maps, lo) != -1 or orbit_fate(maps, hi) != 1:
        raise ValueError("bracket does not straddle the bounded-orbit circle")
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        fate = orbit_fate(maps, math.exp(mid))
        if fate > 0:
            b = mid
        elif fate < 0:
            a = mid
        else:
            return mid
    return 0.5 * (a + b)


def word_tree_radii(spec: ScenarioSpec, w, depth: int) -> list[float]:
    """Circle radii ``sum -log c_k / (d_1...d_k)`` of every admissible map word of length ``depth``.

    Brute force over all index and map tuples; the cylinder probability is
    recomputed by the chain rule for each word.  The truncated series places
    each point within ``max|log c| / 2**depth`` of a genuine path circle.
    """
    k = len(spec.indices)
    out = set()
    for word in itertools.product(range(k), repeat=depth):
        v, ok = w, True
        for x in word:
            if spec.transition(spec.space, v, k)[x] <= 0:
                ok = False
                break
            v = spec.update(spec.space, v, x)
        if not ok:
            continue
        for choice in itertools.product(*(range(len(spec.tau[x])) for x in word)):
            t, scale = 0.0, 1.0
            for x, j in zip(word, choice):
                m = spec.tau[x][j][0]
                scale *= m.degree
                t -= math.log(m.coeff) / scale
            out.add(t)
    return sorted(out)


def infinite_product(n_terms: int = 60) -> float:
    """``prod_{k=1..n} (1 - 2**-k)`` by direct multiplication."""
    p = 1.0
    for k in range(1, n_terms + 1):
        p *= 1.0 - 0.5 ** k
    return p
