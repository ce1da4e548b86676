"""The transition operator on the product space ``Y x W``.

``(M phi)(y, w) = sum_x P(w, x) sum_gamma tau_x(gamma) phi(gamma(y), u(w, x))``.

Iterates are evaluated exactly by recursion over admissible branches.  A
second implementation enumerates whole words and map tuples (the iteration
formula written out), and a Monte Carlo estimator integrates along sampled
paths.  Equicontinuity is probed pointwise with test functions on a ring of
sphere points at fixed chordal distance.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, ResourceError
from .maps import apply_map, is_inf
from .scenario import ScenarioSpec, _probs, sample_path_with_maps

BRANCH_CAP = 10**7
RING_SIZE = 8


@dataclass(frozen=True)
class ProductPoint:
    y: complex
    w: object


# -- test functions ----------------------------------------------------------------------


@dataclass(frozen=True)
class One:
    def __call__(self, space, y, w) -> float:
        return 1.0

    def sup(self) -> float:
        return 1.0

    def range(self) -> float:
        return 0.0


@dataclass(frozen=True)
class StateCoord:
    """``phi(y, w)`` = numeric embedding of ``w``."""

    def __call__(self, space, y, w) -> float:
        return space.coord(w)

    def sup(self) -> float:
        return math.inf

    def range(self) -> float:
        return math.inf


def _log_mod(y) -> float:
    if is_inf(y):
        return math.inf
    a = abs(y)
    return -math.inf if a == 0 else math.log(a)


@dataclass(frozen=True)
class RadialBump:
    """``exp(-((log|y| - s0) / sigma)**2)``, zero at 0 and infinity."""

    s0: float = 0.0
    sigma: float = 1.0

    def __call__(self, space, y, w) -> float:
        s = _log_mod(y)
        if math.isinf(s):
            return 0.0
        return math.exp(-((s - self.s0) / self.sigma) ** 2)

    def sup(self) -> float:
        return 1.0

    def range(self) -> float:
        return 1.0


@dataclass(frozen=True)
class ClippedLogMod:
    """``log|y|`` clipped to ``[lo, hi]``; 0 maps to ``lo`` and infinity to ``hi``."""

    lo: float = -2.0
    hi: float = 2.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidArgument("ClippedLogMod needs lo < hi")

    def __call__(self, space, y, w) -> float:
        return min(max(_log_mod(y), self.lo), self.hi)

    def sup(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def range(self) -> float:
        return self.hi - self.lo


def parse_test_function(text: str):
    """``one``, ``coord``, ``bump s0 sigma`` or ``clip lo hi``."""
    parts = text.replace(",", " ").split()
    if not parts:
        raise InvalidArgument("empty test function")
    kind, args = parts[0].lower(), [float(a) for a in parts[1:]]
    if kind == "one" and not args:
        return One()
    if kind == "coord" and not args:
        return StateCoord()
    if kind == "bump" and len(args) in (0, 2):
        return RadialBump(*args)
    if kind == "clip" and len(args) in (0, 2):
        return ClippedLogMod(*args)
    raise InvalidArgument(f"unknown test function {text!r}; use one, coord, bump s0 sigma, clip lo hi")


# -- exact evaluation --------------------------------------------------------------------


def _branches(spec: ScenarioSpec, y, w):
    """One-step successors ``(weight, y', w')`` sorted by index id, then map position."""
    out = []
    for x, p in enumerate(_probs(spec, w)):
        if p <= 0:
            continue
        w2 = spec.update(spec.space, w, x)
        for m, q in spec.tau[x]:
            out.append((p * q, apply_map(m, y), w2))
    return out


def apply_M(spec: ScenarioSpec, phi, p: ProductPoint) -> float:
    return iterate_M(spec, phi, p, 1)


def iterate_M(spec: ScenarioSpec, phi, p: ProductPoint, n: int, cap: int = BRANCH_CAP) -> float:
    """``(M^n phi)(p)`` by depth-``n`` recursion, ``M^n phi = M (M^(n-1) phi)``."""
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    spec.space.check(p.w)
    budget = [cap]

    def rec(y, w, k):
        if k == 0:
            return phi(spec.space, y, w)
        br = _branches(spec, y, w)
        budget[0] -= len(br)
        if budget[0] < 0:
            raise ResourceError(f"operator recursion exceeds {cap} branches")
        total = 0.0
        for weight, y2, w2 in br:
            total += weight * rec(y2, w2, k - 1)
        return total

    return rec(p.y, p.w, n)


def word_sum_oracle(spec: ScenarioSpec, phi, p: ProductPoint, n: int, cap: int = BRANCH_CAP) -> float:
    """The iteration formula summed over every admissible word and map tuple."""
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    if n == 0:
        return phi(spec.space, p.y, p.w)
    k = len(spec.indices)
    width = max(len(row) for row in spec.tau)
    if (k * width) ** n > cap:
        raise ResourceError(f"(|X| * max support)^n = {(k * width) ** n} exceeds the cap {cap}")
    total = 0.0
    for word in itertools.product(range(k), repeat=n):
        prob, states = 1.0, [p.w]
        for x in word:
            prob *= spec.transition(spec.space, states[-1], k)[x]
            if prob == 0:
                break
            states.append(spec.update(spec.space, states[-1], x))
        if prob == 0:
            continue
        for choice in itertools.product(*(spec.tau[x] for x in word)):
            weight, y = prob, p.y
            for m, q in choice:
                weight *= q
                y = apply_map(m, y)
            total += weight * phi(spec.space, y, states[-1])
    return total


def mc_estimate_M(spec: ScenarioSpec, phi, p: ProductPoint, n: int, samples: int,
                  seed: int) -> tuple[float, float]:
    """Monte Carlo average of ``phi(gamma_n...gamma_1(y), w_n)`` over path draws."""
    if samples < 100:
        raise InvalidArgument("need at least 100 samples")
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    vals = np.empty(samples)
    for i in range(samples):
        path = sample_path_with_maps(spec, p.w, n, seed, stream=i)
        y = p.y
        for m in path.maps:
            y = apply_map(m, y)
        vals[i] = phi(spec.space, y, path.states[-1])
    if np.all(vals == vals[0]):
        return float(vals[0]), 0.0  # degenerate: avoid summation rounding
    return float(vals.mean()), float(vals.std(ddof=1)) / math.sqrt(samples)


# -- equicontinuity probes ---------------------------------------------------------------


def probe_ring(y: complex, delta: float, size: int = RING_SIZE) -> list[complex]:
    """``size`` sphere points at chordal distance exactly ``delta`` from ``y``.

    The rotation ``z -> (z + y) / (1 - conj(y) z)`` is a chordal isometry
    taking 0 to ``y``; the ring is the image of a circle about 0.
    """
    if not 0 < delta < 2:
        raise InvalidArgument("probe distance must lie in (0, 2)")
    r = delta / math.sqrt(4.0 - delta * delta)
    out = []
    for j in range(size):
        z = r * cmath.exp(2j * math.pi * j / size)
        if is_inf(y):
            out.append(1 / z)
            continue
        den = 1 - y.conjugate() * z
        out.append(complex(math.inf, 0) if den == 0 else (z + y) / den)
    return out


def _interval_ring(y: float, delta: float) -> list[float]:
    return [y - delta, y + delta]


@dataclass(frozen=True)
class Diagnostic:
    radii: tuple
    n_max: int
    osc: tuple  # ((delta, n, oscillation), ...)

    def sup_over_n(self) -> dict[float, float]:
        out: dict[float, float] = {}
        for d, _, o in self.osc:
            out[d] = max(out.get(d, 0.0), o)
        return out

    def rows(self) -> list[tuple[float, int, float]]:
        return list(self.osc)


def equicontinuity_diagnostic(spec: ScenarioSpec, phi, p: ProductPoint, radii: Sequence[float],
                              n_max: int, cap: int = BRANCH_CAP) -> Diagnostic:
    """``osc(delta, n) = max over the probe ring of |M^n phi(probe) - M^n phi(p)|``."""
    radii = tuple(float(r) for r in radii)
    if any(a <= b for a, b in zip(radii, radii[1:])):
        raise InvalidArgument("radii must be strictly descending")
    if n_max < 1:
        raise InvalidArgument("n_max must be >= 1")
    on_sphere = spec.on_sphere
    rows = []
    for n in range(1, n_max + 1):
        base = iterate_M(spec, phi, p, n, cap)
        for d in radii:
            ring = probe_ring(complex(p.y), d) if on_sphere else _interval_ring(float(p.y), d)
            osc = 0.0
            for q in ring:
                if not on_sphere:
                    try:
                        val = iterate_M(spec, phi, ProductPoint(q, p.w), n, cap)
                    except ValueError:
                        continue  # probe left the interval
                else:
                    val = iterate_M(spec, phi, ProductPoint(q, p.w), n, cap)
                osc = max(osc, abs(val - base))
            rows.append((d, n, osc))
    rows.sort(key=lambda r: (-r[0], r[1]))
    return Diagnostic(radii, n_max, tuple(rows))
