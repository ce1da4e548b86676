"""Exact Julia-set computations for monomial systems in log-radius coordinates.

For ``z -> c z**d`` the modulus evolves by the affine map ``s -> d*s + log c``
on ``s = log|z|``, so rotation-invariant compact sets are finite unions of
closed ``s``-intervals (``RadialSet``).  Julia sets of monomial semigroups
are attractors of the inverse, contracting, affine systems; statewise Julia
sets are the attractor of the graph-directed version over the declared
radial classes.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

from .errors import ConfigurationError, InvalidArgument, ResourceError, UnsupportedMap
from .maps import Monomial, compose_monomials
from .scenario import WORD_CAP, ScenarioSpec, _probs, validate_classes

MERGE_TOL = 1e-12
DEFAULT_TOL = 1e-9
MAX_INTERVALS = 50_000
MAX_SWEEPS = 2_000


@dataclass(frozen=True)
class RadialSet:
    """Sorted, disjoint closed intervals of log-radius; empty tuple is the empty set."""

    intervals: tuple = ()

    @classmethod
    def of(cls, intervals: Iterable, merge: float = MERGE_TOL) -> "RadialSet":
        items = sorted((float(a) + 0.0, float(b) + 0.0) for a, b in intervals)
        out: list[list[float]] = []
        for a, b in items:
            if a > b:
                raise InvalidArgument(f"interval [{a}, {b}] has lo > hi")
            if out and a - out[-1][1] <= merge:
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return cls(tuple((a, b) for a, b in out))

    @classmethod
    def point(cls, s: float) -> "RadialSet":
        return cls(((float(s), float(s)),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __len__(self):
        return len(self.intervals)

    def union(self, *others: "RadialSet", merge: float = MERGE_TOL) -> "RadialSet":
        return RadialSet.of([iv for r in (self, *others) for iv in r.intervals], merge)

    def intersect(self, other: "RadialSet", tol: float = 0.0) -> "RadialSet":
        """Intersection; intervals closer than ``tol`` count as touching."""
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            elif lo - hi <= tol:
                mid = 0.5 * (lo + hi)
                out.append((mid, mid))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return RadialSet.of(out)

    def preimage(self, m: Monomial) -> "RadialSet":
        return radial_preimage(m, self)

    def image(self, m: Monomial) -> "RadialSet":
        if not isinstance(m, Monomial):
            raise UnsupportedMap(f"radial image needs a monomial, got {type(m).__name__}")
        return RadialSet.of((m.degree * a + m.log_coeff, m.degree * b + m.log_coeff)
                            for a, b in self.intervals)

    @cached_property
    def _los(self) -> list[float]:
        return [a for a, _ in self.intervals]

    @cached_property
    def _gap_mids(self) -> list[float]:
        iv = self.intervals
        return [0.5 * (iv[k][1] + iv[k + 1][0]) for k in range(len(iv) - 1)]

    def distance_to(self, s: float) -> float:
        if not self.intervals:
            return math.inf
        k = bisect.bisect_right(self._los, s) - 1
        best = math.inf
        for j in (k, k + 1):
            if 0 <= j < len(self.intervals):
                a, b = self.intervals[j]
                if a <= s <= b:
                    return 0.0
                best = min(best, abs(s - a), abs(s - b))
        return best

    def contains(self, s: float, tol: float = 0.0) -> bool:
        return self.distance_to(s) <= tol

    def within(self, other: "RadialSet", tol: float) -> bool:
        """Whether every point of ``self`` lies within ``tol`` of ``other``."""
        if self.is_empty:
            return True
        return _sup_distance(self, other) <= tol

    def radii(self) -> list[tuple[float, float]]:
        return [(_exp(a), _exp(b)) for a, b in self.intervals]

    def format_radii(self, digits: int = 12) -> str:
        if self.is_empty:
            return "radii: empty"
        parts = [f"[{r0:.{digits}g}, {r1:.{digits}g}]" for r0, r1 in self.radii()]
        return "radii: " + " ∪ ".join(parts)


def _exp(s: float) -> float:
    if s == -math.inf:
        return 0.0
    try:
        return math.exp(s)
    except OverflowError:
        return math.inf


def _sup_distance(A: RadialSet, B: RadialSet) -> float:
    """``sup over a in A`` of ``d(a, B)`` for nonempty interval unions."""
    if B.is_empty:
        return math.inf
    worst = 0.0
    mids = B._gap_mids
    for a0, a1 in A.intervals:
        # the farthest points of [a0, a1] from B are its ends or midpoints of B's gaps
        lo, hi = bisect.bisect_right(mids, a0), bisect.bisect_left(mids, a1)
        for s in (a0, a1, *mids[lo:hi]):
            if math.isinf(s):
                if not any(math.isinf(e) and e == s for iv in B.intervals for e in iv):
                    return math.inf
                continue
            worst = max(worst, B.distance_to(s))
    return worst


def radial_hausdorff(r1: RadialSet, r2: RadialSet) -> float:
    """Hausdorff distance in the ``s`` coordinate; ``inf`` if exactly one set is empty."""
    if r1.is_empty and r2.is_empty:
        return 0.0
    if r1.is_empty or r2.is_empty:
        return math.inf
    return max(_sup_distance(r1, r2), _sup_distance(r2, r1))


def radial_preimage(m: Monomial, r: RadialSet) -> RadialSet:
    if not isinstance(m, Monomial):
        raise UnsupportedMap(f"radial preimage needs a monomial, got {type(m).__name__}")
    d, lc = m.degree, m.log_coeff
    return RadialSet.of(((a - lc) / d, (b - lc) / d) for a, b in r.intervals)


def _check_contracting(maps) -> None:
    for m in maps:
        if not isinstance(m, Monomial):
            raise UnsupportedMap(f"exact Julia sets need monomials, got {type(m).__name__}")
        if m.degree < 2:
            raise UnsupportedMap(f"degree {m.degree} < 2 has no contracting inverse")


def fixed_point(m: Monomial) -> float:
    """The log-radius of the invariant circle of ``m``."""
    return -m.log_coeff / (m.degree - 1)


def _step(parts: Sequence[tuple[Monomial, RadialSet]], tol: float) -> RadialSet:
    ivs = []
    for m, r in parts:
        d, lc = m.degree, m.log_coeff
        ivs.extend(((a - lc) / d, (b - lc) / d) for a, b in r.intervals)
    if len(ivs) > MAX_INTERVALS:
        raise ResourceError(f"attractor refinement needs more than {MAX_INTERVALS} intervals")
    # gaps below tol are merged; this keeps the interval count bounded
    return RadialSet.of(ivs, merge=max(MERGE_TOL, tol))


def semigroup_julia_radial(maps: Iterable[Monomial], tol: float = DEFAULT_TOL) -> RadialSet:
    """Julia set of the semigroup generated by monomials, as a radial set.

    Iterates the inverse system from the bracket spanned by the fixed points
    until successive iterates are within ``tol`` in Hausdorff distance.
    """
    maps = list(dict.fromkeys(maps))
    if not maps:
        raise InvalidArgument("need at least one map")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    _check_contracting(maps)
    fps = [fixed_point(m) for m in maps]
    current = RadialSet(((min(fps), max(fps)),))
    for _ in range(MAX_SWEEPS):
        nxt = _step([(m, current) for m in maps], tol)
        if radial_hausdorff(nxt, current) < tol:
            return nxt
        current = nxt
    raise ResourceError("attractor iteration did not settle")


def _class_edges(spec: ScenarioSpec) -> dict[str, list[tuple[Monomial, str]]]:
    rc = spec.radial_classes
    if rc is None:
        raise ConfigurationError(f"scenario {spec.name} declares no radial classes")
    edges = {}
    for c in rc.classes:
        out = []
        for x, succ in c.edges:
            rc.get(succ)
            maps = spec.maps(x)
            _check_contracting(maps)
            out.extend((m, succ) for m in maps)
        if not out:
            raise ConfigurationError(f"class {c.name} has no outgoing edges")
        edges[c.name] = out
    return edges


@lru_cache(maxsize=64)
def _statewise(spec: ScenarioSpec, tol: float) -> tuple:
    edges = _class_edges(spec)
    validate_classes(spec)
    fps = [fixed_point(m) for es in edges.values() for m, _ in es]
    bracket = RadialSet(((min(fps), max(fps)),))
    sets = {name: bracket for name in edges}
    for _ in range(MAX_SWEEPS):
        nxt = {name: _step([(m, sets[succ]) for m, succ in es], tol) for name, es in edges.items()}
        moved = max(radial_hausdorff(nxt[n], sets[n]) for n in edges)
        sets = nxt
        if moved < tol:
            break
    else:
        raise ResourceError("graph-directed attractor iteration did not settle")
    for name, es in edges.items():
        if len(es) == 1 and es[0][1] == name:
            # a lone self-loop has the invariant circle in closed form
            sets[name] = RadialSet.point(fixed_point(es[0][0]))
    return tuple((n, sets[n]) for n in spec.radial_classes.names())


def statewise_julia_radial(spec: ScenarioSpec, tol: float = DEFAULT_TOL) -> dict[str, RadialSet]:
    """Statewise Julia set of every declared radial class."""
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    return dict(_statewise(spec, float(tol)))


# -- kernel Julia sets ----------------------------------------------------------------


@dataclass(frozen=True)
class KernelCertificate:
    """``kind`` is ``EmptyAtDepth``, ``ExactNonempty`` or ``UnknownSuperset``."""

    kind: str
    depth: int | None = None
    radial: RadialSet | None = None

    @property
    def is_empty(self) -> bool:
        return self.kind == "EmptyAtDepth"

    def to_json(self) -> dict:
        d = {"verdict": self.kind}
        if self.depth is not None:
            d["depth"] = self.depth
        if self.radial is not None:
            d["log_radius_intervals"] = [list(iv) for iv in self.radial.intervals]
            d["radii"] = [list(r) for r in self.radial.radii()]
        return d

    def __str__(self):
        if self.kind == "EmptyAtDepth":
            return f"EmptyAtDepth({self.depth})"
        if self.kind == "ExactNonempty":
            return f"ExactNonempty({self.radial.format_radii()})"
        return f"UnknownSuperset({self.radial.format_radii()}, depth={self.depth})"


def kernel_julia_depth(spec: ScenarioSpec, w, depth: int, tol: float = DEFAULT_TOL,
                       cap: int = WORD_CAP) -> KernelCertificate:
    """Certify emptiness of the kernel Julia set at ``w`` from words of length <= depth."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    spec.space.check(w)
    julia = statewise_julia_radial(spec, tol)
    rc = spec.radial_classes
    cls = rc.get(spec.classify(w))
    if len(cls.edges) == 1 and cls.edges[0][1] == cls.name and len(spec.tau[cls.edges[0][0]]) == 1:
        # deterministic absorbing: the kernel is the single map's invariant circle
        m = spec.tau[cls.edges[0][0]][0][0]
        return KernelCertificate("ExactNonempty", radial=RadialSet.point(fixed_point(m)))

    current: RadialSet | None = None
    order = [(w, Monomial(1.0, 1))]
    for k in range(1, depth + 1):
        nxt_order = []
        nxt_seen = set()
        for v, comp in order:
            probs = _probs(spec, v)
            for x, p in enumerate(probs):
                if p <= 0:
                    continue
                v2 = spec.update(spec.space, v, x)
                for m, _ in spec.tau[x]:
                    c2 = compose_monomials([m, comp]) if comp.degree > 1 else m
                    key = (v2, c2)
                    if key not in nxt_seen:
                        nxt_seen.add(key)
                        nxt_order.append(key)
            if len(nxt_order) > cap:
                raise ResourceError(f"kernel word tree exceeds {cap} branches at depth {k}")
        order = nxt_order
        for v2, c2 in order:
            pre = radial_preimage(c2, julia[rc.classify(spec.space, v2)])
            current = pre if current is None else current.intersect(pre, tol)
            if current.is_empty:
                return KernelCertificate("EmptyAtDepth", depth=k)
    return KernelCertificate("UnknownSuperset", depth=depth, radial=current)


# -- Julia sets along a path ------------------------------------------------------------


def path_julia_radius(bits: Callable[[int], Monomial] | Sequence[Monomial], depth: int,
                      coeff_bound: float | None = None) -> tuple[float, float]:
    """Log-radius ``t`` of the circle ``J_xi`` along a monomial path.

    ``bits`` gives the map used at step ``k = 1, 2, ...`` (callable) or is a
    sequence of at least ``depth`` maps.  Returns ``(t, error_bound)`` where
    the bound covers the truncated tail of the series.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    if not callable(bits):
        seq = list(bits)
        if len(seq) < depth:
            raise InvalidArgument(f"path has {len(seq)} maps, need {depth}")
        bits = lambda k, _s=seq: _s[k - 1]  # noqa: E731
    t = 0.0
    log_scale = 0.0  # log of d_1 ... d_k
    bound = 0.0
    dmin = math.inf
    for k in range(1, depth + 1):
        m = bits(k)
        _check_contracting([m])
        log_scale += math.log(m.degree)
        t -= m.log_coeff * math.exp(-log_scale)
        bound = max(bound, abs(m.log_coeff))
        dmin = min(dmin, m.degree)
    if coeff_bound is not None:
        bound = coeff_bound
    return t, bound * math.exp(-log_scale) / (dmin - 1)
