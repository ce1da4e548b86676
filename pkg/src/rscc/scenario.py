"""Random systems with complete connections: specification, words, chains, paths.

A ``ScenarioSpec`` bundles the state space ``W``, a finite index set ``X``,
the update map ``u``, the transition function ``P`` and, per index, a
finite-support distribution ``tau[x]`` over maps.  All operations here are
pure functions of the spec, their arguments and (for sampling) the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from . import rng
from .errors import ConfigurationError, DomainError, InvalidArgument, ResourceError
from .maps import MapSpec, acts_on_sphere, is_open
from .rules import TableTransition, TableUpdate
from .states import Discrete, Ladder, StateSpace, to_fraction

WORD_CAP = 10**6
PROB_TOL = 1e-12

Word = tuple  # tuple of index ids


@dataclass(frozen=True)
class RadialClass:
    """A behaviour class of states sharing the same admissible one-step future.

    ``member`` is a predicate: ``ladder`` (states 1/n, n >= 1), ``point v``,
    ``open lo hi``, ``closed lo hi``, ``label name`` or ``any``.
    ``edges`` lists ``(index, successor class)``; every map in ``tau[index]``
    is implied.
    """

    name: str
    member: str
    representative: object
    edges: tuple

    def matches(self, space: StateSpace, w) -> bool:
        kind, *args = self.member.split()
        if kind == "any":
            return True
        if kind == "ladder":
            return isinstance(w, Ladder) and not w.label and w.n >= 1
        if kind == "label":
            return str(w) == args[0]
        if kind == "point":
            if isinstance(w, Ladder) and w.label:
                return w.label == args[0]
            q = space.exact_coord(w)
            return q is not None and q == to_fraction(args[0])
        q = space.exact_coord(w)
        if q is None:
            return False
        lo, hi = to_fraction(args[0]), to_fraction(args[1])
        if kind == "open":
            return lo < q < hi
        if kind == "closed":
            return lo <= q <= hi
        raise ConfigurationError(f"unknown class predicate {self.member!r}")


@dataclass(frozen=True)
class RadialClasses:
    classes: tuple

    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    def get(self, name: str) -> RadialClass:
        for c in self.classes:
            if c.name == name:
                return c
        raise ConfigurationError(f"unknown radial class {name!r}")

    def classify(self, space: StateSpace, w) -> str:
        for c in self.classes:
            if c.matches(space, w):
                return c.name
        raise ConfigurationError(f"state {w} belongs to no declared radial class")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    space: StateSpace
    indices: tuple
    update: object
    transition: object
    tau: tuple  # per index: ((map, weight), ...)
    radial_classes: RadialClasses | None = None
    params: tuple = field(default=(), compare=False)  # provenance only

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "tau", tuple(tuple((m, float(p)) for m, p in row) for row in self.tau))
        if len(set(self.indices)) != len(self.indices) or not self.indices:
            raise ConfigurationError("index names must be distinct and nonempty")
        if len(self.tau) != len(self.indices):
            raise ConfigurationError("need one map distribution per index")
        for name, row in zip(self.indices, self.tau):
            if not row:
                raise ConfigurationError(f"tau[{name}] has empty support")
            if any(p <= 0 for _, p in row):
                raise ConfigurationError(f"tau[{name}] has a non-positive weight")
            if abs(sum(p for _, p in row) - 1.0) > PROB_TOL:
                raise ConfigurationError(f"tau[{name}] weights do not sum to 1")

    def index_of(self, name: str) -> int:
        try:
            return self.indices.index(name)
        except ValueError:
            raise InvalidArgument(f"unknown index {name!r}; known: {', '.join(self.indices)}") from None

    def maps(self, x: int) -> tuple:
        return tuple(m for m, _ in self.tau[x])

    def parse_state(self, text: str):
        return self.space.parse(text)

    @property
    def on_sphere(self) -> bool:
        return all(acts_on_sphere(m) for row in self.tau for m, _ in row)

    @property
    def all_open(self) -> bool:
        return all(is_open(m) for row in self.tau for m, _ in row)

    def classify(self, w) -> str:
        if self.radial_classes is None:
            raise ConfigurationError(f"scenario {self.name} declares no radial classes")
        return self.radial_classes.classify(self.space, w)


@dataclass(frozen=True)
class PathSample:
    indices: Word
    maps: tuple
    states: tuple
    seed: int
    log_prob: float
    stream: int = 0

    def __len__(self):
        return len(self.indices)


# -- one-step primitives ---------------------------------------------------------------


def _check_index(spec: ScenarioSpec, x) -> int:
    if not isinstance(x, int) or not 0 <= x < len(spec.indices):
        raise InvalidArgument(f"index {x!r} is not an index of scenario {spec.name}")
    return x


def update_state(spec: ScenarioSpec, w, x: int):
    _check_index(spec, x)
    spec.space.check(w)
    out = spec.update(spec.space, w, x)
    spec.space.check(out)
    return out


def _probs(spec: ScenarioSpec, w) -> list[float]:
    spec.space.check(w)
    return spec.transition(spec.space, w, len(spec.indices))


def transition_probs(spec: ScenarioSpec, w) -> list[tuple[int, float]]:
    probs = _probs(spec, w)
    if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > PROB_TOL:
        raise DomainError(f"transition row at {w} is not a probability vector: {probs}")
    return list(enumerate(probs))


def cylinder_prob(spec: ScenarioSpec, w, word: Sequence[int]) -> float:
    """Chain-rule probability of the cylinder ``[x_1, ..., x_n]`` from ``w``."""
    for x in word:
        _check_index(spec, x)
    p = 1.0
    for x in word:
        q = _probs(spec, w)[x]
        if q <= 0:
            return 0.0
        p *= q
        w = spec.update(spec.space, w, x)
    return p


def _check_cap(spec: ScenarioSpec, n: int, cap: int) -> None:
    if len(spec.indices) ** n > cap:
        raise ResourceError(f"|X|^n = {len(spec.indices)}^{n} exceeds the cap {cap}")


def iter_admissible(spec: ScenarioSpec, w, n: int) -> Iterator[tuple[Word, float, object]]:
    """Yield ``(word, cylinder probability, end state)`` in lexicographic order."""
    stack = [((), 1.0, w)]
    # depth-first, pushing children in reverse so the smallest id pops first
    while stack:
        word, p, v = stack.pop()
        if len(word) == n:
            yield word, p, v
            continue
        probs = _probs(spec, v)
        for x in reversed(range(len(probs))):
            if probs[x] > 0:
                stack.append((word + (x,), p * probs[x], spec.update(spec.space, v, x)))


def admissible_words(spec: ScenarioSpec, w, n: int, cap: int = WORD_CAP) -> list[Word]:
    if n < 1:
        raise InvalidArgument("word length must be >= 1")
    spec.space.check(w)
    _check_cap(spec, n, cap)
    return [word for word, _, _ in iter_admissible(spec, w, n)]


def dedup_states(space: StateSpace, states) -> list:
    ordered = sorted(set(states), key=space.sort_key)
    out: list = []
    for s in ordered:
        if out and space.same(out[-1], s):
            continue
        out.append(s)
    return out


def reachable_states(spec: ScenarioSpec, w, depth: int, cap: int = WORD_CAP) -> list:
    """``{w x^(k) : x^(k) admissible, 1 <= k <= depth}``, sorted by the space's order."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    spec.space.check(w)
    seen: set = set()
    frontier = {w}
    visited = 0
    for _ in range(depth):
        nxt = set()
        for v in frontier:
            probs = _probs(spec, v)
            for x, p in enumerate(probs):
                if p > 0:
                    nxt.add(spec.update(spec.space, v, x))
        visited += len(nxt)
        if visited > cap:
            raise ResourceError(f"reachable-state search visited more than {cap} states")
        frontier = nxt - seen
        seen |= nxt
        if not frontier:
            break
    return dedup_states(spec.space, seen)


# -- sampling --------------------------------------------------------------------------

_LANE_INDEX = 0
_LANE_MAP = 1


def sample_chain(spec: ScenarioSpec, w, n: int, seed: int, stream: int = 0):
    """Draw ``(word, states)`` with ``states[k+1] = u(states[k], word[k])``."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    spec.space.check(w)
    word, states = [], [w]
    for k in range(n):
        x = rng.choose(_probs(spec, w), rng.uniform(seed, stream, k, _LANE_INDEX))
        w = spec.update(spec.space, w, x)
        word.append(x)
        states.append(w)
    return tuple(word), tuple(states)


def sample_path_with_maps(spec: ScenarioSpec, w, n: int, seed: int, stream: int = 0) -> PathSample:
    """A draw from the path measure truncated to ``n`` steps."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    spec.space.check(w)
    word, maps, states = [], [], [w]
    log_prob = 0.0
    for k in range(n):
        probs = _probs(spec, w)
        x = rng.choose(probs, rng.uniform(seed, stream, k, _LANE_INDEX))
        row = spec.tau[x]
        j = rng.choose([p for _, p in row], rng.uniform(seed, stream, k, _LANE_MAP))
        log_prob += math.log(probs[x]) + math.log(row[j][1])
        w = spec.update(spec.space, w, x)
        word.append(x)
        maps.append(row[j][0])
        states.append(w)
    return PathSample(tuple(word), tuple(maps), tuple(states), seed, log_prob, stream)


def forced_path(spec: ScenarioSpec, w, word: Sequence[int], maps: Sequence[MapSpec] | None = None) -> PathSample:
    """The path along a prescribed word (and map choices, default the first support map)."""
    states = [w]
    log_prob = 0.0
    chosen = []
    for k, x in enumerate(word):
        _check_index(spec, x)
        p = _probs(spec, states[-1])[x]
        if p <= 0:
            raise InvalidArgument(f"word is inadmissible at step {k}")
        m = spec.tau[x][0][0] if maps is None else maps[k]
        weight = dict((mm, q) for mm, q in spec.tau[x]).get(m)
        if weight is None:
            raise InvalidArgument(f"map {m} is not in the support of tau[{spec.indices[x]}]")
        log_prob += math.log(p) + math.log(weight)
        chosen.append(m)
        states.append(spec.update(spec.space, states[-1], x))
    return PathSample(tuple(word), tuple(chosen), tuple(states), 0, log_prob)


# -- graph directed Markov systems -----------------------------------------------------


def embed_gdms(vertex_count: int, edge_measures: dict, name: str = "gdms") -> ScenarioSpec:
    """Realise a finite GDMS as an RSCC on the vertex set.

    ``edge_measures`` maps ``(i, j)`` (vertices numbered from 1) to a sequence
    of ``(map, mass)``.  Edges of zero total mass are dropped.
    """
    if vertex_count < 1:
        raise InvalidArgument("need at least one vertex")
    labels = tuple(str(i) for i in range(1, vertex_count + 1))
    totals = {}
    for (i, j), dist in edge_measures.items():
        if not (1 <= i <= vertex_count and 1 <= j <= vertex_count):
            raise InvalidArgument(f"edge ({i}, {j}) has a vertex outside 1..{vertex_count}")
        masses = [float(m) for _, m in dist]
        if any(m < 0 for m in masses):
            raise InvalidArgument(f"edge ({i}, {j}) has a negative mass")
        totals[(i, j)] = sum(masses)
    for i in range(1, vertex_count + 1):
        row = sum(t for (a, _), t in totals.items() if a == i)
        if abs(row - 1.0) > PROB_TOL:
            raise InvalidArgument(f"masses leaving vertex {i} sum to {row}, not 1")
    edges = sorted(e for e, t in totals.items() if t > 0)
    names = tuple(f"e{i}_{j}" for i, j in edges)
    tau = []
    for e in edges:
        merged: dict = {}
        for m, mass in edge_measures[e]:
            if mass > 0:
                merged[m] = merged.get(m, 0.0) + float(mass)
        total = totals[e]
        tau.append(tuple((m, q / total) for m, q in merged.items()))
    table = []
    rows = []
    for v in range(1, vertex_count + 1):
        probs = []
        for k, (i, j) in enumerate(edges):
            if i == v:
                table.append((str(v), k, str(j)))
                probs.append(totals[(i, j)])
            else:
                probs.append(0.0)
        rows.append((str(v), tuple(probs)))
    space = StateSpace("discrete", labels=labels)
    spec = ScenarioSpec(name, space, names, TableUpdate(tuple(table)), TableTransition(tuple(rows)),
                        tuple(tau))
    return with_discrete_classes(spec)


def with_discrete_classes(spec: ScenarioSpec) -> ScenarioSpec:
    """Attach one radial class per state of a finite discrete scenario."""
    if not spec.space.is_discrete:
        raise InvalidArgument("automatic classes need a discrete state space")
    classes = []
    for label in spec.space.labels:
        w = Discrete(label)
        probs = _probs(spec, w)
        edges = tuple((x, str(spec.update(spec.space, w, x))) for x, p in enumerate(probs) if p > 0)
        classes.append(RadialClass(label, f"label {label}", w, edges))
    return ScenarioSpec(spec.name, spec.space, spec.indices, spec.update, spec.transition,
                        spec.tau, RadialClasses(tuple(classes)), spec.params)


def validate_classes(spec: ScenarioSpec, depth: int = 6, max_states: int = 20_000) -> None:
    """Check the declared radial classes against the actual one-step structure.

    Every state reachable within ``depth`` from a class representative must
    have exactly its class's declared ``(index, successor class)`` edges.
    """
    rc = spec.radial_classes
    if rc is None:
        raise ConfigurationError(f"scenario {spec.name} declares no radial classes")
    seen = set()
    frontier = []
    for c in rc.classes:
        spec.space.check(c.representative)
        if rc.classify(spec.space, c.representative) != c.name:
            raise ConfigurationError(f"representative {c.representative} is not in class {c.name}")
        frontier.append(c.representative)
    for _ in range(depth + 1):
        nxt = []
        for v in frontier:
            if v in seen:
                continue
            seen.add(v)
            cname = rc.classify(spec.space, v)
            probs = _probs(spec, v)
            actual = {(x, rc.classify(spec.space, spec.update(spec.space, v, x)))
                      for x, p in enumerate(probs) if p > 0}
            declared = set(rc.get(cname).edges)
            if actual != declared:
                raise ConfigurationError(
                    f"state {v} in class {cname}: admissible edges {sorted(actual)} "
                    f"differ from declared {sorted(declared)}")
            nxt.extend(spec.update(spec.space, v, x) for x, p in enumerate(probs) if p > 0)
        if len(seen) > max_states:
            break
        frontier = nxt
