"""Builtin update and transition families.

Only closed-form families are supported so that ``u`` and ``P`` stay exactly
evaluable.  Each rule is an immutable dataclass with a ``family`` name and a
``to_config``/``from_config`` pair used by the scenario file reader.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError, DomainError
from .maps import INF, apply_map, format_map, is_inf, parse_map
from .states import Discrete, Ladder, Real, SpherePoint, StateSpace, to_fraction

# -- helpers for the key=value text form -----------------------------------------------


def _pairs(text: str) -> list[tuple[str, str]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "->" not in item:
            raise ConfigurationError(f"expected 'a -> b' in {item!r}")
        a, b = item.split("->", 1)
        out.append((a.strip(), b.strip()))
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


# -- update families -------------------------------------------------------------------


@dataclass(frozen=True)
class LadderUpdate:
    """``1/n -> 1/(n+1)`` under ``advance``; other indices jump to fixed targets.

    Zero and the extra points are fixed by ``advance``.  An index with no
    declared jump leaves the state unchanged.
    """

    advance: int
    jumps: tuple = ()  # ((index, Ladder), ...)

    family = "ladder"

    def __call__(self, space: StateSpace, w, x: int):
        if x == self.advance:
            if w.label or w.n == 0:
                return w
            return Ladder(w.n + 1)
        for idx, target in self.jumps:
            if idx == x:
                return target
        return w

    def repeated_limit(self, space, w, x):
        """Limit of ``w`` under infinitely many copies of ``x``."""
        if x == self.advance:
            return w if (w.label or w.n == 0) else Ladder(0)
        return self(space, w, x)

    def to_config(self, names):
        return {
            "advance": names[self.advance],
            "jumps": ", ".join(f"{names[i]} -> {t}" for i, t in self.jumps),
        }

    @classmethod
    def from_config(cls, sec, names, space):
        jumps = tuple((names.index(a), space.parse(b)) for a, b in _pairs(sec.get("jumps", "")))
        return cls(names.index(sec["advance"]), jumps)


@dataclass(frozen=True)
class ClampAffineUpdate:
    """``p -> clamp((1-alpha) p + alpha v_x, lo, hi)`` with optional grid rounding.

    ``targets[x]`` is the point ``v_x`` that index ``x`` pulls toward.  With a
    ``step`` the result is rounded to the nearest point of ``lo + k*step``
    (ties round up).
    """

    alpha: Fraction
    targets: tuple
    lo: Fraction
    hi: Fraction
    step: Fraction | None = None

    family = "clamp-affine"

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_fraction(self.alpha))
        object.__setattr__(self, "targets", tuple(to_fraction(t) for t in self.targets))
        object.__setattr__(self, "lo", to_fraction(self.lo))
        object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.step is not None:
            object.__setattr__(self, "step", to_fraction(self.step))
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")

    def _raw(self, p: Fraction, x: int) -> Fraction:
        v = (1 - self.alpha) * p + self.alpha * self.targets[x]
        v = min(max(v, self.lo), self.hi)
        if self.step is not None:
            k = math.floor((v - self.lo) / self.step + Fraction(1, 2))
            v = min(self.lo + k * self.step, self.hi)
        return v

    def __call__(self, space, w, x):
        return Real(self._raw(w.value, x))

    def repeated_limit(self, space, w, x):
        if self.step is None:
            return Real(min(max(self.targets[x], self.lo), self.hi))
        p = w.value
        for _ in range(100_000):
            q = self._raw(p, x)
            if q == p:
                return Real(p)
            p = q
        return None

    def to_config(self, names):
        d = {
            "alpha": str(self.alpha),
            "targets": ", ".join(f"{n} -> {t}" for n, t in zip(names, self.targets)),
        }
        if self.step is not None:
            d["step"] = str(self.step)
        return d

    @classmethod
    def from_config(cls, sec, names, space):
        tmap = dict(_pairs(sec["targets"]))
        targets = tuple(to_fraction(tmap[n]) for n in names)
        step = sec.get("step")
        return cls(to_fraction(sec["alpha"]), targets, space.lo, space.hi,
                   to_fraction(step) if step else None)


@dataclass(frozen=True)
class TableUpdate:
    """Explicit ``(state label, index) -> state label`` table on a discrete space."""

    table: tuple  # ((label, index, label), ...)

    family = "absorbing-table"

    def __post_init__(self):
        object.__setattr__(self, "_lookup", {(a, x): b for a, x, b in self.table})

    def __call__(self, space, w, x):
        return Discrete(self._lookup.get((w.label, x), w.label))

    def repeated_limit(self, space, w, x):
        seen = {w}
        while True:
            nxt = self(space, w, x)
            if nxt == w:
                return w
            if nxt in seen:
                return None
            seen.add(nxt)
            w = nxt

    def to_config(self, names):
        return {"table": ", ".join(f"{a} {names[x]} -> {b}" for a, x, b in self.table)}

    @classmethod
    def from_config(cls, sec, names, space):
        rows = []
        for lhs, b in _pairs(sec["table"]):
            a, xname = lhs.split()
            rows.append((a, names.index(xname), b))
        return cls(tuple(rows))


@dataclass(frozen=True)
class FeedbackUpdate:
    """The state is the sphere point itself: ``u(y, x) = f_x(y)``."""

    maps: tuple

    family = "feedback"

    def __call__(self, space, w, x):
        return SpherePoint(apply_map(self.maps[x], w.value))

    def repeated_limit(self, space, w, x):
        return None

    def to_config(self, names):
        return {"maps": "; ".join(format_map(m) for m in self.maps)}

    @classmethod
    def from_config(cls, sec, names, space):
        return cls(tuple(parse_map(t) for t in sec["maps"].split(";")))


# -- transition families ---------------------------------------------------------------


@dataclass(frozen=True)
class LadderTransition:
    """``P(1/n, advance) = 1 - base**(-n**power)``, the rest on ``other``.

    ``power = -1`` gives ``1 - 2**(-1/n)``; ``power = 1`` gives ``1 - 2**(-n)``.
    The point 0 always advances.  Extra points use an explicit row.
    """

    advance: int
    other: int
    power: int = -1
    base: float = 2.0
    extras: tuple = ()  # ((label, (p_0, p_1, ...)), ...)

    family = "ladder"

    def __call__(self, space, w, k: int):
        probs = [0.0] * k
        if w.label:
            row = dict(self.extras).get(w.label)
            if row is None:
                raise DomainError(f"no transition row for extra state {w.label!r}")
            return list(row)
        if w.n == 0:
            probs[self.advance] = 1.0
            return probs
        e = float(w.n) ** self.power * math.log(self.base)
        probs[self.advance] = -math.expm1(-e)
        probs[self.other] = math.exp(-e)
        return probs

    def to_config(self, names):
        d = {"advance": names[self.advance], "other": names[self.other],
             "power": str(self.power), "base": repr(self.base)}
        for label, row in self.extras:
            d[f"extra.{label}"] = ", ".join(repr(p) for p in row)
        return d

    @classmethod
    def from_config(cls, sec, names, space):
        extras = tuple((key[len("extra."):], _floats(val)) for key, val in sec.items()
                       if key.startswith("extra."))
        return cls(names.index(sec["advance"]), names.index(sec["other"]),
                   int(sec.get("power", "-1")), float(sec.get("base", "2")), extras)


@dataclass(frozen=True)
class LinearTransition:
    """``P(p, one) = p`` and ``P(p, zero) = 1 - p`` (reinforcement schemes)."""

    one: int
    zero: int

    family = "linear"

    def __call__(self, space, w, k):
        probs = [0.0] * k
        p = w.value
        probs[self.one] = float(p)
        probs[self.zero] = float(1 - p)
        return probs

    def to_config(self, names):
        return {"one": names[self.one], "zero": names[self.zero]}

    @classmethod
    def from_config(cls, sec, names, space):
        return cls(names.index(sec["one"]), names.index(sec["zero"]))


@dataclass(frozen=True)
class TableTransition:
    rows: tuple  # ((label, (p_0, ...)), ...)

    family = "absorbing-table"

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(self.rows))

    def __call__(self, space, w, k):
        try:
            return list(self._lookup[w.label])
        except KeyError:
            raise DomainError(f"no transition row for state {w.label!r}") from None

    def to_config(self, names):
        return {f"row.{label}": ", ".join(repr(p) for p in row) for label, row in self.rows}

    @classmethod
    def from_config(cls, sec, names, space):
        rows = tuple((key[len("row."):], _floats(val)) for key, val in sec.items()
                     if key.startswith("row."))
        return cls(rows)


@dataclass(frozen=True)
class ThetaTransition:
    """Feedback selection ``P(y, first) = theta(y)``, ``P(y, second) = 1 - theta(y)``.

    theta families, all functions of ``r = |y|``:
      ``constant c``; ``affine a b`` = clip(a + b r, 0, 1);
      ``bump h r0 sigma`` = h exp(-(r - r0)^2 / sigma^2), zero at infinity.
    """

    first: int
    second: int
    theta: str
    params: tuple

    family = "feedback-theta"

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        expected = {"constant": 1, "affine": 2, "bump": 3}
        if self.theta not in expected or len(self.params) != expected[self.theta]:
            raise ConfigurationError(f"bad theta family {self.theta} {self.params}")
        if self.theta == "constant" and not 0 <= self.params[0] <= 1:
            raise ConfigurationError("constant theta must lie in [0, 1]")
        if self.theta == "bump" and not (0 <= self.params[0] <= 1 and self.params[2] > 0):
            raise ConfigurationError("bump theta needs 0 <= h <= 1 and sigma > 0")

    def value(self, y: complex) -> float:
        r = math.inf if is_inf(y) else abs(y)
        if self.theta == "constant":
            return self.params[0]
        if self.theta == "affine":
            a, b = self.params
            t = a if b == 0 else a + b * r
            return min(max(t, 0.0), 1.0)
        h, r0, sigma = self.params
        if math.isinf(r):
            return 0.0
        return h * math.exp(-((r - r0) / sigma) ** 2)

    def __call__(self, space, w, k):
        probs = [0.0] * k
        t = self.value(w.value)
        probs[self.first] = t
        probs[self.second] = 1.0 - t
        return probs

    def to_config(self, names):
        return {"first": names[self.first], "second": names[self.second],
                "theta": " ".join([self.theta] + [repr(p) for p in self.params])}

    @classmethod
    def from_config(cls, sec, names, space):
        parts = sec["theta"].split()
        return cls(names.index(sec["first"]), names.index(sec["second"]), parts[0],
                   tuple(float(p) for p in parts[1:]))


UPDATE_FAMILIES = {c.family: c for c in (LadderUpdate, ClampAffineUpdate, TableUpdate, FeedbackUpdate)}
TRANSITION_FAMILIES = {c.family: c for c in (LadderTransition, LinearTransition, TableTransition,
                                             ThetaTransition)}

__all__ = [
    "INF", "LadderUpdate", "ClampAffineUpdate", "TableUpdate", "FeedbackUpdate",
    "LadderTransition", "LinearTransition", "TableTransition", "ThetaTransition",
    "UPDATE_FAMILIES", "TRANSITION_FAMILIES",
]
