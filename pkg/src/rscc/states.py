"""State points and the state spaces that house them."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError, InvalidArgument
from .maps import INF, chordal_distance

# tie rule for real-valued states
STATE_TOL = 1e-12


@dataclass(frozen=True)
class Discrete:
    label: str

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Real:
    """A point of a closed real interval; values are kept as exact fractions."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_fraction(self.value))

    def __str__(self):
        v = self.value
        if v.denominator == 1:
            return str(v.numerator)
        if v.denominator.bit_length() > 40:
            # long dyadic tails are unreadable as fractions
            return repr(float(v))
        return f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class Ladder:
    """The point ``1/n`` of ``{0} u {1/n}``; ``n = 0`` is the point 0.

    A nonempty ``label`` denotes one of the space's distinguished extra
    points (for instance the absorbing state ``2``); ``n`` is then ignored.
    """

    n: int = 0
    label: str = ""

    def __str__(self):
        if self.label:
            return self.label
        return "0" if self.n == 0 else ("1" if self.n == 1 else f"1/{self.n}")


@dataclass(frozen=True)
class SpherePoint:
    """A state that is itself a point of the Riemann sphere (feedback systems)."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        object.__setattr__(self, "value", INF if cmath.isinf(v) else v)

    def __str__(self):
        return "inf" if cmath.isinf(self.value) else repr(self.value).strip("()")


StatePoint = Union[Discrete, Real, Ladder, SpherePoint]


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidArgument(f"non-finite real state {x}")
        return Fraction(x)
    raise InvalidArgument(f"cannot read {x!r} as a real number")


@dataclass(frozen=True)
class StateSpace:
    """Descriptor of the state space ``W`` and its metric.

    kinds: ``discrete`` (labels, 0/1 metric), ``real`` (closed interval
    ``[lo, hi]``), ``ladder`` (``{0} u {1/n}`` plus named extra points with
    numeric positions), ``sphere`` (chordal metric).
    """

    kind: str
    labels: tuple = ()
    lo: Fraction | None = None
    hi: Fraction | None = None
    extras: tuple = ()  # ((label, Fraction), ...) for ladder spaces

    def __post_init__(self):
        if self.kind not in ("discrete", "real", "ladder", "sphere"):
            raise InvalidArgument(f"unknown state-space kind {self.kind!r}")
        if self.kind == "real":
            lo, hi = to_fraction(self.lo), to_fraction(self.hi)
            if lo > hi:
                raise InvalidArgument("state interval has lo > hi")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        if self.kind == "discrete" and not self.labels:
            raise InvalidArgument("discrete state space needs labels")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "extras", tuple((str(k), to_fraction(v)) for k, v in self.extras))

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    def contains(self, w) -> bool:
        if self.kind == "discrete":
            return isinstance(w, Discrete) and w.label in self.labels
        if self.kind == "real":
            return isinstance(w, Real) and self.lo <= w.value <= self.hi
        if self.kind == "ladder":
            if not isinstance(w, Ladder):
                return False
            if w.label:
                return any(w.label == k for k, _ in self.extras)
            return w.n >= 0
        return isinstance(w, SpherePoint)

    def check(self, w) -> None:
        if not self.contains(w):
            raise DomainError(f"state {w!r} is not in the {self.kind} state space")

    def coord(self, w) -> float:
        """Numeric embedding used by the metric and by ``StateCoord`` test functions."""
        if isinstance(w, Real):
            return float(w.value)
        if isinstance(w, Ladder):
            if w.label:
                return float(dict(self.extras)[w.label])
            return 0.0 if w.n == 0 else 1.0 / w.n
        if isinstance(w, Discrete):
            return float(self.labels.index(w.label))
        if isinstance(w, SpherePoint):
            return abs(w.value)
        raise DomainError(f"no coordinate for {w!r}")

    def exact_coord(self, w) -> Fraction | None:
        if isinstance(w, Real):
            return w.value
        if isinstance(w, Ladder):
            if w.label:
                return dict(self.extras)[w.label]
            return Fraction(0) if w.n == 0 else Fraction(1, w.n)
        return None

    def distance(self, a, b) -> float:
        if self.kind == "discrete":
            return 0.0 if a == b else 1.0
        if self.kind == "sphere":
            return chordal_distance(a.value, b.value)
        ea, eb = self.exact_coord(a), self.exact_coord(b)
        return float(abs(ea - eb))

    def same(self, a, b) -> bool:
        """State equality with the real-valued tie rule."""
        if a == b:
            return True
        if self.kind in ("real", "sphere"):
            return self.distance(a, b) <= STATE_TOL
        return False

    def parse(self, text: str):
        t = str(text).strip()
        if self.kind == "discrete":
            w = Discrete(t)
        elif self.kind == "real":
            w = Real(to_fraction(t))
        elif self.kind == "ladder":
            if any(t == k for k, _ in self.extras):
                w = Ladder(label=t)
            else:
                q = to_fraction(t)
                if q == 0:
                    w = Ladder(0)
                elif q.numerator == 1 and q.denominator >= 1:
                    w = Ladder(q.denominator)
                else:
                    raise DomainError(f"{t!r} is not 0, 1/n, or an extra point of the ladder")
        else:
            w = SpherePoint(INF if t.lower() in ("inf", "oo") else complex(t.replace("i", "j")))
        self.check(w)
        return w

    def sort_key(self, w):
        if self.kind == "discrete":
            return (self.labels.index(w.label),)
        if self.kind == "sphere":
            v = w.value
            return (abs(v), cmath.phase(v) if not cmath.isinf(v) else 0.0)
        return (self.exact_coord(w), str(w))
