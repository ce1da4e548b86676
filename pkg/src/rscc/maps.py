"""Map families acting on the Riemann sphere or on a real interval.

Sphere points are plain Python ``complex`` values; the point at infinity is
``INF`` (any complex with an infinite component counts as infinity).
Interval points are ``float``.

Monomials ``z -> c z**d`` carry their coefficient both as ``coeff`` and as
``log_coeff``; the logarithm is authoritative because compositions reach
degrees like ``2**40`` whose coefficients under- or overflow a double.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import DomainError, InvalidArgument, UnsupportedMap

INF = complex(math.inf, 0.0)

# above this degree evaluation switches to log-polar coordinates
LOG_POLAR_DEGREE = 30
_INTERVAL_TOL = 1e-12


def is_inf(z) -> bool:
    return isinstance(z, complex) and cmath.isinf(z) or isinstance(z, float) and math.isinf(z)


@dataclass(frozen=True)
class Monomial:
    coeff: float
    degree: int
    log_coeff: float = field(default=math.nan)

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidArgument(f"monomial degree must be a positive integer, got {self.degree}")
        if math.isnan(self.log_coeff):
            if not self.coeff > 0:
                raise InvalidArgument(f"monomial coefficient modulus must be positive, got {self.coeff}")
            object.__setattr__(self, "log_coeff", math.log(self.coeff))

    @classmethod
    def from_log(cls, log_coeff: float, degree: int) -> "Monomial":
        try:
            c = math.exp(log_coeff)
        except OverflowError:
            c = math.inf
        return cls(c, degree, log_coeff)


@dataclass(frozen=True)
class AffineInterval:
    """``y -> a*y + b`` restricted to ``[lo, hi]``, which it must map into itself."""

    a: float
    b: float
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidArgument(f"empty interval [{self.lo}, {self.hi}]")
        ends = (self.a * self.lo + self.b, self.a * self.hi + self.b)
        if min(ends) < self.lo - _INTERVAL_TOL or max(ends) > self.hi + _INTERVAL_TOL:
            raise InvalidArgument(f"affine map {self.a}*y+{self.b} does not preserve [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Constant:
    value: complex


@dataclass(frozen=True)
class PolynomialC:
    """``c0 + c1 z + ... + cd z**d`` with ``d >= 2``."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) < 3:
            raise InvalidArgument("polynomial maps need degree >= 2")
        if cs[-1] == 0:
            raise InvalidArgument("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


MapSpec = Union[Monomial, AffineInterval, Constant, PolynomialC]


def is_open(m: MapSpec) -> bool:
    """Whether ``m`` is an open map of its space (constants are not)."""
    if isinstance(m, Constant):
        return False
    if isinstance(m, AffineInterval):
        return m.a != 0
    return True


def acts_on_sphere(m: MapSpec) -> bool:
    return not isinstance(m, AffineInterval)


def _finite_or_inf(z: complex) -> complex:
    if cmath.isinf(z) or cmath.isnan(z):
        return INF
    return z


def apply_map(m: MapSpec, z):
    if isinstance(m, AffineInterval):
        y = float(z.real) if isinstance(z, complex) else float(z)
        if isinstance(z, complex) and z.imag != 0:
            raise DomainError(f"interval map applied to non-real point {z}")
        if y < m.lo - _INTERVAL_TOL or y > m.hi + _INTERVAL_TOL:
            raise DomainError(f"point {y} outside [{m.lo}, {m.hi}]")
        return m.a * y + m.b
    if isinstance(m, Constant):
        return m.value
    z = complex(z)
    if cmath.isinf(z):
        return INF
    if isinstance(m, Monomial):
        if z == 0:
            return 0j
        if m.degree > LOG_POLAR_DEGREE:
            logr = m.degree * math.log(abs(z)) + m.log_coeff
            if logr > 709.0:
                return INF
            if logr < -745.0:
                return 0j
            return cmath.rect(math.exp(logr), (m.degree * cmath.phase(z)) % (2 * math.pi))
        try:
            w = m.coeff * z ** m.degree
        except OverflowError:
            return INF
        return _finite_or_inf(w)
    if isinstance(m, PolynomialC):
        acc = 0j
        for c in reversed(m.coeffs):
            acc = acc * z + c
            if cmath.isinf(acc) or cmath.isnan(acc):
                return INF
        return acc
    raise UnsupportedMap(f"unknown map type {type(m).__name__}")


def compose_monomials(maps: Sequence[Monomial]) -> Monomial:
    """Closed form of ``maps[0] o maps[1] o ... o maps[-1]``."""
    if not maps:
        raise InvalidArgument("need at least one map to compose")
    for m in maps:
        if not isinstance(m, Monomial):
            raise UnsupportedMap(f"compose_monomials got {type(m).__name__}")
    log_c = maps[-1].log_coeff
    deg = maps[-1].degree
    for m in reversed(maps[:-1]):
        log_c = m.log_coeff + m.degree * log_c
        deg = m.degree * deg
    return Monomial.from_log(log_c, deg)


def log_radius_action(m: MapSpec) -> tuple[int, float]:
    """``(slope, offset)`` of the induced affine map ``s -> slope*s + offset`` on ``s = log|z|``."""
    if not isinstance(m, Monomial):
        raise UnsupportedMap(f"log-radius action needs a monomial, got {type(m).__name__}")
    return m.degree, m.log_coeff


def inverse_log_radius(m: Monomial, s: float) -> float:
    return (s - m.log_coeff) / m.degree


def chordal_distance(z1, z2) -> float:
    """Chordal metric on the sphere: ``2|z1-z2| / sqrt((1+|z1|^2)(1+|z2|^2))``."""
    z1, z2 = complex(z1), complex(z2)
    i1, i2 = cmath.isinf(z1), cmath.isinf(z2)
    if i1 and i2:
        return 0.0
    if i1 or i2:
        z = z2 if i1 else z1
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2) if abs(z) < 1e150 else 0.0
    if min(abs(z1), abs(z2)) > 1.0:
        # inversion is an isometry and brings both points inside the unit disc
        return chordal_distance(1 / z1, 1 / z2)
    return 2.0 * abs(z1 - z2) / (math.hypot(1.0, abs(z1)) * math.hypot(1.0, abs(z2)))


# --- text form used inside scenario files -------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, complex):
        if cmath.isinf(x):
            return "inf"
        if x.imag == 0:
            return repr(x.real)
        return repr(x).strip("()")
    return repr(float(x))


def format_map(m: MapSpec) -> str:
    if isinstance(m, Monomial):
        if m.coeff > 0 and math.isfinite(m.coeff) and math.log(m.coeff) == m.log_coeff:
            return f"monomial {m.coeff!r} {m.degree}"
        return f"monomial exp({m.log_coeff!r}) {m.degree}"
    if isinstance(m, AffineInterval):
        return f"affine {m.a!r} {m.b!r} {m.lo!r} {m.hi!r}"
    if isinstance(m, Constant):
        return f"const {_fmt(m.value)}"
    if isinstance(m, PolynomialC):
        return "poly " + " ".join(_fmt(c) for c in m.coeffs)
    raise UnsupportedMap(type(m).__name__)


def _parse_point(tok: str) -> complex:
    if tok.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return complex(tok.replace("i", "j"))


def parse_map(text: str) -> MapSpec:
    parts = text.split()
    if not parts:
        raise InvalidArgument("empty map description")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "monomial" and len(args) == 2:
            c = args[0]
            if c.startswith("exp(") and c.endswith(")"):
                return Monomial.from_log(float(c[4:-1]), int(args[1]))
            return Monomial(float(c), int(args[1]))
        if kind == "affine" and len(args) == 4:
            return AffineInterval(*(float(a) for a in args))
        if kind == "const" and len(args) == 1:
            v = _parse_point(args[0])
            return Constant(v)
        if kind == "poly" and len(args) >= 3:
            return PolynomialC(tuple(_parse_point(a) for a in args))
    except ValueError as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"bad map description {text!r}: {exc}") from None
    raise InvalidArgument(f"bad map description {text!r}")
