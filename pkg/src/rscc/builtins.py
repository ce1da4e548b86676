"""Named scenarios: the worked examples plus a few small helpers for testing."""

from __future__ import annotations

from fractions import Fraction

from .errors import InvalidArgument
from .maps import AffineInterval, Constant, Monomial
from .rules import (ClampAffineUpdate, FeedbackUpdate, LadderTransition, LadderUpdate,
                    LinearTransition, ThetaTransition)
from .scenario import RadialClass, RadialClasses, ScenarioSpec, embed_gdms
from .states import Ladder, Real, StateSpace, to_fraction

F = Monomial(1.0, 2)    # z^2
G = Monomial(0.5, 2)    # z^2 / 2

TWO = Ladder(label="2")


def jump_annulus() -> ScenarioSpec:
    """Ladder ``{0} u {1/n} u {2}`` driving ``{z^2}`` and ``{z^2, z^2/2}``."""
    space = StateSpace("ladder", extras=(("2", 2),))
    classes = RadialClasses((
        RadialClass("Ladder", "ladder", Ladder(1), ((0, "Ladder"), (1, "Two"))),
        RadialClass("Zero", "point 0", Ladder(0), ((0, "Zero"),)),
        RadialClass("Two", "point 2", TWO, ((1, "Two"),)),
    ))
    return ScenarioSpec(
        "jump-annulus", space, ("x1", "x2"),
        LadderUpdate(0, ((1, TWO),)),
        LadderTransition(0, 1, power=-1, base=2.0, extras=(("2", (0.0, 1.0)),)),
        (((F, 1.0),), ((F, 0.5), (G, 0.5))),
        classes,
    )


def fattening() -> ScenarioSpec:
    """Interval system on ``[0, 1]`` where the unthickened kernel approach fails."""
    space = StateSpace("ladder")
    return ScenarioSpec(
        "fattening", space, ("x1", "x2"),
        LadderUpdate(0, ((1, Ladder(0)),)),
        LadderTransition(0, 1, power=1, base=2.0),
        (((AffineInterval(0.5, 0.0, 0.0, 1.0), 1.0),), ((Constant(0.125), 1.0),)),
    )


def reinforcement(alpha="1/2") -> ScenarioSpec:
    """Linear reinforcement on ``[0, 1]``: index 1 pulls toward 1 and selects ``z^2/2``."""
    a = to_fraction(alpha)
    space = StateSpace("real", lo=0, hi=1)
    classes = RadialClasses((
        RadialClass("Zero", "point 0", Real(0), ((0, "Zero"),)),
        RadialClass("One", "point 1", Real(1), ((1, "One"),)),
        RadialClass("Interior", "open 0 1", Real(Fraction(1, 2)), ((0, "Interior"), (1, "Interior"))),
    ))
    return ScenarioSpec(
        "reinforcement", space, ("0", "1"),
        ClampAffineUpdate(a, (0, 1), 0, 1),
        LinearTransition(one=1, zero=0),
        (((F, 1.0),), ((G, 1.0),)),
        classes,
        params=(("alpha", str(a)),),
    )


def reinforcement_trunc(alpha="1/2", eps="1/100", levels: int | None = None) -> ScenarioSpec:
    """Reinforcement clamped to ``[eps, 1-eps]``; optional rounding to ``levels`` grid points."""
    a, e = to_fraction(alpha), to_fraction(eps)
    if not 0 < e < Fraction(1, 2):
        raise InvalidArgument("eps must lie in (0, 1/2)")
    lo, hi = e, 1 - e
    step = None if levels is None else (hi - lo) / (levels - 1)
    space = StateSpace("real", lo=lo, hi=hi)
    classes = RadialClasses((
        RadialClass("Interior", f"closed {lo} {hi}", Real(Fraction(1, 2)),
                    ((0, "Interior"), (1, "Interior"))),
    ))
    name = "reinforcement-trunc" if levels is None else "reinforcement-quantized"
    params = (("alpha", str(a)), ("eps", str(e))) + ((("levels", str(levels)),) if levels else ())
    return ScenarioSpec(
        name, space, ("0", "1"),
        ClampAffineUpdate(a, (0, 1), lo, hi, step),
        LinearTransition(one=1, zero=0),
        (((F, 1.0),), ((G, 1.0),)),
        classes,
        params=params,
    )


def feedback(theta: str = "bump", params=(0.9, 1.0, 0.5)) -> ScenarioSpec:
    """State is the sphere point; ``theta(|y|)`` picks ``z^2`` over ``z^2/2``."""
    return ScenarioSpec(
        "feedback", StateSpace("sphere"), ("f", "g"),
        FeedbackUpdate((F, G)),
        ThetaTransition(0, 1, theta, tuple(params)),
        (((F, 1.0),), ((G, 1.0),)),
    )


def gdms_demo() -> ScenarioSpec:
    return embed_gdms(2, {
        (1, 1): [(F, 0.5)],
        (1, 2): [(G, 0.5)],
        (2, 1): [(F, 0.5), (G, 0.5)],
    }, name="gdms-demo")


def frozen() -> ScenarioSpec:
    """One state, one index, the single map ``z^2``."""
    return embed_gdms(1, {(1, 1): [(F, 1.0)]}, name="frozen")


def constant_only() -> ScenarioSpec:
    return embed_gdms(1, {(1, 1): [(Constant(0.5 + 0.25j), 0.5), (Constant(-1.0), 0.5)]},
                      name="constant")


BUILTINS = {
    "jump-annulus": jump_annulus,
    "fattening": fattening,
    "reinforcement": reinforcement,
    "reinforcement-trunc": reinforcement_trunc,
    "reinforcement-quantized": lambda alpha="1/2", eps="1/100": reinforcement_trunc(alpha, eps, 21),
    "feedback": feedback,
    "gdms-demo": gdms_demo,
    "frozen": frozen,
    "constant": constant_only,
}


def get_builtin(name: str, alpha=None, eps=None) -> ScenarioSpec:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InvalidArgument(f"unknown scenario {name!r}; builtins: {', '.join(sorted(BUILTINS))}") from None
    kwargs = {}
    if alpha is not None:
        kwargs["alpha"] = alpha
    if eps is not None:
        kwargs["eps"] = eps
    try:
        return factory(**kwargs)
    except TypeError:
        raise InvalidArgument(f"scenario {name} does not take {sorted(kwargs)}") from None
