"""Scenario files: INI-style ``key = value`` text with bracketed sections.

Sections: ``[scenario]``, ``[state]``, ``[indices]``, ``[update]``,
``[transition]``, one ``[tau.<index>]`` per index and an optional
``[radial-classes]``.  ``dump_scenario`` writes the same format, so a file
round-trips to an equal ``ScenarioSpec``.
"""

from __future__ import annotations

import configparser
import io
from pathlib import Path

from .builtins import BUILTINS, get_builtin
from .errors import ConfigurationError, InvalidArgument
from .maps import format_map, parse_map
from .rules import TRANSITION_FAMILIES, UPDATE_FAMILIES, _pairs
from .scenario import RadialClass, RadialClasses, ScenarioSpec, with_discrete_classes
from .states import StateSpace


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    return cp


def _space(sec) -> StateSpace:
    kind = sec.get("kind", "").strip()
    if kind == "discrete":
        return StateSpace(kind, labels=tuple(t.strip() for t in sec["labels"].split(",")))
    if kind == "real":
        return StateSpace(kind, lo=sec["lo"], hi=sec["hi"])
    if kind == "ladder":
        return StateSpace(kind, extras=tuple(_pairs(sec.get("extras", ""))))
    if kind == "sphere":
        return StateSpace(kind)
    raise ConfigurationError(f"[state] kind {kind!r} is not one of discrete, real, ladder, sphere")


def _space_config(space: StateSpace) -> dict:
    d = {"kind": space.kind}
    if space.kind == "discrete":
        d["labels"] = ", ".join(space.labels)
    elif space.kind == "real":
        d["lo"], d["hi"] = str(space.lo), str(space.hi)
    elif space.kind == "ladder" and space.extras:
        d["extras"] = ", ".join(f"{k} -> {v}" for k, v in space.extras)
    return d


def parse_scenario(text: str) -> ScenarioSpec:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed scenario file: {exc}") from None
    for need in ("state", "indices", "update", "transition"):
        if not cp.has_section(need):
            raise ConfigurationError(f"scenario file lacks [{need}]")
    try:
        space = _space(cp["state"])
        names = tuple(t.strip() for t in cp["indices"]["names"].split(","))
        ufam = cp["update"].get("family", "")
        tfam = cp["transition"].get("family", "")
        if ufam not in UPDATE_FAMILIES:
            raise ConfigurationError(f"unknown update family {ufam!r}")
        if tfam not in TRANSITION_FAMILIES:
            raise ConfigurationError(f"unknown transition family {tfam!r}")
        update = UPDATE_FAMILIES[ufam].from_config(cp["update"], list(names), space)
        transition = TRANSITION_FAMILIES[tfam].from_config(cp["transition"], list(names), space)
        tau = []
        for n in names:
            sec_name = f"tau.{n}"
            if not cp.has_section(sec_name):
                raise ConfigurationError(f"scenario file lacks [{sec_name}]")
            sec = cp[sec_name]
            maps = [parse_map(t) for t in sec["maps"].split(";")]
            weights = [float(t) for t in sec.get("weights", "").replace(",", " ").split()] or [1.0]
            if len(weights) != len(maps):
                raise ConfigurationError(f"[{sec_name}] has {len(maps)} maps but {len(weights)} weights")
            tau.append(tuple(zip(maps, weights)))
        classes = None
        if cp.has_section("radial-classes"):
            sec = cp["radial-classes"]
            items = []
            for cname in (t.strip() for t in sec["order"].split(",")):
                edges = tuple((names.index(a), b) for a, b in _pairs(sec[f"{cname}.edges"]))
                rep = space.parse(sec[f"{cname}.representative"])
                items.append(RadialClass(cname, sec[f"{cname}.member"].strip(), rep, edges))
            classes = RadialClasses(tuple(items))
        name = cp["scenario"].get("name", "custom") if cp.has_section("scenario") else "custom"
    except KeyError as exc:
        raise ConfigurationError(f"scenario file is missing key {exc}") from None
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad value in scenario file: {exc}") from None
    spec = ScenarioSpec(name, space, names, update, transition, tuple(tau), classes)
    if classes is None and space.is_discrete:
        spec = with_discrete_classes(spec)
    return spec


def dump_scenario(spec: ScenarioSpec) -> str:
    names = list(spec.indices)
    cp = _parser()
    cp["scenario"] = {"name": spec.name}
    cp["state"] = _space_config(spec.space)
    cp["indices"] = {"names": ", ".join(names)}
    cp["update"] = {"family": spec.update.family, **spec.update.to_config(names)}
    cp["transition"] = {"family": spec.transition.family, **spec.transition.to_config(names)}
    for n, row in zip(names, spec.tau):
        cp[f"tau.{n}"] = {"maps": "; ".join(format_map(m) for m, _ in row),
                          "weights": ", ".join(repr(p) for _, p in row)}
    rc = spec.radial_classes
    if rc is not None and not spec.space.is_discrete:
        sec = {"order": ", ".join(rc.names())}
        for c in rc.classes:
            sec[f"{c.name}.member"] = c.member
            sec[f"{c.name}.representative"] = str(c.representative)
            sec[f"{c.name}.edges"] = ", ".join(f"{names[x]} -> {b}" for x, b in c.edges)
        cp["radial-classes"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_scenario(ref: str, alpha=None, eps=None) -> ScenarioSpec:
    """A builtin name or a path to a scenario file."""
    if ref in BUILTINS:
        return get_builtin(ref, alpha=alpha, eps=eps)
    path = Path(ref)
    if not path.is_file():
        raise InvalidArgument(f"{ref!r} is neither a builtin scenario nor a file")
    return parse_scenario(path.read_text(encoding="utf-8"))
