"""Emptiness jumps, irreducibility, kernel-emptiness propagation and the thickening example."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

from . import oracles
from .builtins import fattening
from .errors import InvalidArgument, RsccError
from .maps import Monomial, apply_map
from .radial import DEFAULT_TOL, KernelCertificate, kernel_julia_depth, path_julia_radius
from .scenario import (PathSample, ScenarioSpec, _probs, cylinder_prob, forced_path,
                       sample_chain, sample_path_with_maps)
from .states import Ladder

TAIL = 10
CONV_TOL = 1e-6


# -- emptiness jumps ----------------------------------------------------------------------


@dataclass(frozen=True)
class Drive:
    """``forced`` repeats ``pattern`` (index ids) cyclically; ``sampled`` draws from the chain."""

    kind: str
    pattern: tuple = ()
    seed: int = 0

    @classmethod
    def forced(cls, pattern: Sequence[int]) -> "Drive":
        if not pattern:
            raise InvalidArgument("forced drive needs a nonempty pattern")
        return cls("forced", tuple(pattern))

    @classmethod
    def sampled(cls, seed: int) -> "Drive":
        return cls("sampled", seed=seed)

    def describe(self, spec: ScenarioSpec) -> str:
        if self.kind == "forced":
            return "forced " + " ".join(spec.indices[x] for x in self.pattern)
        return f"sampled seed={self.seed}"


@dataclass(frozen=True)
class JumpReport:
    scenario: str
    drive: str
    trajectory: tuple  # ((step, state, certificate), ...)
    limit_state: object
    limit_verdict: KernelCertificate | None
    verdict: str
    reason: str = ""
    warnings: tuple = ()
    convergence: str = ""

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "drive": self.drive,
            "verdict": self.verdict,
            "reason": self.reason,
            "convergence": self.convergence,
            "warnings": list(self.warnings),
            "limit_state": None if self.limit_state is None else str(self.limit_state),
            "limit_verdict": None if self.limit_verdict is None else self.limit_verdict.to_json(),
            "trajectory": [{"step": k, "state": str(w), "kernel": str(c)} for k, w, c in self.trajectory],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["step", "state", "kernel"])
        for k, w, c in self.trajectory:
            wr.writerow([k, str(w), str(c)])
        wr.writerow(["limit", "" if self.limit_state is None else str(self.limit_state),
                     "" if self.limit_verdict is None else str(self.limit_verdict)])
        return buf.getvalue()


def no_jump_discrete_check(spec: ScenarioSpec) -> bool:
    """True iff the state space is discrete, where converging trajectories are eventually constant."""
    return spec.space.is_discrete


def _drive_states(spec: ScenarioSpec, w0, drive: Drive, horizon: int):
    if drive.kind == "sampled":
        word, states = sample_chain(spec, w0, horizon, drive.seed)
        return word, states
    word = tuple(drive.pattern[k % len(drive.pattern)] for k in range(horizon))
    if cylinder_prob(spec, w0, word) <= 0:
        raise InvalidArgument("forced drive is not admissible from the initial state")
    states = [w0]
    for x in word:
        states.append(spec.update(spec.space, states[-1], x))
    return word, tuple(states)


def _limit(spec: ScenarioSpec, word, states, conv_tol: float):
    """``(limit, how, warnings)`` or ``(None, reason, warnings)``."""
    tail_word = word[-TAIL:]
    tail = states[-TAIL:]
    update = spec.update
    if len(set(tail_word)) == 1 and hasattr(update, "repeated_limit"):
        lim = update.repeated_limit(spec.space, states[-1], tail_word[0])
        if lim is not None:
            dists = [spec.space.distance(w, lim) for w in tail]
            if all(b <= a for a, b in zip(dists, dists[1:])):
                return lim, "analytic: repeated index, update family limit", ()
    pairwise = max(spec.space.distance(a, b) for a in tail for b in tail)
    if pairwise < conv_tol:
        accum = _known_accumulation(spec, states[-1], conv_tol)
        if accum is not None:
            return accum, "cauchy tail; known accumulation point", ()
        return states[-1], "cauchy tail", ("limit taken as the final state",)
    return None, f"tail not Cauchy within {conv_tol:g} (spread {pairwise:.3g})", ()


def _known_accumulation(spec: ScenarioSpec, w, tol: float):
    """The nearest distinguished point (ladder 0, interval endpoints) within ``tol``."""
    space = spec.space
    cands = []
    if space.kind == "ladder":
        cands.append(Ladder(0))
    if space.kind == "real":
        cands.extend(spec.parse_state(str(v)) for v in (space.lo, space.hi))
    for c in cands:
        if space.distance(w, c) < tol:
            return c
    return None


def detect_jump(spec: ScenarioSpec, w0, drive: Drive, horizon: int, kernel_depth: int = 2,
                conv_tol: float = CONV_TOL, tol: float = DEFAULT_TOL) -> JumpReport:
    """Kernel verdicts along a drive, at its limit, and the resulting jump verdict."""
    if horizon < 1 or kernel_depth < 1:
        raise InvalidArgument("horizon and kernel depth must be >= 1")
    spec.space.check(w0)
    desc = drive.describe(spec)
    if no_jump_discrete_check(spec):
        return JumpReport(spec.name, desc, (), None, None, "NoJumpWithinHorizon",
                          "discrete state space: converging trajectories are eventually constant")
    if spec.space.kind == "sphere" or spec.radial_classes is None:
        return JumpReport(spec.name, desc, (), None, None, "NotApplicable",
                          "needs a monomial scenario with declared radial classes on a metric state space")
    word, states = _drive_states(spec, w0, drive, horizon)
    traj = tuple((k, w, kernel_julia_depth(spec, w, kernel_depth, tol))
                 for k, w in enumerate(states))
    lim, how, warns = _limit(spec, word, states, conv_tol)
    if lim is None:
        return JumpReport(spec.name, desc, traj, None, None, "NoJumpWithinHorizon", how)
    lim_cert = kernel_julia_depth(spec, lim, kernel_depth, tol)
    all_empty = all(c.is_empty for _, _, c in traj)
    if all_empty and lim_cert.kind == "ExactNonempty":
        verdict, reason = "JumpDetected", "every kernel along the drive is empty; the limit kernel is not"
    elif not all_empty:
        verdict, reason = "NoJumpWithinHorizon", "some kernel along the drive is not certified empty"
    else:
        verdict, reason = "NoJumpWithinHorizon", f"limit kernel is {lim_cert.kind}"
    return JumpReport(spec.name, desc, traj, lim, lim_cert, verdict, reason, warns, how)


# -- irreducibility -----------------------------------------------------------------------


@dataclass(frozen=True)
class IrreducibilityResult:
    irreducible: bool
    witness: tuple | None  # (source, target) with target never reached
    failures: tuple = ()
    closed: bool = True

    def __bool__(self):
        return self.irreducible


def _find(space, states, w):
    for i, v in enumerate(states):
        if space.same(v, w):
            return i
    return None


def check_irreducible(spec: ScenarioSpec, states: Sequence, depth: int,
                      strict: bool = False) -> IrreducibilityResult:
    """Counting-measure irreducibility on a finite state set.

    Every state must reach every state of the set with positive probability
    within ``depth`` steps.  Paths may pass outside the set; with
    ``strict=True`` the set must be closed under admissible updates.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    states = list(states)
    if not states:
        raise InvalidArgument("need at least one state")
    for w in states:
        spec.space.check(w)
    closed = True
    for w in states:
        for x, p in enumerate(_probs(spec, w)):
            if p > 0 and _find(spec.space, states, spec.update(spec.space, w, x)) is None:
                closed = False
                if strict:
                    raise InvalidArgument(f"state set is not closed: {w} -> {spec.update(spec.space, w, x)}")
    failures = []
    reach = []
    for i, w in enumerate(states):
        hit = set()
        frontier, seen = [w], {w}
        for _ in range(depth):
            nxt = []
            for v in frontier:
                for x, p in enumerate(_probs(spec, v)):
                    if p <= 0:
                        continue
                    v2 = spec.update(spec.space, v, x)
                    j = _find(spec.space, states, v2)
                    if j is not None:
                        hit.add(j)
                    if v2 not in seen:
                        seen.add(v2)
                        nxt.append(v2)
            frontier = nxt
            if len(hit) == len(states) or not frontier:
                break
        reach.append(hit | {i})
        failures.extend((i, j) for j in range(len(states)) if j not in hit)
    # prefer a witness joining two distinct closed classes, the canonical obstruction
    closed_cls = [all(i in reach[j] for j in reach[i]) for i in range(len(states))]
    ranked = sorted(failures, key=lambda f: not (closed_cls[f[0]] and closed_cls[f[1]]
                                                 and f[1] not in reach[f[0]]))
    witness = (states[ranked[0][0]], states[ranked[0][1]]) if failures else None
    failures = [(states[i], states[j]) for i, j in failures]
    return IrreducibilityResult(not failures, witness, tuple(failures), closed)


@dataclass(frozen=True)
class PropagationResult:
    holds: bool
    vacuous: bool
    verdicts: tuple  # ((state, certificate), ...)

    def __bool__(self):
        return self.holds


def propagation_check(spec: ScenarioSpec, states: Sequence, kernel_depth: int = 2,
                      irreducibility_depth: int = 200) -> PropagationResult:
    """If one state has an empty kernel, all must (on an irreducible finite set)."""
    if not check_irreducible(spec, states, irreducibility_depth):
        raise InvalidArgument("state set is not irreducible")
    verdicts = tuple((w, kernel_julia_depth(spec, w, kernel_depth)) for w in states)
    empties = [c.is_empty for _, c in verdicts]
    if not any(empties):
        return PropagationResult(True, True, verdicts)
    return PropagationResult(all(empties), False, verdicts)


# -- thickened kernels --------------------------------------------------------------------


@dataclass(frozen=True)
class FatteningTrace:
    eps: float
    y0: float
    forced: bool
    steps: tuple  # ((k, y_k, w_k, dist_unfattened, dist_thickened), ...)
    event_probability: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(["k", "y", "state", "dist_unfattened", "dist_thickened"])
        for k, y, w, du, dt in self.steps:
            wr.writerow([k, repr(y), str(w), repr(du), repr(dt)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"eps": self.eps, "y0": self.y0, "forced": self.forced,
                "event_probability": self.event_probability,
                "steps": [{"k": k, "y": y, "state": str(w), "dist_unfattened": _jnum(du),
                           "dist_thickened": _jnum(dt)} for k, y, w, du, dt in self.steps]}


def _jnum(x: float):
    return "inf" if math.isinf(x) else x


def _kernel_dists(w: Ladder, y: float, eps: float) -> tuple[float, float]:
    # L_ker is {0} at the state 0 and empty on the ladder; thickening by eps
    # picks up the state 0 as soon as it lies within eps
    if w.n == 0:
        return abs(y), abs(y)
    return math.inf, (abs(y) if 1.0 / w.n < eps else math.inf)


def fattening_experiment(eps: float, horizon: int, seed: int = 0, y0: float = 0.1,
                         forced: bool = True, event_terms: int = 60) -> FatteningTrace:
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    if horizon < 1:
        raise InvalidArgument("horizon must be >= 1")
    if not 0 < y0 < 0.125:
        raise InvalidArgument("y0 must lie in (0, 1/8)")
    spec = fattening()
    w = Ladder(1)
    if forced:
        path = forced_path(spec, w, (0,) * horizon)
    else:
        path = sample_path_with_maps(spec, w, horizon, seed)
    steps = []
    y = y0
    for k, state in enumerate(path.states):
        if k > 0:
            y = apply_map(path.maps[k - 1], y)
        du, dt = _kernel_dists(state, y, eps)
        steps.append((k, y, state, du, dt))
    prob = cylinder_prob(spec, w, (0,) * event_terms)
    return FatteningTrace(float(eps), y0, forced, tuple(steps), prob)


# -- skew product -------------------------------------------------------------------------


def skew_step(prefix: PathSample, y) -> tuple[PathSample, complex]:
    """``(sigma(xi), gamma_1(y))``; monomial paths also satisfy the radial shift relation."""
    if len(prefix) == 0:
        raise InvalidArgument("skew step needs a nonempty path")
    shifted = PathSample(prefix.indices[1:], prefix.maps[1:], prefix.states[1:], prefix.seed,
                         prefix.log_prob, prefix.stream)
    image = apply_map(prefix.maps[0], y)
    if len(prefix) >= 2 and all(isinstance(m, Monomial) for m in prefix.maps):
        resid, bound = skew_relation_residual(prefix)
        if resid > bound + 1e-12:
            raise RsccError(f"radial shift relation violated: residual {resid} > {bound}")
    return shifted, image


def skew_relation_residual(prefix: PathSample) -> tuple[float, float]:
    """``|t(xi) - (t(sigma xi) - log c_1) / d_1|`` and the truncation bound it must respect."""
    maps = prefix.maps
    n = len(maps)
    t, err = path_julia_radius(maps, n)
    t_s, err_s = path_julia_radius(maps[1:], n - 1)
    m = maps[0]
    rel = (t_s - m.log_coeff) / m.degree
    return abs(t - rel), err + err_s / m.degree


def event_probability_oracle(n_terms: int = 60) -> float:
    return oracles.infinite_product(n_terms)


def report_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
