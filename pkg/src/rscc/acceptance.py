"""The acceptance battery: ten checks with fixed tolerances.

Each check returns a ``CriterionResult`` and may add artifacts (file name to
bytes) that ``rscc report`` writes out.  Artifacts never contain timings, so
repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import oracles, rng
from .analysis import Drive, detect_jump, fattening_experiment
from .builtins import F, G, TWO, get_builtin, jump_annulus, reinforcement, reinforcement_trunc
from .grid import GridWindow, estimate_path_julia_grid, pixel_measure, render_ppm
from .maps import compose_monomials
from .operator import (ClippedLogMod, One, ProductPoint, RadialBump, StateCoord,
                       apply_M, equicontinuity_diagnostic, iterate_M, mc_estimate_M, word_sum_oracle)
from .radial import (kernel_julia_depth, path_julia_radius, radial_preimage,
                     semigroup_julia_radial, statewise_julia_radial)
from .scenario import sample_path_with_maps
from .states import Discrete, Ladder, Real

LOG2 = math.log(2.0)
SEED = 0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


@dataclass
class Context:
    artifacts: dict = field(default_factory=dict)

    def add(self, name: str, text: str | bytes) -> None:
        self.artifacts[name] = text.encode("utf-8") if isinstance(text, str) else text


def _csv(header_meta: dict, head: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header_meta, sort_keys=True) + "\r\n")
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(head)
    wr.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- 1 ------------------------------------------------------------------------------------


def c1_annulus(ctx: Context) -> CriterionResult:
    j = semigroup_julia_radial([F, G], 1e-9)
    times = []
    for _ in range(20):
        t0 = time.perf_counter()
        semigroup_julia_radial([F, G], 1e-9)
        times.append(time.perf_counter() - t0)
    best = min(times)
    ok_shape = len(j.intervals) == 1
    err = abs(j.intervals[0][0]) + 0.0 if ok_shape else math.inf
    err = max(err, abs(j.intervals[0][1] - LOG2)) if ok_shape else err
    passed = ok_shape and err <= 1e-8 and best < 1e-3
    ctx.add("annulus.json", _json({"scenario": "semigroup {z^2, z^2/2}", "seed": None,
                                   "params": {"tol": 1e-9},
                                   "log_radius_intervals": [list(iv) for iv in j.intervals],
                                   "radii": [list(r) for r in j.radii()]}))
    return CriterionResult(1, "annulus reproduction", passed,
                           f"{j.format_radii()} endpoint error {err:.2e} (<= 1e-8), "
                           f"runtime {best * 1e3:.3f} ms (< 1 ms)")


# -- 2 ------------------------------------------------------------------------------------


def c2_preimages(ctx: Context) -> CriterionResult:
    j = statewise_julia_radial(jump_annulus())["Two"]
    cases = [
        ("f^-1", radial_preimage(F, j), (0.0, LOG2 / 2)),
        ("g^-1", radial_preimage(G, j), (LOG2 / 2, LOG2)),
        ("(f o f)^-1", radial_preimage(compose_monomials([F, F]), j), (0.0, LOG2 / 4)),
    ]
    worst = 0.0
    rows = []
    for name, got, want in cases:
        if len(got.intervals) != 1:
            worst = math.inf
            continue
        e = max(abs(got.intervals[0][0] - want[0]), abs(got.intervals[0][1] - want[1]))
        worst = max(worst, e)
        rows.append([name, repr(got.intervals[0][0]), repr(got.intervals[0][1]),
                     repr(math.exp(got.intervals[0][0])), repr(math.exp(got.intervals[0][1]))])
    ctx.add("preimages.csv", _csv({"scenario": "jump-annulus", "seed": None, "params": {"class": "Two"}},
                                  ["map", "s_lo", "s_hi", "r_lo", "r_hi"], rows))
    return CriterionResult(2, "preimage algebra", worst <= 1e-12,
                           f"[1, sqrt2], [sqrt2, 2], [1, 2^(1/4)] max endpoint error {worst:.1e} (<= 1e-12)")


# -- 3 ------------------------------------------------------------------------------------


def c3_kernel(ctx: Context) -> CriterionResult:
    spec = jump_annulus()
    at2 = kernel_julia_depth(spec, TWO, 2)
    at0 = kernel_julia_depth(spec, Ladder(0), 2)
    ok2 = at2.kind == "EmptyAtDepth" and at2.depth == 2
    ok0 = (at0.kind == "ExactNonempty" and len(at0.radial.intervals) == 1
           and max(abs(math.exp(a) - 1.0) for a in at0.radial.intervals[0]) <= 1e-12)
    ctx.add("kernel.json", _json({"scenario": "jump-annulus", "seed": None, "params": {"depth": 2},
                                  "state 2": at2.to_json(), "state 0": at0.to_json()}))
    return CriterionResult(3, "kernel emptiness", ok2 and ok0, f"state 2: {at2}; state 0: {at0}")


# -- 4 ------------------------------------------------------------------------------------


def c4_jumps(ctx: Context) -> CriterionResult:
    out = {}
    fails = []
    ja = jump_annulus()
    r = detect_jump(ja, Ladder(1), Drive.forced([0]), 50)
    out["jump-annulus forced x1"] = r.to_json()
    if not (r.verdict == "JumpDetected" and r.limit_state == Ladder(0)):
        fails.append("jump-annulus")
    rf = reinforcement("1/2")
    r = detect_jump(rf, Real(Fraction(1, 2)), Drive.forced([1]), 60)
    out["reinforcement forced 1"] = r.to_json()
    if not (r.verdict == "JumpDetected" and r.limit_state == Real(1)):
        fails.append("reinforcement")
    tr = reinforcement_trunc("1/2", "1/100")
    drives = [Drive.forced([0]), Drive.forced([1]), Drive.forced([0, 1]), Drive.forced([1, 1, 0])]
    drives += [Drive.sampled(s) for s in range(4)]
    for d in drives:
        r = detect_jump(tr, Real(Fraction(1, 2)), d, 200)
        out[f"reinforcement-trunc {d.describe(tr)}"] = {k: v for k, v in r.to_json().items() if k != "trajectory"}
        if r.verdict != "NoJumpWithinHorizon":
            fails.append(f"trunc {d.describe(tr)}")
    for name in ("gdms-demo", "frozen", "constant"):
        spec = get_builtin(name)
        verdicts = set()
        for w in spec.space.labels:
            for d in (Drive.sampled(1), Drive.forced([spec.radial_classes.get(w).edges[0][0]])):
                r = detect_jump(spec, Discrete(w), d, 30)
                verdicts.add(r.verdict)
                if r.verdict != "NoJumpWithinHorizon":
                    fails.append(f"{name} {w}")
        out[f"{name} (discrete)"] = sorted(verdicts)
    ctx.add("jumps.json", _json({"scenario": "jump-annulus, reinforcement, reinforcement-trunc, discrete",
                                 "seed": SEED, "params": {"kernel_depth": 2}, "reports": out}))
    detail = "jump-annulus and reinforcement jump; truncated and discrete scenarios do not"
    return CriterionResult(4, "jump detection", not fails, detail if not fails else "failed: " + ", ".join(fails))


# -- 5 ------------------------------------------------------------------------------------


def c5_operator(ctx: Context, mc_samples: int = 100_000) -> CriterionResult:
    phis = [One(), StateCoord(), RadialBump(0.3, 1.0), ClippedLogMod(-2.0, 2.0)]
    ja, rf = jump_annulus(), reinforcement("1/2")
    points = [(ja, ProductPoint(1.2 + 0.3j, Ladder(1))), (ja, ProductPoint(1.5j, TWO)),
              (ja, ProductPoint(0.9 + 0j, Ladder(3))),
              (rf, ProductPoint(1.3 - 0.4j, Real(Fraction(1, 2)))), (rf, ProductPoint(0.8j, Real(Fraction(1, 5))))]
    worst = 0.0
    for spec, p in points:
        for phi in phis:
            for n in range(1, 7):
                worst = max(worst, abs(iterate_M(spec, phi, p, n) - word_sum_oracle(spec, phi, p, n)))
    rows = []
    mc_ok = True
    for spec, p, phi in ((ja, ProductPoint(1.2 + 0.3j, Ladder(1)), ClippedLogMod(-2.0, 2.0)),
                         (rf, ProductPoint(1.3 - 0.4j, Real(Fraction(1, 2))), RadialBump(0.3, 1.0))):
        exact = word_sum_oracle(spec, phi, p, 4)
        mean, se = mc_estimate_M(spec, phi, p, 4, mc_samples, SEED)
        z = abs(mean - exact) / se if se > 0 else (0.0 if mean == exact else math.inf)
        mc_ok &= z <= 4.0
        rows.append([spec.name, str(p.w), repr(p.y), repr(exact), repr(mean), repr(se), repr(z)])
    mart = 0.0
    for k in range(20):
        pp = Real(Fraction(k, 19))
        mart = max(mart, abs(apply_M(rf, StateCoord(), ProductPoint(0.5 + 0.5j, pp)) - float(pp.value)))
    ctx.add("operator-mc.csv", _csv({"scenario": "jump-annulus, reinforcement", "seed": SEED,
                                     "params": {"n": 4, "samples": mc_samples}},
                                    ["scenario", "state", "y", "exact", "mc_mean", "stderr", "z"], rows))
    passed = worst <= 1e-12 and mc_ok and mart <= 1e-12
    zs = ", ".join(f"{float(r[-1]):.2f}" for r in rows)
    return CriterionResult(5, "operator identities", passed,
                           f"recursion vs word sum max diff {worst:.1e} (<= 1e-12); MC |z| = {zs} (<= 4); "
                           f"martingale max diff {mart:.1e} (<= 1e-12)")


# -- 6 ------------------------------------------------------------------------------------

RADII = (1e-1, 1e-2, 1e-3, 1e-4)
COOP_BUMP = RadialBump(0.0, 8.0)
FROZEN_CLIP = ClippedLogMod(-0.02, 0.02)


def c6_cooperation(ctx: Context) -> CriterionResult:
    tr = reinforcement_trunc("1/2", "1/100")
    rows = []
    trunc_ok = True
    worst = 0.0
    for y in (0.5 + 0j, 1.0 + 0j, 2.0 * complex(math.cos(1.0), math.sin(1.0))):
        for p in (Fraction(1, 100), Fraction(1, 2), Fraction(99, 100)):
            d = equicontinuity_diagnostic(tr, COOP_BUMP, ProductPoint(y, Real(p)), RADII, 8)
            sup = d.sup_over_n()
            seq = [sup[r] for r in RADII]
            trunc_ok &= all(b <= a for a, b in zip(seq, seq[1:])) and sup[1e-3] < 0.05
            worst = max(worst, sup[1e-3])
            rows.extend([tr.name, repr(y), str(Real(p)), repr(r), repr(sup[r])] for r in RADII)
    fz = get_builtin("frozen")
    frozen_ok = True
    low = math.inf
    for y in (1.0 + 0j, complex(math.cos(0.7), math.sin(0.7))):
        sup = equicontinuity_diagnostic(fz, FROZEN_CLIP, ProductPoint(y, Discrete("1")), RADII, 8).sup_over_n()
        frozen_ok &= all(sup[r] >= 0.25 * FROZEN_CLIP.range() for r in RADII)
        low = min(low, min(sup.values()))
        rows.extend(["frozen", repr(y), "1", repr(r), repr(sup[r])] for r in RADII)
    ctx.add("cooperation.csv", _csv({"scenario": "reinforcement-trunc, frozen", "seed": None,
                                     "params": {"n_max": 8, "phi_trunc": "bump 0 8", "phi_frozen": "clip -0.02 0.02"}},
                                    ["scenario", "y", "state", "delta", "sup_over_n"], rows))
    return CriterionResult(6, "cooperation signature", trunc_ok and frozen_ok,
                           f"truncated: max supOverN(1e-3) = {worst:.4f} (< 0.05), nonincreasing {trunc_ok}; "
                           f"frozen |y|=1: min supOverN = {low:.4f} (>= {0.25 * FROZEN_CLIP.range():.4f})")


# -- 7 ------------------------------------------------------------------------------------

PATH_WINDOW = (-2.5, 2.5, -2.5, 2.5)
PATH_DEPTH = 48


def c7_path_measure(ctx: Context, n_paths: int = 20, resolutions=(128, 256, 512)) -> CriterionResult:
    spec = jump_annulus()
    paths = [sample_path_with_maps(spec, TWO, PATH_DEPTH, SEED, stream=s) for s in range(n_paths)]
    table = {}
    for res in resolutions:
        win = GridWindow(*PATH_WINDOW, res)
        for i, p in enumerate(paths):
            g = estimate_path_julia_grid(p, win)
            table[(i, res)] = pixel_measure(g)
            if i == 0 and res == resolutions[0]:
                meta = f"scenario=jump-annulus state=2 seed={SEED} stream=0 depth={PATH_DEPTH} res={res}"
                ctx.add("path-julia-0.ppm", render_ppm(g, "bw", comment=meta))
    means = [sum(table[(i, r)] for i in range(n_paths)) / n_paths for r in resolutions]
    per_path = all(table[(i, a)] > table[(i, b)] for i in range(n_paths)
                   for a, b in zip(resolutions, resolutions[1:]))
    top = resolutions[-1]
    worst = max(table[(i, top)] for i in range(n_paths))
    passed = per_path and all(b < a for a, b in zip(means, means[1:])) and worst <= 8 / top
    rows = [[i, r, repr(table[(i, r)])] for i in range(n_paths) for r in resolutions]
    ctx.add("path-measure.csv", _csv({"scenario": "jump-annulus", "seed": SEED,
                                      "params": {"state": "2", "depth": PATH_DEPTH, "window": list(PATH_WINDOW)}},
                                     ["path", "resolution", "julia_fraction"], rows))
    ms = ", ".join(f"{r}: {m:.5f}" for r, m in zip(resolutions, means))
    return CriterionResult(7, "pathwise measure-zero proxy", passed,
                           f"mean Julia fraction {ms}; max at {top} = {worst:.5f} (<= {8 / top:.5f})")


# -- 8 ------------------------------------------------------------------------------------


def c8_fattening(ctx: Context) -> CriterionResult:
    eps, y0 = 0.1, 0.1
    tr = fattening_experiment(eps, 60, seed=SEED, y0=y0)
    unf = all(math.isinf(s[3]) for s in tr.steps)
    thick = all(s[4] <= 2.0 ** (-s[0]) * y0 for s in tr.steps if 1.0 / (s[0] + 1) < eps)
    oracle = oracles.infinite_product(60)
    prob_ok = abs(tr.event_probability - 0.2887881) <= 1e-6 and abs(tr.event_probability - oracle) <= 1e-12
    meta = {"scenario": "fattening", "seed": SEED, "params": {"eps": eps, "y0": y0, "horizon": 60}}
    ctx.add("fattening.csv", _csv(meta, ["k", "y", "state", "dist_unfattened", "dist_thickened"],
                                  [[k, repr(y), str(w), repr(du), repr(dt)] for k, y, w, du, dt in tr.steps]))
    return CriterionResult(8, "fattening counterexample", unf and thick and prob_ok,
                           f"unthickened distance inf at every step: {unf}; thickened <= 2^-k y0: {thick}; "
                           f"event probability {tr.event_probability:.7f} (0.2887881 +- 1e-6)")


# -- 9 ------------------------------------------------------------------------------------


def c9_path_oracle(ctx: Context, n_words: int = 100) -> CriterionResult:
    rows = []
    worst = 0.0
    for i in range(n_words):
        length = 1 + int(rng.uniform(SEED, i, 0, 3) * 8)
        word = [G if rng.uniform(SEED, i, k + 1, 3) < 0.5 else F for k in range(length)]
        t, bound = path_julia_radius(lambda k, w=word: w[(k - 1) % len(w)], 40)
        ref = oracles.bounded_orbit_radius(word)
        e = abs(t - ref)
        worst = max(worst, e)
        rows.append([i, "".join("g" if m == G else "f" for m in word), repr(t), repr(ref), repr(e)])
    ctx.add("path-radius.csv", _csv({"scenario": "jump-annulus", "seed": SEED,
                                     "params": {"state": "2", "depth": 40, "words": n_words}},
                                    ["word", "period", "series_t", "bisection_t", "abs_diff"], rows))
    return CriterionResult(9, "path Julia oracle agreement", worst <= 1e-9,
                           f"max |series - bisection| over {n_words} periodic words = {worst:.2e} (<= 1e-9)")


# -- 10 -----------------------------------------------------------------------------------


def _run_report(out: Path, threads: int) -> int:
    env = dict(os.environ, RSCC_THREADS=str(threads))
    cmd = [sys.executable, "-m", "rscc.cli", "report", "--out", str(out), "--skip-determinism", "--quiet"]
    return subprocess.run(cmd, env=env, capture_output=True).returncode


def c10_determinism(ctx: Context) -> CriterionResult:
    with tempfile.TemporaryDirectory() as tmp:
        runs = [(Path(tmp) / f"t{t}-{k}", t) for k, t in enumerate((1, 4))]
        codes = [_run_report(d, t) for d, t in runs]
        listings = [sorted(p.name for p in d.iterdir()) if d.is_dir() else [] for d, _ in runs]
        same_names = listings[0] and all(lst == listings[0] for lst in listings)
        diffs = []
        if same_names:
            for name in listings[0]:
                blobs = [(d / name).read_bytes() for d, _ in runs]
                if any(b != blobs[0] for b in blobs):
                    diffs.append(name)
    passed = bool(same_names) and not diffs and all(c in (0, 4) for c in codes)
    detail = (f"{len(listings[0])} files byte-identical across RSCC_THREADS 1 and 4" if passed
              else f"exit codes {codes}; differing files {diffs or 'file lists differ'}")
    return CriterionResult(10, "determinism", passed, detail)


CRITERIA = [c1_annulus, c2_preimages, c3_kernel, c4_jumps, c5_operator, c6_cooperation,
            c7_path_measure, c8_fattening, c9_path_oracle, c10_determinism]


def run_all(skip_determinism: bool = False, emit=None) -> tuple[list[CriterionResult], Context]:
    ctx = Context()
    results = []
    for fn in CRITERIA:
        if skip_determinism and fn is c10_determinism:
            continue
        res = fn(ctx)
        results.append(res)
        if emit is not None:
            emit(res.line())
    summary = {"criteria": [{"number": r.number, "name": r.name, "passed": r.passed} for r in results],
               "scenario": "acceptance battery", "seed": SEED, "params": {}}
    ctx.add("criteria.json", _json(summary))
    return results, ctx
