"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments, 3 resource cap exceeded,
4 a failed acceptance check in ``report``.  Every emitted file records the
scenario, seed and parameters: JSON documents in top-level fields, CSV files
in a leading ``#`` line, PPM images in a header comment.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError, ResourceError, RsccError
from .scenario import ScenarioSpec

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_FAILED = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


# -- output helpers ---------------------------------------------------------------------


def _meta(args, spec: ScenarioSpec | None, **params) -> dict:
    p = {k: v for k, v in params.items() if v is not None}
    if spec is not None and spec.params:
        p.update(dict(spec.params))
    return {"scenario": spec.name if spec is not None else args.scenario, "seed": args.seed, "params": p}


def _csv_text(meta: dict, header: list, rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\r\n")
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def _emit(args, data: str | bytes) -> None:
    if args.out and args.out != "-":
        path = Path(args.out)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        path.write_bytes(data if isinstance(data, bytes) else data.encode("utf-8"))
    elif isinstance(data, bytes):
        sys.stdout.buffer.write(data)
    else:
        sys.stdout.write(data)


def _spec(args) -> ScenarioSpec:
    from .config import load_scenario
    return load_scenario(args.scenario, alpha=args.alpha, eps=args.eps)


def _state(spec: ScenarioSpec, text: str | None, default: str | None = None):
    if text is None:
        if default is None:
            from .errors import InvalidArgument
            raise InvalidArgument("--state is required")
        text = default
    return spec.parse_state(text)


def _default_state(spec: ScenarioSpec) -> str | None:
    rc = spec.radial_classes
    if rc is not None:
        return str(rc.classes[0].representative)
    if spec.space.is_discrete:
        return spec.space.labels[0]
    return None


def _index_word(spec: ScenarioSpec, word) -> str:
    return " ".join(spec.indices[x] for x in word)


def _parse_y(text: str) -> complex:
    t = text.strip().lower()
    if t in ("inf", "oo"):
        return complex(math.inf, 0)
    return complex(t.replace("i", "j"))


# -- verbs ------------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    from .maps import format_map
    from .scenario import sample_path_with_maps
    spec = _spec(args)
    w = _state(spec, args.state, _default_state(spec))
    path = sample_path_with_maps(spec, w, args.steps, args.seed)
    rows = [[0, "", "", str(path.states[0])]]
    for k, (x, m, s) in enumerate(zip(path.indices, path.maps, path.states[1:]), start=1):
        rows.append([k, spec.indices[x], format_map(m), str(s)])
    meta = _meta(args, spec, state=str(w), steps=args.steps, log_prob=path.log_prob)
    _emit(args, _csv_text(meta, ["step", "index", "map", "state"], rows))
    return EXIT_OK


def cmd_words(args) -> int:
    from .scenario import cylinder_prob, admissible_words
    spec = _spec(args)
    w = _state(spec, args.state, _default_state(spec))
    words = admissible_words(spec, w, args.depth)
    lines = [f"# {json.dumps(_meta(args, spec, state=str(w), depth=args.depth), sort_keys=True)}"]
    lines += [f"{_index_word(spec, word)}\t{cylinder_prob(spec, w, word)!r}" for word in words]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_julia_radial(args) -> int:
    from .radial import statewise_julia_radial
    spec = _spec(args)
    sets = statewise_julia_radial(spec, args.tol)
    rows = []
    for name, rs in sets.items():
        if rs.is_empty:
            rows.append([name, "", "", "", ""])
        for (a, b), (r0, r1) in zip(rs.intervals, rs.radii()):
            rows.append([name, repr(a), repr(b), repr(r0), repr(r1)])
    _emit(args, _csv_text(_meta(args, spec, tol=args.tol), ["class", "s_lo", "s_hi", "r_lo", "r_hi"], rows))
    return EXIT_OK


def _grid_json(grid, meta: dict) -> str:
    from .grid import LABEL_NAMES
    w = grid.window
    return _json_text({
        **meta,
        "window": [w.re_min, w.re_max, w.im_min, w.im_max],
        "resolution": w.resolution,
        "label_codes": {str(k): v for k, v in LABEL_NAMES.items()},
        "labels": ["".join(str(int(v)) for v in row) for row in grid.labels],
        "diagnostics": [[float(v) for v in row] for row in grid.diagnostics],
    })


def _grid_from_json(text: str):
    from .grid import GridWindow, MembershipGrid
    doc = json.loads(text)
    win = GridWindow(*doc["window"], doc["resolution"])
    labels = np.array([[int(c) for c in row] for row in doc["labels"]], dtype=np.int8)
    diag = np.array(doc["diagnostics"], dtype=np.float64)
    return MembershipGrid(win, labels, diag), doc


def cmd_julia_grid(args) -> int:
    from .grid import (GridWindow, estimate_julia_grid, estimate_path_julia_grid, pixel_measure,
                       render_ppm)
    from .scenario import sample_path_with_maps
    spec = _spec(args)
    w = _state(spec, args.state, _default_state(spec))
    win = GridWindow.parse(args.window, args.res)
    if args.path_stream is not None:
        path = sample_path_with_maps(spec, w, args.depth, args.seed, stream=args.path_stream)
        grid = estimate_path_julia_grid(path, win, args.probe, args.threshold)
    else:
        grid = estimate_julia_grid(spec, w, win, args.depth, args.samples, args.probe, args.threshold,
                                   args.seed)
    meta = _meta(args, spec, state=str(w), window=win.as_text(), res=args.res, depth=args.depth,
                 samples=args.samples, path_stream=args.path_stream, probe=args.probe,
                 threshold=args.threshold)
    meta["params"]["julia_fraction"] = pixel_measure(grid, "julia")
    if args.out and args.out.endswith(".ppm"):
        _emit(args, render_ppm(grid, args.palette, comment=json.dumps(meta, sort_keys=True)))
    else:
        _emit(args, _grid_json(grid, meta))
    return EXIT_OK


def cmd_render(args) -> int:
    from .grid import render_ppm
    grid, doc = _grid_from_json(Path(args.grid).read_text(encoding="utf-8"))
    meta = {k: doc[k] for k in ("scenario", "seed", "params") if k in doc}
    _emit(args, render_ppm(grid, args.palette, comment=json.dumps(meta, sort_keys=True)))
    return EXIT_OK


def cmd_kernel(args) -> int:
    from .radial import kernel_julia_depth
    spec = _spec(args)
    w = _state(spec, args.state)
    cert = kernel_julia_depth(spec, w, args.depth, args.tol)
    doc = _meta(args, spec, state=str(w), depth=args.depth, tol=args.tol)
    doc["certificate"] = cert.to_json()
    doc["verdict"] = str(cert)
    _emit(args, _json_text(doc))
    return EXIT_OK


def cmd_operator(args) -> int:
    from .operator import (ProductPoint, equicontinuity_diagnostic, iterate_M, mc_estimate_M,
                           parse_test_function, word_sum_oracle)
    spec = _spec(args)
    w = _state(spec, args.state, _default_state(spec))
    phi = parse_test_function(args.phi)
    p = ProductPoint(_parse_y(args.y) if spec.on_sphere else float(args.y), w)
    meta = _meta(args, spec, state=str(w), y=args.y, phi=args.phi, mode=args.mode, n=args.steps)
    if args.mode == "diagnostic":
        radii = [float(t) for t in args.radii.split(",")]
        d = equicontinuity_diagnostic(spec, phi, p, radii, args.steps)
        rows = [[repr(a), n, repr(o)] for a, n, o in d.rows()]
        _emit(args, _csv_text(meta, ["delta", "n", "osc"], rows))
        return EXIT_OK
    rows = []
    for n in range(1, args.steps + 1):
        if args.mode == "iterate":
            rows.append([n, repr(iterate_M(spec, phi, p, n)), ""])
        elif args.mode == "oracle":
            rows.append([n, repr(word_sum_oracle(spec, phi, p, n)), ""])
        else:
            mean, se = mc_estimate_M(spec, phi, p, n, args.samples, args.seed)
            rows.append([n, repr(mean), repr(se)])
    _emit(args, _csv_text(meta, ["n", "value", "stderr"], rows))
    return EXIT_OK


def _parse_drive(spec: ScenarioSpec, text: str, seed: int):
    from .analysis import Drive
    if text == "sampled":
        return Drive.sampled(seed)
    if text.startswith("forced:"):
        names = [t for t in text[len("forced:"):].replace(",", " ").split() if t]
        return Drive.forced([spec.index_of(n) for n in names])
    from .errors import InvalidArgument
    raise InvalidArgument("drive is 'sampled' or 'forced:<index> [<index> ...]'")


def cmd_jump(args) -> int:
    from .analysis import detect_jump
    spec = _spec(args)
    w = _state(spec, args.state, _default_state(spec))
    drive = _parse_drive(spec, args.drive, args.seed)
    rep = detect_jump(spec, w, drive, args.steps, args.depth, args.conv_tol)
    doc = _meta(args, spec, state=str(w), drive=args.drive, horizon=args.steps, kernel_depth=args.depth,
                conv_tol=args.conv_tol)
    doc.update(rep.to_json())
    doc["scenario"] = spec.name
    _emit(args, _json_text(doc))
    return EXIT_OK


def cmd_irreducible(args) -> int:
    from .analysis import check_irreducible
    spec = _spec(args)
    if not args.states:
        from .errors import InvalidArgument
        raise InvalidArgument("--states is required (comma separated)")
    states = [spec.parse_state(t) for t in args.states.split(",")]
    res = check_irreducible(spec, states, args.depth, strict=args.strict)
    doc = _meta(args, spec, states=args.states, depth=args.depth, strict=args.strict)
    doc.update({
        "irreducible": res.irreducible,
        "closed": res.closed,
        "witness": None if res.witness is None else {"from": str(res.witness[0]), "target": str(res.witness[1])},
        "failures": [[str(a), str(b)] for a, b in res.failures],
    })
    _emit(args, _json_text(doc))
    return EXIT_OK


def cmd_fattening(args) -> int:
    from .analysis import fattening_experiment
    eps = float(args.eps) if args.eps is not None else 0.1
    tr = fattening_experiment(eps, args.steps, args.seed, args.y0, forced=not args.sampled)
    meta = {"scenario": "fattening", "seed": args.seed,
            "params": {"eps": eps, "horizon": args.steps, "y0": args.y0, "forced": not args.sampled,
                       "event_probability": tr.event_probability}}
    rows = [[k, repr(y), str(w), repr(du), repr(dt)] for k, y, w, du, dt in tr.steps]
    _emit(args, _csv_text(meta, ["k", "y", "state", "dist_unfattened", "dist_thickened"], rows))
    return EXIT_OK


def cmd_report(args) -> int:
    from .acceptance import run_all
    emit = None if args.quiet else (lambda line: print(line, flush=True))
    results, ctx = run_all(skip_determinism=args.skip_determinism, emit=emit)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, blob in sorted(ctx.artifacts.items()):
            (out / name).write_bytes(blob)
    failed = [r for r in results if not r.passed]
    if not args.quiet:
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAILED if failed else EXIT_OK


# -- parser -----------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    # fresh per subcommand: set_defaults on a child mutates the shared parent actions
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="jump-annulus", help="builtin name or scenario file")
    common.add_argument("--state", help="initial state, e.g. 2, 1/3, 0.5")
    common.add_argument("--steps", type=int, default=10, help="steps, horizon or iterate count")
    common.add_argument("--depth", type=int, default=2, help="word or kernel depth")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", help="reinforcement step size (fraction)")
    common.add_argument("--eps", help="truncation or thickening epsilon")
    common.add_argument("--out", help="output file (directory for report); default stdout")
    common.add_argument("--tol", type=float, default=1e-9)
    return common


def build_parser() -> argparse.ArgumentParser:

    p = _Parser(prog="rscc", description="Julia and kernel Julia sets of random systems with complete connections")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[_common()], help="sample a path with maps (CSV)")
    s.set_defaults(fn=cmd_simulate)
    s = sub.add_parser("words", parents=[_common()], help="admissible words and cylinder probabilities")
    s.set_defaults(fn=cmd_words)
    s = sub.add_parser("julia-radial", parents=[_common()], help="statewise Julia sets per radial class (CSV)")
    s.set_defaults(fn=cmd_julia_radial)

    s = sub.add_parser("julia-grid", parents=[_common()], help="pixel-grid Julia estimate (grid JSON or PPM)")
    s.add_argument("--window", default="-2.5,2.5,-2.5,2.5", help="reMin,reMax,imMin,imMax")
    s.add_argument("--res", type=int, default=256)
    s.add_argument("--samples", type=int, default=64, help="sampled words per pixel")
    s.add_argument("--path-stream", type=int, help="estimate along the single path with this stream")
    s.add_argument("--probe", type=float, help="probe offset (default width/(4 res))")
    s.add_argument("--threshold", type=float, default=0.5, help="chordal diameter threshold")
    s.add_argument("--palette", choices=("bw", "heat"), default="bw")
    s.set_defaults(fn=cmd_julia_grid, depth=40)

    s = sub.add_parser("render", parents=[_common()], help="render a grid JSON file to PPM")
    s.add_argument("--grid", required=True)
    s.add_argument("--palette", choices=("bw", "heat"), default="bw")
    s.set_defaults(fn=cmd_render)

    s = sub.add_parser("kernel", parents=[_common()], help="kernel Julia certificate (JSON)")
    s.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("operator", parents=[_common()], help="transition operator values (CSV)")
    s.add_argument("--mode", choices=("iterate", "oracle", "mc", "diagnostic"), default="iterate")
    s.add_argument("--phi", default="clip -2 2", help="one | coord | bump s0 sigma | clip lo hi")
    s.add_argument("--y", default="1.2+0.3i", help="sphere or interval point")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--radii", default="0.1,0.01,0.001,0.0001")
    s.set_defaults(fn=cmd_operator, steps=4)

    s = sub.add_parser("jump", parents=[_common()], help="emptiness-jump detection (JSON)")
    s.add_argument("--drive", default="sampled", help="'sampled' or 'forced:<index> ...'")
    s.add_argument("--conv-tol", type=float, default=1e-6)
    s.set_defaults(fn=cmd_jump, steps=50)

    s = sub.add_parser("irreducible", parents=[_common()], help="counting-measure irreducibility (JSON)")
    s.add_argument("--states", help="comma separated states")
    s.add_argument("--strict", action="store_true", help="require the set to be closed")
    s.set_defaults(fn=cmd_irreducible, depth=50)

    s = sub.add_parser("fattening", parents=[_common()], help="thickened-kernel example trace (CSV)")
    s.add_argument("--y0", type=float, default=0.1)
    s.add_argument("--sampled", action="store_true", help="sample the drive instead of forcing x1")
    s.set_defaults(fn=cmd_fattening, steps=60)

    s = sub.add_parser("report", parents=[_common()], help="run the acceptance battery")
    s.add_argument("--skip-determinism", action="store_true")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(fn=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ResourceError as exc:
        print(f"rscc: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (RsccError, DomainError, ValueError, TypeError, OSError) as exc:
        print(f"rscc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
