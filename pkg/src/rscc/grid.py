"""Pixel-grid Julia/Fatou classification for sampled compositions.

Each pixel centre carries a four-point probe stencil ``y +- h, y +- ih``.
Along a composition sequence the stencil's chordal diameter is tracked; a
diameter above the threshold while the centre orbit has stayed inside the
annulus ``1e-8 <= |z| <= 1e8`` marks a Julia candidate.  A centre that
leaves the annulus monotonically for five consecutive steps is escaping
(toward 0 or infinity).  Work is split into fixed pixel blocks so the
output does not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import InvalidArgument, UnsupportedMap
from .maps import Constant, Monomial, PolynomialC, LOG_POLAR_DEGREE
from .scenario import PathSample, ScenarioSpec, sample_path_with_maps

UNKNOWN, FATOU_ATTRACTING, FATOU_ESCAPING, JULIA = 0, 1, 2, 3
LABELS = {"unknown": UNKNOWN, "fatou-attracting": FATOU_ATTRACTING,
          "fatou-escaping": FATOU_ESCAPING, "julia": JULIA}
LABEL_NAMES = {v: k for k, v in LABELS.items()}

ANNULUS_LO = 1e-8
ANNULUS_HI = 1e8
ESCAPE_STREAK = 5
DIAM_THRESHOLD = 0.5
BLOCK = 4096  # pixels per work unit; fixed so results are thread-count independent
_SELECT_LANE = 7


@dataclass(frozen=True)
class GridWindow:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    resolution: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidArgument("window needs reMin < reMax and imMin < imMax")
        if int(self.resolution) != self.resolution or self.resolution < 8:
            raise InvalidArgument("resolution must be an integer >= 8")

    @classmethod
    def parse(cls, text: str, resolution: int) -> "GridWindow":
        parts = [float(t) for t in text.split(",")]
        if len(parts) != 4:
            raise InvalidArgument("window is reMin,reMax,imMin,imMax")
        return cls(*parts, resolution)

    @property
    def pixel_width(self) -> float:
        return (self.re_max - self.re_min) / self.resolution

    @property
    def pixel_height(self) -> float:
        return (self.im_max - self.im_min) / self.resolution

    def centers(self) -> np.ndarray:
        """Pixel centres, row 0 at the top (``im_max``)."""
        n = self.resolution
        re = self.re_min + (np.arange(n) + 0.5) * self.pixel_width
        im = self.im_max - (np.arange(n) + 0.5) * self.pixel_height
        return re[None, :] + 1j * im[:, None]

    def default_probe(self) -> float:
        return (self.re_max - self.re_min) / (4 * self.resolution)

    def as_text(self) -> str:
        return f"{self.re_min!r},{self.re_max!r},{self.im_min!r},{self.im_max!r}"


@dataclass(frozen=True, eq=False)
class MembershipGrid:
    window: GridWindow
    labels: np.ndarray       # int8, (res, res)
    diagnostics: np.ndarray  # float64 max probe diameter, (res, res)
    params: tuple = field(default=())

    def count(self, label: str) -> int:
        return int(np.count_nonzero(self.labels == _code(label)))


def _code(label) -> int:
    if isinstance(label, str):
        try:
            return LABELS[label.lower()]
        except KeyError:
            raise InvalidArgument(f"unknown label {label!r}; use {', '.join(LABELS)}") from None
    return int(label)


# -- vectorised map evaluation ---------------------------------------------------------


def _normalise(z: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(z)
    if bad.any():
        z = z.copy()
        z[bad] = np.inf
    return z


def apply_map_array(m, z: np.ndarray) -> np.ndarray:
    """``m`` applied elementwise; infinity is stored as ``inf + 0j``."""
    with np.errstate(all="ignore"):
        if isinstance(m, Constant):
            return np.full(z.shape, complex(m.value), dtype=np.complex128)
        if isinstance(m, Monomial):
            if m.degree > LOG_POLAR_DEGREE:
                a = np.abs(z)
                logr = m.degree * np.log(a) + m.log_coeff
                ang = m.degree * np.angle(z)
                out = np.exp(logr) * np.exp(1j * ang)
                out[a == 0] = 0
            else:
                w = z
                for _ in range(m.degree - 1):
                    w = w * z
                out = m.coeff * w
            out[~np.isfinite(z)] = np.inf
            return _normalise(out)
        if isinstance(m, PolynomialC):
            acc = np.zeros_like(z)
            for c in reversed(m.coeffs):
                acc = acc * z + c
            acc[~np.isfinite(z)] = np.inf
            return _normalise(acc)
    raise UnsupportedMap(f"grid estimation needs sphere maps, got {type(m).__name__}")


def chordal_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        ia, ib = ~np.isfinite(a), ~np.isfinite(b)
        na, nb = np.abs(a), np.abs(b)
        d = 2.0 * np.abs(a - b) / (np.hypot(1.0, na) * np.hypot(1.0, nb))
        d = np.where(ia & ~ib, 2.0 / np.hypot(1.0, nb), d)
        d = np.where(ib & ~ia, 2.0 / np.hypot(1.0, na), d)
        d = np.where(ia & ib, 0.0, d)
        return np.nan_to_num(d, nan=0.0)


_STENCIL = np.array([1, -1, 1j, -1j])
_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def _project(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stereographic projection to the unit sphere; infinity goes to the north pole.

    Euclidean distance between projections is the chordal distance.
    """
    with np.errstate(all="ignore"):
        t = z.real * z.real + z.imag * z.imag
        q = 2.0 / (t + 1.0)
        x = np.nan_to_num(z.real * q, nan=0.0)
        y = np.nan_to_num(z.imag * q, nan=0.0)
        return x, y, 1.0 - q


def _stencil_diameter(p: np.ndarray) -> np.ndarray:
    x, y, h = _project(p)
    out = np.zeros(p.shape[0])
    for i, j in _PAIRS:
        d = (x[:, i] - x[:, j]) ** 2 + (y[:, i] - y[:, j]) ** 2 + (h[:, i] - h[:, j]) ** 2
        np.maximum(out, d, out=out)
    return np.sqrt(out)


def _run_sequence(maps, centers: np.ndarray, h: float, thr: float):
    """Probe one composition sequence on a batch of centres.

    Returns ``(julia, fate, maxdiam)``: ``fate`` is -1 (escaped to 0),
    +1 (escaped to infinity) or 0.
    """
    n = centers.shape[0]
    julia = np.zeros(n, dtype=bool)
    fate = np.zeros(n, dtype=np.int8)
    maxdiam = np.zeros(n)
    idx = np.arange(n)
    # column 0 is the centre, columns 1..4 the stencil
    pts = np.empty((n, 5), dtype=np.complex128)
    pts[:, 0] = centers
    pts[:, 1:] = centers[:, None] + h * _STENCIL[None, :]
    inside_so_far = np.ones(n, dtype=bool)
    streak = np.zeros(n, dtype=np.int64)
    sdir = np.zeros(n, dtype=np.int8)
    prev = np.abs(centers)
    for m in maps:
        if idx.size == 0:
            break
        pts = apply_map_array(m, pts)
        a = np.abs(pts[:, 0])
        inside = (a >= ANNULUS_LO) & (a <= ANNULUS_HI)
        inside_so_far &= inside
        hit = np.zeros(idx.size, dtype=bool)
        tr = np.nonzero(inside_so_far)[0]
        if tr.size:
            diam = _stencil_diameter(pts[tr, 1:])
            gi = idx[tr]
            maxdiam[gi] = np.maximum(maxdiam[gi], diam)
            hit[tr] = diam > thr
            julia[gi[diam > thr]] = True
        down = (a < ANNULUS_LO) & (a <= prev)
        up = (a > ANNULUS_HI) & (a >= prev)
        step_dir = np.where(down, -1, np.where(up, 1, 0)).astype(np.int8)
        streak = np.where(step_dir == 0, 0, np.where(step_dir == sdir, streak + 1, 1))
        sdir = step_dir
        esc = (streak >= ESCAPE_STREAK) & ~hit
        fate[idx[esc]] = sdir[esc]
        keep = ~(hit | esc)
        if not keep.all():
            idx, pts, prev = idx[keep], pts[keep], a[keep]
            inside_so_far, streak, sdir = inside_so_far[keep], streak[keep], sdir[keep]
        else:
            prev = a
    return julia, fate, maxdiam


def _threads() -> int:
    env = os.environ.get("RSCC_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidArgument(f"RSCC_THREADS={env!r} is not an integer") from None
        if n < 1:
            raise InvalidArgument("RSCC_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _blocks(n: int):
    return [(s, min(s + BLOCK, n)) for s in range(0, n, BLOCK)]


def _parallel(fn, n: int) -> list:
    blocks = _blocks(n)
    workers = min(_threads(), len(blocks))
    if workers <= 1:
        return [fn(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda ab: fn(*ab), blocks))


def _combine(julia_any, esc_zero, esc_inf, samples) -> np.ndarray:
    labels = np.full(julia_any.shape, UNKNOWN, dtype=np.int8)
    done = (esc_zero + esc_inf) == samples
    labels[done & (esc_inf > 0)] = FATOU_ESCAPING
    labels[done & (esc_inf == 0)] = FATOU_ATTRACTING
    labels[julia_any] = JULIA
    return labels


def _check_sphere(maps) -> None:
    for m in maps:
        if not isinstance(m, (Monomial, PolynomialC, Constant)):
            raise UnsupportedMap(f"grid estimation needs sphere maps, got {type(m).__name__}")


def estimate_julia_grid(spec: ScenarioSpec, w, window: GridWindow, max_depth: int = 40,
                        word_samples: int = 64, probe_offset: float | None = None,
                        diam_threshold: float = DIAM_THRESHOLD, seed: int = 0,
                        pool_size: int | None = None) -> MembershipGrid:
    """Family estimate at state ``w`` from sampled admissible map sequences.

    A pool of ``pool_size`` paths (streams ``0..pool_size-1``) is drawn once;
    every pixel uses ``word_samples`` of them chosen by a hash of
    ``(seed, pixel, j)``.  With ``word_samples >= pool_size`` every pixel uses
    the whole pool.
    """
    if not spec.on_sphere:
        raise UnsupportedMap(f"scenario {spec.name} does not act on the sphere")
    if max_depth < 1 or word_samples < 1:
        raise InvalidArgument("max_depth and word_samples must be >= 1")
    pool_size = pool_size or max(word_samples, 64)
    h = window.default_probe() if probe_offset is None else float(probe_offset)
    pool = [sample_path_with_maps(spec, w, max_depth, seed, stream=s).maps for s in range(pool_size)]
    for maps in pool:
        _check_sphere(maps)
    centers = window.centers().ravel()
    npix = centers.size
    use_all = word_samples >= pool_size
    samples = pool_size if use_all else word_samples

    def block(a: int, b: int):
        c = centers[a:b]
        n = b - a
        if use_all:
            sel = np.broadcast_to(np.arange(pool_size), (n, pool_size))
        else:
            pix = np.arange(a, b, dtype=np.uint64)[:, None]
            j = np.arange(word_samples, dtype=np.uint64)[None, :]
            u = rng.uniform_array(seed, pix, j, _SELECT_LANE)
            sel = np.minimum((u * pool_size).astype(np.int64), pool_size - 1)
        julia_any = np.zeros(n, dtype=bool)
        esc_zero = np.zeros(n, dtype=np.int64)
        esc_inf = np.zeros(n, dtype=np.int64)
        maxdiam = np.zeros(n)
        for s in range(pool_size):
            mult = (sel == s).sum(axis=1)
            rows = np.nonzero(mult)[0]
            if rows.size == 0:
                continue
            jl, fate, md = _run_sequence(pool[s], c[rows], h, diam_threshold)
            julia_any[rows] |= jl
            esc_zero[rows] += (fate < 0) * mult[rows]
            esc_inf[rows] += (fate > 0) * mult[rows]
            maxdiam[rows] = np.maximum(maxdiam[rows], md)
        return _combine(julia_any, esc_zero, esc_inf, samples), maxdiam

    parts = _parallel(block, npix)
    labels = np.concatenate([p[0] for p in parts]).reshape(window.resolution, window.resolution)
    diag = np.concatenate([p[1] for p in parts]).reshape(window.resolution, window.resolution)
    params = (("scenario", spec.name), ("state", str(w)), ("max_depth", max_depth),
              ("word_samples", word_samples), ("pool_size", pool_size), ("probe_offset", h),
              ("diam_threshold", diam_threshold), ("seed", seed))
    return MembershipGrid(window, labels, diag, params)


def estimate_path_julia_grid(path: PathSample, window: GridWindow, probe_offset: float | None = None,
                             diam_threshold: float = DIAM_THRESHOLD) -> MembershipGrid:
    """Estimate along the single composition sequence of ``path``."""
    _check_sphere(path.maps)
    h = window.default_probe() if probe_offset is None else float(probe_offset)
    centers = window.centers().ravel()

    def block(a: int, b: int):
        jl, fate, md = _run_sequence(path.maps, centers[a:b], h, diam_threshold)
        return _combine(jl, (fate < 0).astype(np.int64), (fate > 0).astype(np.int64), 1), md

    parts = _parallel(block, centers.size)
    res = window.resolution
    labels = np.concatenate([p[0] for p in parts]).reshape(res, res)
    diag = np.concatenate([p[1] for p in parts]).reshape(res, res)
    params = (("path_seed", path.seed), ("path_stream", path.stream), ("depth", len(path)),
              ("probe_offset", h), ("diam_threshold", diam_threshold))
    return MembershipGrid(window, labels, diag, params)


def pixel_measure(grid: MembershipGrid, label="julia") -> float:
    """Fraction of pixels carrying ``label``."""
    return float(np.count_nonzero(grid.labels == _code(label))) / grid.labels.size


# -- output -----------------------------------------------------------------------------


def _heat(grid: MembershipGrid) -> np.ndarray:
    t = np.clip(np.nan_to_num(grid.diagnostics) / DIAM_THRESHOLD, 0.0, 1.0)
    rgb = np.zeros(grid.labels.shape + (3,), dtype=np.float64)
    lab = grid.labels
    rgb[lab == JULIA] = np.array([255.0, 255.0, 255.0])
    rgb[..., 0] = np.where(lab == JULIA, 255.0, np.where(lab == UNKNOWN, 96.0 + 96.0 * t, 160.0 * t))
    rgb[..., 1] = np.where(lab == JULIA, 220.0 - 100.0 * t, np.where(lab == UNKNOWN, 96.0, 40.0 * t))
    rgb[..., 2] = np.where(lab == JULIA, 40.0, np.where(lab == FATOU_ATTRACTING, 120.0 + 100.0 * t,
                                                         np.where(lab == UNKNOWN, 96.0, 30.0)))
    return np.rint(rgb).astype(np.uint8)


def render_ppm(grid: MembershipGrid, palette: str = "bw", comment: str | None = None) -> bytes:
    """Binary PPM: ``P6`` header then RGB rows from the top of the window.

    An optional ``comment`` becomes a ``#`` line after the magic number.
    """
    if palette == "bw":
        val = np.where(grid.labels == JULIA, 0, 255).astype(np.uint8)
        rgb = np.repeat(val[..., None], 3, axis=2)
    elif palette == "heat":
        rgb = _heat(grid)
    else:
        raise InvalidArgument(f"unknown palette {palette!r}; use bw or heat")
    h, w = grid.labels.shape
    head = "P6\n" + (f"# {' '.join(comment.split())}\n" if comment else "") + f"{w} {h}\n255\n"
    return head.encode("utf-8") + np.ascontiguousarray(rgb).tobytes()


def radial_profile(grid: MembershipGrid, bins: int | None = None) -> list[tuple[float, float]]:
    """``(radius, julia_fraction)`` over rings of width one pixel about the origin."""
    c = grid.window.centers()
    r = np.abs(c).ravel()
    dr = grid.window.pixel_width
    nb = bins or int(math.ceil(r.max() / dr))
    k = np.minimum((r / dr).astype(np.int64), nb - 1)
    tot = np.bincount(k, minlength=nb)
    jul = np.bincount(k, weights=(grid.labels.ravel() == JULIA).astype(float), minlength=nb)
    return [((i + 0.5) * dr, float(jul[i] / tot[i])) for i in range(nb) if tot[i] > 0]


def julia_radii(grid: MembershipGrid) -> np.ndarray:
    """Moduli of the Julia-candidate pixel centres."""
    return np.abs(grid.window.centers()[grid.labels == JULIA])
