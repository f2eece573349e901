"""Rectangle covers, chaos-game samples, mesh box counting and rendering.

Every depth-``m`` word ``u`` maps the unit square onto an axis-parallel
rectangle ``A_u([0,1]^2)``; these rectangles cover the attractor.  Covers
are held as arrays (:class:`Cover`) since they can have millions of
members.

Mesh cells are half-open, ``[j delta, (j+1) delta)``, and the last cell of
each axis is closed so that the unit square is covered exactly.  A
rectangle ``[x0, x1] x [y0, y1]`` is counted in the cells that meet
``[x0, x1) x [y0, y1)``, which keeps shared edges of neighbouring
rectangles from being counted twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .digits import DigitPair, DigitSetSpec
from .errors import BudgetExceeded
from .luroth import linear_part, translation
from .svf import Diagonal2, DiagonalMap2

BUDGET = 10**7
BURN_IN = 64
DEFAULT_LADDER = tuple(2.0**-j for j in range(4, 13))


@dataclass(frozen=True)
class CoverRectangle:
    x0: float
    y0: float
    width: float
    height: float
    depth: int

    def contains(self, point, slack: float = 0.0) -> bool:
        w, x = point
        return (self.x0 - slack <= w <= self.x0 + self.width + slack
                and self.y0 - slack <= x <= self.y0 + self.height + slack)

    def inside(self, other: CoverRectangle, slack: float = 1e-15) -> bool:
        return (other.x0 - slack <= self.x0
                and self.x0 + self.width <= other.x0 + other.width + slack
                and other.y0 - slack <= self.y0
                and self.y0 + self.height <= other.y0 + other.height + slack)


@dataclass(frozen=True)
class Cover:
    """Depth-``m`` rectangles as parallel arrays, ordered by word.

    Word ``(i_1, ..., i_m)`` sits at index ``sum i_k n^(m-k)``, so the
    parent of rectangle ``j`` at depth ``m - 1`` has index ``j // n``.
    """

    x0: np.ndarray
    y0: np.ndarray
    width: np.ndarray
    height: np.ndarray
    depth: int

    def __len__(self):
        return int(self.x0.size)

    def __getitem__(self, j: int) -> CoverRectangle:
        return CoverRectangle(float(self.x0[j]), float(self.y0[j]),
                              float(self.width[j]), float(self.height[j]), self.depth)

    def __iter__(self) -> Iterator[CoverRectangle]:
        return (self[j] for j in range(len(self)))

    @property
    def x1(self) -> np.ndarray:
        return self.x0 + self.width

    @property
    def y1(self) -> np.ndarray:
        return self.y0 + self.height


def luroth_maps(J: DigitSetSpec, p: float) -> list[DiagonalMap2]:
    """The planar maps ``A^p_{s,d}`` for a finite digit set, in pair order."""
    if not J.is_finite:
        raise ValueError("covers need a finite digit set")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return [DiagonalMap2(Diagonal2(*linear_part(p, q)), translation(p, q)) for q in J.pairs()]


def cantor_product_maps() -> list[DiagonalMap2]:
    """Middle-1/2 Cantor set times middle-7/8 Cantor set: four maps diag(1/4, 1/16)."""
    L = Diagonal2(0.25, 1 / 16)
    return [DiagonalMap2(L, (tx, ty)) for tx in (0.0, 0.75) for ty in (0.0, 15 / 16)]


def _check_budget(n: int, m: int, budget: int):
    if n**m > budget:
        raise BudgetExceeded(f"{n}^{m} rectangles exceed the budget of {budget}")


def affine_cover(maps: Sequence[DiagonalMap2], depth: int, budget: int = BUDGET) -> Cover:
    """All images of the unit square under words of length ``depth``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = len(maps)
    _check_budget(n, depth, budget)
    a = np.array([f.linear.a for f in maps])
    b = np.array([f.linear.b for f in maps])
    tx = np.array([f.translation[0] for f in maps])
    ty = np.array([f.translation[1] for f in maps])
    # composed map z -> s z + o per axis; appending A_i on the right gives
    # s' = s a_i and o' = o + s t_i
    sx, ox = np.ones(1), np.zeros(1)
    sy, oy = np.ones(1), np.zeros(1)
    for _ in range(depth):
        ox = (ox[:, None] + sx[:, None] * tx[None, :]).ravel()
        oy = (oy[:, None] + sy[:, None] * ty[None, :]).ravel()
        sx = np.multiply.outer(sx, a).ravel()
        sy = np.multiply.outer(sy, b).ravel()
    return Cover(ox + np.minimum(sx, 0), oy + np.minimum(sy, 0), np.abs(sx), np.abs(sy), depth)


def generate_cover(J: DigitSetSpec, p: float, depth: int, budget: int = BUDGET) -> Cover:
    """Depth-``m`` rectangle cover of the planar Lüroth attractor."""
    return affine_cover(luroth_maps(J, p), depth, budget)


def interval_cover(J: DigitSetSpec, depth: int, budget: int = BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Depth-``m`` interval cover ``phi_u([0,1])`` of the restricted digit set.

    Returns the arrays of left and right endpoints.
    """
    maps = luroth_maps(J, 0.5)
    cover = affine_cover(maps, depth, budget)
    return cover.y0, cover.y1


def chaos_game(
    J: DigitSetSpec,
    p: float,
    n_points: int,
    seed: int = 0,
    burn_in: int = BURN_IN,
    return_choices: bool = False,
):
    """Sample the planar attractor by random iteration from ``(1/2, 1/2)``.

    Maps are chosen uniformly with ``numpy.random.default_rng(seed)``; the
    first ``burn_in`` iterates are discarded.  With ``return_choices`` the
    full sequence of map indices is returned as well.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    maps = luroth_maps(J, p)
    return chaos_game_maps(maps, n_points, seed, burn_in, return_choices)


def chaos_game_maps(maps, n_points, seed=0, burn_in=BURN_IN, return_choices=False):
    rng = np.random.default_rng(seed)
    total = burn_in + n_points
    choices = rng.integers(0, len(maps), size=total)
    a = [f.linear.a for f in maps]
    b = [f.linear.b for f in maps]
    tx = [f.translation[0] for f in maps]
    ty = [f.translation[1] for f in maps]
    out = np.empty((n_points, 2))
    w, x = 0.5, 0.5
    for k, i in enumerate(choices.tolist()):
        w = a[i] * w + tx[i]
        x = b[i] * x + ty[i]
        if k >= burn_in:
            out[k - burn_in] = (w, x)
    return (out, choices) if return_choices else out


# --------------------------------------------------------------------------
# box counting


@dataclass(frozen=True)
class BoxCountSeries:
    deltas: tuple
    counts: tuple
    slope: float
    fit_residual: float
    window: tuple

    @property
    def entries(self) -> list[tuple[float, int]]:
        return list(zip(self.deltas, self.counts))

    def to_csv(self) -> str:
        lines = ["delta,count,log2_delta,log2_count"]
        for d, c in self.entries:
            lines.append(f"{d!r},{c},{math.log2(d)!r},{math.log2(c)!r}")
        return "\n".join(lines) + "\n"


def _cells(delta: float) -> int:
    n = round(1 / delta)
    if not math.isclose(n * delta, 1.0, rel_tol=1e-12):
        raise ValueError("delta must be the reciprocal of an integer (use 2^-j)")
    return n


def _lower(v: np.ndarray, n: int) -> np.ndarray:
    return np.clip(np.floor(v * n), 0, n - 1).astype(np.int64)


def _upper(v: np.ndarray, n: int) -> np.ndarray:
    # last cell meeting [.., v); a degenerate side still occupies one cell
    return np.clip(np.ceil(v * n) - 1, 0, n - 1).astype(np.int64)


def count_points(points: np.ndarray, delta: float) -> int:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("empty input")
    n = _cells(delta)
    if pts.ndim == 1:
        return int(np.unique(_lower(pts, n)).size)
    ids = _lower(pts[:, 0], n) * n + _lower(pts[:, 1], n)
    return int(np.unique(ids).size)


def count_intervals(lo: np.ndarray, hi: np.ndarray, delta: float, budget: int = BUDGET) -> int:
    n = _cells(delta)
    c0 = _lower(lo, n)
    c1 = np.maximum(_upper(hi, n), c0)
    return int(np.unique(_expand_ranges(c0, c1 - c0 + 1, budget)).size)


def _expand_ranges(start: np.ndarray, length: np.ndarray, budget: int) -> np.ndarray:
    total = int(length.sum())
    if total > budget:
        raise BudgetExceeded(f"{total} mesh cells exceed the budget of {budget}")
    rep = np.repeat(np.arange(start.size), length)
    offs = np.arange(total) - np.repeat(np.cumsum(length) - length, length)
    return start[rep] + offs


RASTER_MAX = 4096


def _occupancy(r0, r1, c0, c1, n: int) -> np.ndarray:
    # 2-D difference array over inclusive index boxes, then two prefix sums
    diff = np.zeros((n + 1, n + 1), dtype=np.int32)
    np.add.at(diff, (r0, c0), 1)
    np.add.at(diff, (r0, c1 + 1), -1)
    np.add.at(diff, (r1 + 1, c0), -1)
    np.add.at(diff, (r1 + 1, c1 + 1), 1)
    np.cumsum(diff, axis=0, out=diff)
    np.cumsum(diff, axis=1, out=diff)
    return diff[:n, :n] > 0


def count_cover(cover: Cover, delta: float, budget: int = BUDGET) -> int:
    n = _cells(delta)
    cx0, cy0 = _lower(cover.x0, n), _lower(cover.y0, n)
    cx1 = np.maximum(_upper(cover.x1, n), cx0)
    cy1 = np.maximum(_upper(cover.y1, n), cy0)
    nx, ny = cx1 - cx0 + 1, cy1 - cy0 + 1
    if np.all(nx == 1) and np.all(ny == 1):
        return int(np.unique(cx0 * n + cy0).size)
    cells = nx * ny
    total = int(cells.sum())
    if total > budget:
        if n <= RASTER_MAX:
            return int(np.count_nonzero(_occupancy(cx0, cx1, cy0, cy1, n)))
        raise BudgetExceeded(f"{total} mesh cells exceed the budget of {budget}")
    rep = np.repeat(np.arange(cells.size), cells)
    k = np.arange(total) - np.repeat(np.cumsum(cells) - cells, cells)
    ids = (cx0[rep] + k // ny[rep]) * n + (cy0[rep] + k % ny[rep])
    return int(np.unique(ids).size)


def default_window(k: int) -> tuple[int, int]:
    """Drop the two largest and two smallest deltas when that leaves 3 or more."""
    return (2, k - 2) if k >= 7 else (0, k)


def fit_slope(deltas: Sequence[float], counts: Sequence[int], window=None) -> tuple[float, float, tuple]:
    """Least-squares slope of ``log2 N`` against ``-log2 delta`` over ``window``."""
    k = len(deltas)
    lo, hi = window if window is not None else default_window(k)
    if hi - lo < 2:
        raise ValueError("regression window needs at least two deltas")
    x = -np.log2(np.asarray(deltas[lo:hi], dtype=float))
    y = np.log2(np.asarray(counts[lo:hi], dtype=float))
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / x.size)) if res.size else 0.0
    return float(coef[0]), resid, (lo, hi)


Countable = Union[Cover, np.ndarray, tuple]


def box_count(data: Countable, deltas: Sequence[float] = DEFAULT_LADDER, window=None,
              budget: int = BUDGET) -> BoxCountSeries:
    """Mesh box counts over a ladder of deltas and the fitted slope.

    ``data`` is a :class:`Cover`, an ``(N, 2)`` point array, a 1-D point
    array, or a ``(lo, hi)`` pair of interval endpoint arrays.
    """
    deltas = tuple(float(d) for d in deltas)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    if isinstance(data, Cover):
        if len(data) == 0:
            raise ValueError("empty input")
        counts = [count_cover(data, d, budget) for d in deltas]
    elif isinstance(data, tuple):
        lo, hi = (np.asarray(v, dtype=float) for v in data)
        if lo.size == 0:
            raise ValueError("empty input")
        counts = [count_intervals(lo, hi, d, budget) for d in deltas]
    else:
        counts = [count_points(data, d) for d in deltas]
    slope, resid, win = fit_slope(deltas, counts, window)
    return BoxCountSeries(deltas, tuple(counts), slope, resid, win)


def ladder(j_min: int = 4, j_max: int = 12) -> tuple:
    return tuple(2.0**-j for j in range(j_min, j_max + 1))


# --------------------------------------------------------------------------
# rendering


def auto_depth(maps: Sequence[DiagonalMap2], resolution: int, budget: int = BUDGET) -> int:
    """Smallest depth whose rectangles are below one pixel, capped by the budget."""
    c = max(max(abs(f.linear.a), abs(f.linear.b)) for f in maps)
    want = math.ceil(math.log(resolution) / -math.log(c)) + 1 if c > 0 else 1
    n = len(maps)
    cap = int(math.floor(math.log(budget) / math.log(n) + 1e-12)) if n > 1 else want
    return max(0, min(want, cap))


def rasterize(cover: Cover, resolution: int) -> np.ndarray:
    """Binary occupancy grid; row 0 is the top edge ``x = 1``.

    Horizontal image axis is the first coordinate ``w``, vertical the second.
    """
    if not 1 <= resolution <= RASTER_MAX:
        raise ValueError("resolution must be in [1, 4096]")
    n = resolution
    c0 = _lower(cover.x0, n)
    c1 = np.maximum(_upper(cover.x1, n), c0)
    # rows count downwards from the top
    r0 = _lower(1.0 - cover.y1, n)
    r1 = np.maximum(_upper(1.0 - cover.y0, n), r0)
    return _occupancy(r0, r1, c0, c1, n)


def render(J: DigitSetSpec, p: float, resolution: int = 512, depth: Optional[int] = None,
           budget: int = BUDGET) -> np.ndarray:
    """Occupancy image of the depth-``m`` cover of the planar attractor."""
    maps = luroth_maps(J, p)
    if depth is None:
        depth = auto_depth(maps, resolution, budget)
    return rasterize(affine_cover(maps, depth, budget), resolution)


def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM (P5), one byte per pixel; occupied pixels are black."""
    img = np.where(np.asarray(image, dtype=bool), 0, 255).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())


def write_ppm(path, layers: Sequence[np.ndarray], colors: Sequence[tuple] = ((0, 0, 0), (220, 40, 40), (40, 90, 220))) -> None:
    """Binary PPM (P6) overlay of several occupancy images on white."""
    h, w = np.asarray(layers[0]).shape
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    for layer, col in zip(layers, colors):
        img[np.asarray(layer, dtype=bool)] = col
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode() + img.tobytes())


def read_pnm(path) -> np.ndarray:
    """Read back a P5 or P6 file written by this module."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    magic, dims, _maxval, body = parts
    w, h = (int(v) for v in dims.split())
    if magic == b"P5":
        return np.frombuffer(body, dtype=np.uint8).reshape(h, w)
    if magic == b"P6":
        return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
    raise ValueError(f"unsupported image type {magic!r}")


def word_rectangle(maps: Sequence[DiagonalMap2], word: Sequence[int]) -> CoverRectangle:
    """``A_{u_1} o ... o A_{u_m}([0,1]^2)`` for a single word."""
    f = DiagonalMap2(Diagonal2(1.0, 1.0))
    for i in word:
        f = f.then(maps[i])
    a, b = f.linear.a, f.linear.b
    tx, ty = f.translation
    return CoverRectangle(tx + min(a, 0.0), ty + min(b, 0.0), abs(a), abs(b), len(word))


FIGURE_SETS = {
    "a": "0:2;1:2",
    "b": "0:2;1:2;0:3",
    "c": "*:2,4,6",
}
