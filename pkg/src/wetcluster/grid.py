"""Raster sets and the perimeter lemmas that act on them.

``mask[i, j]`` is the cell whose lower-left corner is
``origin + (j * cell, i * cell)``; row index grows with y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import shapely.geometry as sg

from .arcs import GeometryError, Point2, cross
from .lattice.crofton import crofton_mask_perimeter


@dataclass(frozen=True)
class GridSet:
    origin: Point2
    cell: float
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.ndim != 2 or min(m.shape) < 1:
            raise GeometryError("mask must be a non-empty 2-D array")
        if not self.cell > 0:
            raise GeometryError("cell size must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "origin", Point2(*self.origin))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def area(self) -> float:
        return int(self.mask.sum()) * self.cell**2

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        h, w = self.shape
        xs = self.origin.x + (np.arange(w) + 0.5) * self.cell
        ys = self.origin.y + (np.arange(h) + 0.5) * self.cell
        return xs, ys

    def perimeter(self, stencil: int = 16, domain: np.ndarray | None = None) -> float:
        return crofton_mask_perimeter(self.mask, self.cell, stencil, domain)

    def with_mask(self, mask: np.ndarray) -> "GridSet":
        return GridSet(self.origin, self.cell, mask)

    @classmethod
    def from_predicate(cls, fn, lo: Sequence[float], hi: Sequence[float], cell: float) -> "GridSet":
        """Rasterize ``fn(x, y) -> bool array`` by cell centers over the box [lo, hi]."""
        w = int(round((hi[0] - lo[0]) / cell))
        h = int(round((hi[1] - lo[1]) / cell))
        xs = lo[0] + (np.arange(w) + 0.5) * cell
        ys = lo[1] + (np.arange(h) + 0.5) * cell
        X, Y = np.meshgrid(xs, ys)
        return cls(Point2(*lo), cell, fn(X, Y))


def _window_slices(E: GridSet, window) -> tuple[slice, slice]:
    """Row/column slices of the cells whose centers lie in window = (x0, y0, x1, y1)."""
    x0, y0, x1, y1 = window
    xs, ys = E.centers()
    cols = np.nonzero((xs >= x0) & (xs <= x1))[0]
    rows = np.nonzero((ys >= y0) & (ys <= y1))[0]
    if len(cols) == 0 or len(rows) == 0:
        raise GeometryError("window contains no cells")
    return slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1)


def runs(column: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as half-open index intervals."""
    c = np.concatenate([[False], np.asarray(column, dtype=bool), [False]])
    d = np.diff(c.astype(np.int8))
    starts = np.nonzero(d == 1)[0]
    ends = np.nonzero(d == -1)[0]
    return list(zip(starts.tolist(), ends.tolist()))


class HypothesisError(GeometryError):
    pass


def hypograph_symmetrize(E: GridSet, window, band: float = 0.25) -> GridSet:
    """Replace every column of E inside ``window`` by a bottom-anchored run.

    Requires the lowest ``band`` fraction of window rows to be full and the
    highest ``band`` fraction to be empty in every column.
    """
    rs, cs = _window_slices(E, window)
    sub = E.mask[rs, cs]
    h = sub.shape[0]
    nb = max(1, int(math.floor(band * h)))
    bad_bottom = np.nonzero(~sub[:nb].all(axis=0))[0]
    bad_top = np.nonzero(sub[h - nb :].any(axis=0))[0]
    if len(bad_bottom) or len(bad_top):
        raise HypothesisError(
            f"band hypothesis fails: columns {bad_bottom.tolist()[:5]} not full at the bottom, "
            f"columns {bad_top.tolist()[:5]} not empty at the top"
        )
    counts = sub.sum(axis=0)
    new = np.arange(h)[:, None] < counts[None, :]
    out = np.array(E.mask)
    out[rs, cs] = new
    return E.with_mask(out)


def window_perimeter(E: GridSet, window, stencil: int = 16) -> float:
    """Crofton perimeter counting only pairs with both cells inside the window."""
    rs, cs = _window_slices(E, window)
    dom = np.zeros(E.shape, dtype=bool)
    dom[rs, cs] = True
    return E.perimeter(stencil, dom)


@dataclass(frozen=True)
class Slice:
    axis: str
    index: int
    coord: float
    values: np.ndarray
    minus: np.ndarray
    plus: np.ndarray
    # coordinate intervals covered by ``values`` along the slice
    intervals: list[tuple[float, float]]

    @property
    def length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    @property
    def traces_agree(self) -> bool:
        return bool(np.array_equal(self.minus, self.plus))


def slice_traces(E: GridSet, t: float, axis: str = "vertical") -> Slice:
    """Slice E along the line x = t (vertical) or y = t (horizontal).

    The one-sided traces are approximated by the neighbouring cell lines
    (clamped at the raster edge).
    """
    xs, ys = E.centers()
    m = E.mask
    if axis == "vertical":
        lo, n = E.origin.x, m.shape[1]
        line = lambda k: m[:, k]
        along0 = E.origin.y
    elif axis == "horizontal":
        lo, n = E.origin.y, m.shape[0]
        line = lambda k: m[k, :]
        along0 = E.origin.x
    else:
        raise ValueError("axis must be 'vertical' or 'horizontal'")
    hi = lo + n * E.cell
    if not lo <= t <= hi:
        raise GeometryError(f"slice coordinate {t} outside [{lo}, {hi}]")
    k = min(n - 1, int((t - lo) / E.cell))
    vals = line(k).copy()
    minus = line(max(k - 1, 0)).copy()
    plus = line(min(k + 1, n - 1)).copy()
    iv = [(along0 + a * E.cell, along0 + b * E.cell) for a, b in runs(vals)]
    return Slice(axis, k, lo + (k + 0.5) * E.cell, vals, minus, plus, iv)


def is_convex_polygon(points) -> bool:
    """Turning-direction scan; collinear vertices are tolerated."""
    pts = [Point2(*p) for p in points]
    n = len(pts)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        z = cross(pts[(i + 1) % n] - pts[i], pts[(i + 2) % n] - pts[(i + 1) % n])
        if abs(z) < 1e-14:
            continue
        s = 1 if z > 0 else -1
        if sign and s != sign:
            return False
        sign = s
    if sign == 0:
        return False
    # winding must be one full turn, which excludes star-shaped self overlaps
    total = 0.0
    for i in range(n):
        a = pts[(i + 1) % n] - pts[i]
        b = pts[(i + 2) % n] - pts[(i + 1) % n]
        total += math.atan2(cross(a, b), a.x * b.x + a.y * b.y)
    return abs(abs(total) - 2 * math.pi) < 1e-6


@dataclass(frozen=True)
class ClipReport:
    clipped: object
    perimeter_in: float
    perimeter_out: float
    area_removed: float

    @property
    def strict(self) -> bool:
        return self.perimeter_out < self.perimeter_in * (1 - 1e-12)

    @property
    def inequality_holds(self) -> bool:
        return self.perimeter_out <= self.perimeter_in * (1 + 1e-12) + 1e-15


def convex_clip(E, K, stencil: int = 16) -> ClipReport:
    """Intersect E (polygon vertex list or GridSet) with the convex polygon K."""
    if not is_convex_polygon(K):
        raise GeometryError("clip polygon is not convex")
    kpoly = sg.Polygon(K)
    if isinstance(E, GridSet):
        xs, ys = E.centers()
        X, Y = np.meshgrid(xs, ys)
        inside = _points_in_convex(np.asarray(K, dtype=float), X, Y)
        out = E.with_mask(E.mask & inside)
        removed = int((E.mask & ~inside).sum()) * E.cell**2
        return ClipReport(out, E.perimeter(stencil), out.perimeter(stencil), removed)
    poly = E if isinstance(E, sg.base.BaseGeometry) else sg.Polygon(E)
    if not poly.is_valid:
        raise GeometryError("subject polygon is not simple")
    if kpoly.covers(poly):
        return ClipReport(poly, poly.length, poly.length, 0.0)
    inter = poly.intersection(kpoly)
    return ClipReport(inter, poly.length, inter.length, poly.difference(kpoly).area)


def _points_in_convex(K: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    orient = np.sign(sum(cross(K[i], K[(i + 1) % len(K)]) for i in range(len(K))))
    inside = np.ones(X.shape, dtype=bool)
    for i in range(len(K)):
        a, b = K[i], K[(i + 1) % len(K)]
        z = (b[0] - a[0]) * (Y - a[1]) - (b[1] - a[1]) * (X - a[0])
        inside &= orient * z >= 0
    return inside
