"""Exact geometry of circular arcs and closed arc chains.

Arcs are stored as two endpoints plus a signed curvature.  Positive
curvature means the arc turns counter-clockwise when walked from ``start``
to ``end`` (its center lies to the left of the chord); zero is a straight
segment.  Only minor arcs (at most a half circle) are representable, so a
full circle is two arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent geometric input."""


class Point2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Point2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point2(self.x - other[0], self.y - other[1])

    def scale(self, s: float) -> "Point2":
        return Point2(self.x * s, self.y * s)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def rotate(self, angle: float) -> "Point2":
        c, s = math.cos(angle), math.sin(angle)
        return Point2(c * self.x - s * self.y, s * self.x + c * self.y)


def unit(angle: float) -> Point2:
    return Point2(math.cos(angle), math.sin(angle))


def cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1]


# below this value of |curvature| * chord the arcsine is replaced by its series
_SERIES_CUTOFF = 1e-6


def _half_angle(k: float, chord: float) -> float:
    """Half of the subtended angle of an arc with |curvature| k and given chord."""
    s = k * chord / 2.0
    if s > 1.0:
        if s - 1.0 > 1e-12:
            raise GeometryError(f"chord {chord!r} too long for curvature {k!r}")
        s = 1.0
    return math.asin(s)


@dataclass(frozen=True)
class CircArc:
    start: Point2
    end: Point2
    curvature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "start", Point2(float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", Point2(float(self.end[0]), float(self.end[1])))
        if not all(map(math.isfinite, (*self.start, *self.end, self.curvature))):
            raise GeometryError("non-finite arc data")
        if abs(self.curvature) * self.chord > 2.0 + 1e-12:
            raise GeometryError(
                f"chord {self.chord:.6g} does not fit a circle of curvature {self.curvature:.6g}"
            )

    @property
    def chord(self) -> float:
        return (self.end - self.start).norm()

    @property
    def half_angle(self) -> float:
        return _half_angle(abs(self.curvature), self.chord)

    @property
    def angle(self) -> float:
        """Unsigned subtended angle in radians (0 for segments)."""
        return 2.0 * self.half_angle

    @property
    def radius(self) -> float:
        return math.inf if self.curvature == 0 else 1.0 / abs(self.curvature)

    def center(self) -> Point2:
        k = self.curvature
        if k == 0:
            raise GeometryError("a straight segment has no center")
        c = self.chord
        r = 1.0 / abs(k)
        h = math.sqrt(max(r * r - c * c / 4.0, 0.0))
        mid = (self.start + self.end).scale(0.5)
        d = (self.end - self.start).scale(1.0 / c)
        left = Point2(-d.y, d.x)
        return mid + left.scale(math.copysign(h, k))

    def reversed(self) -> "CircArc":
        return CircArc(self.end, self.start, -self.curvature)

    def point_at(self, t: float) -> Point2:
        """Point at fraction ``t`` of the arc length from ``start``."""
        if self.curvature == 0:
            return self.start + (self.end - self.start).scale(t)
        c = self.center()
        a0 = math.atan2(self.start.y - c.y, self.start.x - c.x)
        sweep = math.copysign(self.angle, self.curvature)
        return c + unit(a0 + t * sweep).scale(self.radius)

    def sample(self, n: int, *, endpoint: bool = True) -> np.ndarray:
        ts = np.linspace(0.0, 1.0, n + 1 if endpoint else n, endpoint=endpoint)
        if self.curvature == 0:
            s = np.asarray(self.start)
            return s + np.outer(ts, np.asarray(self.end) - s)
        c = self.center()
        a0 = math.atan2(self.start.y - c.y, self.start.x - c.x)
        sweep = math.copysign(self.angle, self.curvature)
        ang = a0 + ts * sweep
        return np.column_stack([c.x + self.radius * np.cos(ang), c.y + self.radius * np.sin(ang)])


def arc_length(a: CircArc) -> float:
    c = a.chord
    k = abs(a.curvature)
    x = k * c
    if x < _SERIES_CUTOFF:
        # 2 asin(x/2)/k expanded in x
        return c * (1.0 + x * x / 24.0)
    return a.angle / k


def _th_minus_sin(th: float) -> float:
    """th - sin(th) without the cancellation at small angles."""
    if th > 0.1:
        return th - math.sin(th)
    t2 = th * th
    # alternating series; the next term is below 1e-22 relative for th <= 0.1
    return th * t2 / 6 * (1 - t2 / 20 * (1 - t2 / 42 * (1 - t2 / 72 * (1 - t2 / 110))))


def segment_area(a: CircArc) -> float:
    """Signed area between the arc and its chord.

    Positive when the arc bulges to the right of the chord, i.e. outward for
    a counter-clockwise boundary.
    """
    k = a.curvature
    if k == 0:
        return 0.0
    c = a.chord
    x = abs(k) * c
    if x < _SERIES_CUTOFF:
        # R^2 (th - sin th)/2 with th = 2 asin(x/2) ~ x + x^3/24
        return math.copysign(c**3 * abs(k) / 12.0, k)
    th = a.angle
    r = 1.0 / abs(k)
    return math.copysign(0.5 * r * r * _th_minus_sin(th), k)


def endpoint_tangent(a: CircArc, at_start: bool = True) -> Point2:
    c = a.chord
    if c == 0:
        raise GeometryError("zero-length arc has no tangent")
    d = (a.end - a.start).scale(1.0 / c)
    if a.curvature == 0:
        return d
    # the arc leaves the chord by the half angle on the side opposite its center
    alpha = a.half_angle * (1.0 if a.curvature > 0 else -1.0)
    return d.rotate(-alpha if at_start else alpha)


@dataclass(frozen=True)
class ArcChain:
    arcs: tuple[CircArc, ...]
    closed: bool = True

    def __post_init__(self):
        arcs = tuple(self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if not arcs:
            raise GeometryError("empty chain")
        pairs = zip(arcs, arcs[1:] + (arcs[:1] if self.closed else ()))
        for a, b in pairs:
            if (a.end - b.start).norm() > 1e-9 * max(1.0, a.end.norm()):
                raise GeometryError(f"chain is not connected at {a.end} / {b.start}")

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self):
        return len(self.arcs)

    @property
    def vertices(self) -> list[Point2]:
        return [a.start for a in self.arcs]

    def length(self) -> float:
        return sum(arc_length(a) for a in self.arcs)

    def signed_area(self) -> float:
        if not self.closed:
            raise GeometryError("area of an open chain")
        shoelace = sum(cross(a.start, a.end) for a in self.arcs) / 2.0
        return shoelace + sum(segment_area(a) for a in self.arcs)

    def reversed(self) -> "ArcChain":
        return ArcChain(tuple(a.reversed() for a in reversed(self.arcs)), self.closed)

    def polyline(self, max_step: float = 1e-3, min_per_arc: int = 1) -> np.ndarray:
        """Dense vertex list; closed chains do not repeat the first vertex."""
        pts = []
        for a in self.arcs:
            n = max(min_per_arc, int(math.ceil(arc_length(a) / max_step))) if a.curvature else 1
            pts.append(a.sample(n)[:-1])
        if not self.closed:
            pts.append(np.asarray([self.arcs[-1].end]))
        return np.concatenate(pts)


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = cross(p2 - p1, q1 - p1)
    d2 = cross(p2 - p1, q2 - p1)
    d3 = cross(q2 - q1, p1 - q1)
    d4 = cross(q2 - q1, p2 - q1)
    return d1 * d2 < 0 and d3 * d4 < 0


def is_simple(chain: ArcChain, step: float | None = None) -> bool:
    """Self-intersection test on a dense polyline approximation."""
    if step is None:
        step = chain.length() / 2000.0
    pts = chain.polyline(max_step=step, min_per_arc=8)
    n = len(pts)
    if n < 3:
        return False
    a = pts
    b = np.roll(pts, -1, axis=0) if chain.closed else pts[1:]
    if not chain.closed:
        a = pts[:-1]
    m = len(a)
    for i in range(m):
        p1, p2 = a[i], b[i]
        q1, q2 = a[i + 2 :], b[i + 2 :]
        if chain.closed and i == 0:
            q1, q2 = q1[:-1], q2[:-1]
        if len(q1) == 0:
            continue
        e = p2 - p1
        d1 = e[0] * (q1[:, 1] - p1[1]) - e[1] * (q1[:, 0] - p1[0])
        d2 = e[0] * (q2[:, 1] - p1[1]) - e[1] * (q2[:, 0] - p1[0])
        f = q2 - q1
        d3 = f[:, 0] * (p1[1] - q1[:, 1]) - f[:, 1] * (p1[0] - q1[:, 0])
        d4 = f[:, 0] * (p2[1] - q1[:, 1]) - f[:, 1] * (p2[0] - q1[:, 0])
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return False
    return True


def chain_area(c: ArcChain, *, check_simple: bool = False) -> float:
    if not c.closed:
        raise GeometryError("chain_area needs a closed chain")
    if check_simple and not is_simple(c):
        raise GeometryError("chain is self-intersecting")
    return abs(c.signed_area())


def polygon_chain(points: Sequence) -> ArcChain:
    pts = [Point2(*p) for p in points]
    return ArcChain(tuple(CircArc(p, q) for p, q in zip(pts, pts[1:] + pts[:1])))


def circle_chain(center, r: float) -> ArcChain:
    c = Point2(*center)
    a, b = c + (r, 0.0), c - (r, 0.0)
    return ArcChain((CircArc(a, b, 1.0 / r), CircArc(b, a, 1.0 / r)))


def boundary_arcs(a0: float, a1: float, radius: float = 1.0) -> list[CircArc]:
    """Counter-clockwise arcs of the circle |x| = radius from angle a0 to a1.

    Pieces are split so that none exceeds a half circle.
    """
    sweep = (a1 - a0) % (2 * math.pi)
    if sweep == 0:
        sweep = 2 * math.pi
    n = max(1, int(math.ceil(sweep / (math.pi * 0.999))))
    angles = [a0 + sweep * i / n for i in range(n + 1)]
    pts = [unit(t).scale(radius) for t in angles]
    return [CircArc(p, q, 1.0 / radius) for p, q in zip(pts, pts[1:])]


@dataclass(frozen=True)
class CurvilinearTriangle:
    """Region between three mutually tangent circles of radius ``r``."""

    chain: ArcChain
    center: Point2
    cusps: tuple[Point2, Point2, Point2]
    circle_centers: tuple[Point2, Point2, Point2]
    r: float

    @property
    def area(self) -> float:
        return (math.sqrt(3) - math.pi / 2) * self.r**2

    @property
    def arc_length(self) -> float:
        return math.pi / 3 * self.r


def curvilinear_triangle(r: float, center=(0.0, 0.0), rotation: float = 0.0) -> CurvilinearTriangle:
    """Three-arc cusped region at ``center``.

    With ``rotation = 0`` the cusps sit in the directions 90, 210 and 330
    degrees, at distance r/sqrt(3) from ``center``; the circle centers sit at
    distance 2r/sqrt(3) in the directions 30, 150 and 270 degrees.
    """
    if r < 0:
        raise GeometryError("radius must be non-negative")
    c0 = Point2(*center)
    cusp_dirs = [math.pi / 2 + rotation + k * 2 * math.pi / 3 for k in range(3)]
    cusps = tuple(c0 + unit(t).scale(r / math.sqrt(3)) for t in cusp_dirs)
    centers = tuple(c0 + unit(t + math.pi / 3).scale(2 * r / math.sqrt(3)) for t in cusp_dirs)
    if r == 0:
        return CurvilinearTriangle(None, c0, cusps, centers, 0.0)  # type: ignore[arg-type]
    # walk the boundary counter-clockwise around the region; every arc bulges
    # into the region, so it turns clockwise
    arcs = tuple(CircArc(cusps[k], cusps[(k + 1) % 3], -1.0 / r) for k in range(3))
    return CurvilinearTriangle(ArcChain(arcs), c0, cusps, centers, float(r))
