"""Instances, arc-level clusters and their exact energy."""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .arcs import ArcChain, CircArc, Point2, arc_length, boundary_arcs, unit

G = "G"
Label = Union[int, str]
TWO_PI = 2 * math.pi


class ClusterError(ValueError):
    pass


class SpecError(ValueError):
    """Malformed instance description; ``where`` names the offending field."""

    def __init__(self, msg: str, where: str = ""):
        super().__init__(f"{where}: {msg}" if where else msg)
        self.where = where


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class Weights:
    c: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        object.__setattr__(self, "c", c)
        if len(c) < 2:
            raise SpecError("need weights for S_0 and at least one chamber", "weights")
        if not all(math.isfinite(x) and x > 0 for x in c):
            raise SpecError("weights must be finite and positive", "weights")

    @property
    def n_chambers(self) -> int:
        return len(self.c) - 1

    def of(self, label: Label) -> float:
        return 0.0 if label == G else self.c[label]

    def pair(self, a: Label, b: Label) -> float:
        return 0.0 if a == b else self.of(a) + self.of(b)

    @property
    def equal(self) -> bool:
        return max(self.c[1:]) - min(self.c[1:]) <= 1e-15 * max(self.c[1:])

    @classmethod
    def uniform(cls, n: int) -> "Weights":
        return cls((1.0,) * (n + 1))


@dataclass(frozen=True)
class TriangleReport:
    ok: bool
    violation: tuple[int, int, int] | None = None


def check_triangle(c: Weights | Sequence[float]) -> TriangleReport:
    """Strict triangle inequalities c_lm < c_li + c_im over all distinct triples."""
    cs = c.c if isinstance(c, Weights) else tuple(float(x) for x in c)
    n = len(cs)
    for l, m, i in itertools.permutations(range(n), 3):
        if not cs[l] + cs[m] < (cs[l] + cs[i]) + (cs[i] + cs[m]):
            return TriangleReport(False, (l, m, i))
    if n == 2 and not all(x > 0 for x in cs):
        # no triple exists; fall back to the equivalent positivity test
        return TriangleReport(False, None)
    return TriangleReport(True)


@dataclass(frozen=True)
class BoundaryArc:
    start: float
    end: float  # end > start, possibly past 2 pi
    label: int

    def points(self) -> tuple[Point2, Point2]:
        return unit(self.start), unit(self.end)

    def contains_angle(self, a: float) -> bool:
        a = (a - self.start) % TWO_PI
        return 0 < a < self.end - self.start


@dataclass(frozen=True)
class BoundaryTrace:
    """Piecewise constant boundary labels.

    ``jumps[i] = (angle, label)``: the counter-clockwise arc starting at
    ``angle`` carries ``label`` until the next jump.  A single entry encodes
    a constant trace.
    """

    jumps: tuple[tuple[float, int], ...]

    def __post_init__(self):
        jumps = tuple((float(a), int(l)) for a, l in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        if not jumps:
            raise SpecError("trace needs at least one entry", "trace")
        angles = [a for a, _ in jumps]
        for i, (a, l) in enumerate(jumps):
            if not 0 <= a < TWO_PI:
                raise SpecError(f"angle {a} outside [0, 2pi)", f"trace[{i}].angle")
            if l < 1:
                raise SpecError("labels are 1-based", f"trace[{i}].label")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise SpecError("angles must be strictly increasing", "trace")
        if len(jumps) > 1:
            for i in range(len(jumps)):
                if jumps[i][1] == jumps[i - 1][1]:
                    raise SpecError("adjacent labels must differ", f"trace[{i}].label")

    @property
    def n_jumps(self) -> int:
        return 0 if len(self.jumps) == 1 else len(self.jumps)

    @property
    def labels(self) -> list[int]:
        return [l for _, l in self.jumps]

    @property
    def angles(self) -> list[float]:
        return [a for a, _ in self.jumps]

    def label_at(self, angle: float) -> int:
        a = angle % TWO_PI
        k = bisect.bisect_right(self.angles, a) - 1
        return self.jumps[k][1]  # k = -1 wraps to the last arc

    def jump_points(self) -> list[Point2]:
        return [unit(a) for a in self.angles] if self.n_jumps else []

    def arcs(self) -> list[BoundaryArc]:
        if not self.n_jumps:
            a = self.jumps[0][0]
            return [BoundaryArc(a, a + TWO_PI, self.jumps[0][1])]
        n = len(self.jumps)
        out = []
        for i, (a, l) in enumerate(self.jumps):
            b = self.jumps[(i + 1) % n][0]
            if b <= a:
                b += TWO_PI
            out.append(BoundaryArc(a, b, l))
        return out

    def rotated(self, phi: float) -> "BoundaryTrace":
        js = sorted(((a + phi) % TWO_PI, l) for a, l in self.jumps)
        return BoundaryTrace(tuple(js))

    def in_segment(self, x: np.ndarray, y: np.ndarray, arc: BoundaryArc) -> np.ndarray:
        """Points strictly inside the circular segment cut off by ``arc``'s chord."""
        inside = x * x + y * y < 1.0
        if arc.end - arc.start >= TWO_PI - 1e-15:
            return inside
        p, q = arc.points()
        # segment lies to the right of the chord walked p -> q (arc is ccw)
        side = (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x)
        return inside & (side < 0)


@dataclass(frozen=True)
class InstanceSpec:
    domain: str
    weights: Weights
    delta: float = 0.0
    trace: BoundaryTrace | None = None
    masses: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.domain not in ("ball", "plane"):
            raise SpecError("domain must be 'ball' or 'plane'", "domain")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise SpecError("delta must be a non-negative number", "delta")
        if self.domain == "ball":
            if self.trace is None or self.masses is not None:
                raise SpecError("ball instances carry a trace and no masses", "trace")
            if max(self.trace.labels) > self.weights.n_chambers:
                raise SpecError("trace label without a weight", "trace")
        else:
            if self.masses is None or self.trace is not None:
                raise SpecError("plane instances carry masses and no trace", "masses")
            if len(self.masses) != self.weights.n_chambers:
                raise SpecError("need one mass per chamber", "masses")
            if not all(m > 0 for m in self.masses):
                raise SpecError("masses must be positive", "masses")

    @property
    def n_chambers(self) -> int:
        return self.weights.n_chambers

    def with_delta(self, delta: float) -> "InstanceSpec":
        return InstanceSpec(self.domain, self.weights, float(delta), self.trace, self.masses)

    def boundary_constant(self) -> float:
        """C(h): the part of the energy carried by the unit circle itself."""
        if self.domain != "ball":
            return 0.0
        c = self.weights.c
        return TWO_PI * c[0] + sum(c[a.label] * (a.end - a.start) for a in self.trace.arcs())

    # json ---------------------------------------------------------------
    def to_dict(self) -> dict:
        d: dict = {"domain": self.domain, "weights": list(self.weights.c), "delta": self.delta}
        if self.domain == "ball":
            d["trace"] = [{"angle": a, "label": l} for a, l in self.trace.jumps]
        else:
            d["masses"] = list(self.masses)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceSpec":
        if not isinstance(d, dict):
            raise SpecError("instance must be a JSON object")
        for key in ("domain", "weights"):
            if key not in d:
                raise SpecError("missing field", key)
        try:
            weights = Weights(tuple(d["weights"]))
        except TypeError as exc:
            raise SpecError(str(exc), "weights") from None
        delta = d.get("delta", 0.0)
        if not isinstance(delta, (int, float)):
            raise SpecError("delta must be a number", "delta")
        trace = masses = None
        if "trace" in d:
            items = d["trace"]
            if not isinstance(items, list):
                raise SpecError("trace must be a list", "trace")
            jumps = []
            for i, it in enumerate(items):
                try:
                    jumps.append((float(it["angle"]), int(it["label"])))
                except (KeyError, TypeError, ValueError):
                    raise SpecError("expected {angle, label}", f"trace[{i}]") from None
            trace = BoundaryTrace(tuple(jumps))
        if "masses" in d:
            try:
                masses = tuple(float(m) for m in d["masses"])
            except (TypeError, ValueError):
                raise SpecError("masses must be numbers", "masses") from None
        return cls(d["domain"], weights, float(delta), trace, masses)

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON ({exc.msg})", f"line {exc.lineno}") from None
        return cls.from_dict(d)


# ---------------------------------------------------------------------------
# arc clusters


@dataclass(frozen=True)
class Interface:
    """Open run of arcs with region ``left`` on its left-hand side."""

    chain: ArcChain
    left: Label
    right: Label

    def length(self) -> float:
        return self.chain.length()


@dataclass(frozen=True)
class Junction:
    point: Point2
    kind: str  # interior-cusp | boundary-corner | interior-triple | boundary-jump
    incident: tuple[int, ...]


@dataclass(frozen=True)
class Region:
    """One connected chamber component or wet piece, boundary walked counter-clockwise."""

    label: Label
    boundary: ArcChain

    def area(self) -> float:
        return self.boundary.signed_area()


@dataclass(frozen=True)
class ArcCluster:
    interfaces: tuple[Interface, ...]
    junctions: tuple[Junction, ...] = ()
    regions: tuple[Region, ...] = ()
    tags: dict = field(default_factory=dict, compare=False)

    def labels(self) -> set:
        return {r.label for r in self.regions} | {i.left for i in self.interfaces} | {i.right for i in self.interfaces}

    def wet_area(self) -> float:
        return sum(r.area() for r in self.regions if r.label == G)

    def chamber_regions(self, label: Label) -> list[Region]:
        return [r for r in self.regions if r.label == label]

    def structural_problems(self, n_chambers: int | None = None) -> list[str]:
        out = []
        for k, itf in enumerate(self.interfaces):
            if itf.chain.closed:
                out.append(f"interface {k} is a closed chain")
            if itf.left == itf.right:
                out.append(f"interface {k} separates label {itf.left!r} from itself")
            for lab in (itf.left, itf.right):
                if lab != G and not isinstance(lab, (int, np.integer)):
                    out.append(f"interface {k} has unknown label {lab!r}")
                elif n_chambers is not None and lab != G and not 0 <= lab <= n_chambers:
                    out.append(f"interface {k} has label {lab} out of range")
        for r in self.regions:
            if r.area() <= 0:
                out.append(f"region {r.label!r} is not counter-clockwise")
        return out


def energy(cluster: ArcCluster, w: Weights, domain: str = "ball") -> float:
    """Relative energy: interface length times c_left + c_right, with c_G = 0.

    The unit circle is never an interface of an arc cluster on the ball, so
    the boundary constant C(h) is not included.
    """
    problems = cluster.structural_problems(w.n_chambers)
    if problems:
        raise ClusterError("; ".join(problems))
    return sum(itf.length() * w.pair(itf.left, itf.right) for itf in cluster.interfaces)


# ---------------------------------------------------------------------------
# admissibility


def points_in_polygon(poly: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Even-odd test of many points against one polygon."""
    inside = np.zeros(np.shape(x), dtype=bool)
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    for x0, y0, x1, y1 in zip(px, py, qx, qy):
        if y0 == y1:
            continue
        cond = (y0 > y) != (y1 > y)
        xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= cond & (x < xi)
    return inside


@dataclass
class AdmissibilityReport:
    wet_area: float
    delta: float
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __getitem__(self, key):
        return self.checks[key]


def _interface_samples(cluster: ArcCluster, per_arc: int = 32) -> np.ndarray:
    pts = [a.sample(per_arc)[1:-1] for itf in cluster.interfaces for a in itf.chain]
    pts += [a.sample(per_arc)[1:-1] for r in cluster.regions if r.label == G for a in r.boundary]
    return np.concatenate(pts) if pts else np.zeros((0, 2))


def validate(
    cluster: ArcCluster,
    spec: InstanceSpec,
    *,
    mass_rtol: float = 1e-8,
    samples: int = 4000,
    seed: int = 0,
) -> AdmissibilityReport:
    wet = cluster.wet_area()
    rep = AdmissibilityReport(wet, spec.delta)
    tol = 1e-12 * max(1.0, spec.delta)
    problems = cluster.structural_problems(spec.n_chambers)
    rep.checks["structure"] = not problems
    rep.notes += problems
    rep.checks["wet_area"] = wet <= spec.delta + tol
    for itf in cluster.interfaces:
        if G in (itf.left, itf.right) and {itf.left, itf.right} <= {G, 0} and spec.domain == "ball":
            rep.notes.append("wet region bordering the exterior")
    rep.checks["g_borders_chambers"] = all(
        not (itf.left == G and itf.right == G) for itf in cluster.interfaces
    )

    if spec.domain == "ball":
        total = sum(r.area() for r in cluster.regions)
        rep.checks["partition_area"] = abs(total - math.pi) < 1e-9
        rep.checks["trace"] = _trace_ok(cluster, spec.trace, rep.notes)
        rep.checks["containment"] = _containment_ok(cluster, spec.trace, rep.notes)
        rng = np.random.default_rng(seed)
        r = np.sqrt(rng.random(samples)) * 0.999
        t = rng.random(samples) * TWO_PI
        x, y = r * np.cos(t), r * np.sin(t)
    else:
        ok = True
        for l, m in enumerate(spec.masses, start=1):
            got = sum(r.area() for r in cluster.chamber_regions(l))
            if abs(got - m) > mass_rtol * m:
                ok = False
                rep.notes.append(f"chamber {l}: area {got:.12g} vs mass {m:.12g}")
        rep.checks["masses"] = ok
        pts = np.concatenate([r.boundary.polyline(1e-2) for r in cluster.regions]) if cluster.regions else np.zeros((1, 2))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        rng = np.random.default_rng(seed)
        x = lo[0] + (hi[0] - lo[0]) * rng.random(samples)
        y = lo[1] + (hi[1] - lo[1]) * rng.random(samples)
    if cluster.regions:
        hits = np.zeros(np.shape(x), dtype=int)
        for reg in cluster.regions:
            hits += points_in_polygon(reg.boundary.polyline(2e-3, 8), x, y)
        if spec.domain == "ball":
            rep.checks["partition_sampling"] = bool(np.all(hits == 1))
        else:
            rep.checks["partition_sampling"] = bool(np.all(hits <= 1))
    return rep


def _trace_ok(cluster: ArcCluster, trace: BoundaryTrace, notes: list) -> bool:
    ok = True
    jp = trace.jump_points()
    arcs = trace.arcs()
    for reg in cluster.regions:
        for a in reg.boundary:
            if abs(a.curvature - 1.0) < 1e-12 and abs(a.start.norm() - 1) < 1e-9 and abs(a.end.norm() - 1) < 1e-9:
                m = a.point_at(0.5)
                lab = trace.label_at(math.atan2(m.y, m.x))
                if lab != reg.label:
                    ok = False
                    notes.append(f"region {reg.label!r} covers boundary labelled {lab}")
    for k, itf in enumerate(cluster.interfaces):
        for p in (itf.chain.arcs[0].start, itf.chain.arcs[-1].end):
            if abs(p.norm() - 1.0) < 1e-9:
                hit = [i for i, q in enumerate(jp) if (p - q).norm() < 1e-9]
                if not hit:
                    ok = False
                    notes.append(f"interface {k} meets the circle away from a jump point")
                    continue
                i = hit[0]
                if not {itf.left, itf.right} & {arcs[i].label, arcs[i - 1].label}:
                    ok = False
                    notes.append(f"interface {k} labels do not match jump {i}")
    ends = [p for itf in cluster.interfaces for p in (itf.chain.arcs[0].start, itf.chain.arcs[-1].end)]
    ends += [a.start for r in cluster.regions if r.label == G for a in r.boundary]
    for i, q in enumerate(jp):
        if not any((p - q).norm() < 1e-9 for p in ends):
            ok = False
            notes.append(f"jump {i} is not reached by any interface")
    return ok


def _containment_ok(cluster: ArcCluster, trace: BoundaryTrace, notes: list) -> bool:
    pts = _interface_samples(cluster)
    if not len(pts) or not trace.n_jumps:
        return True
    ok = True
    for arc in trace.arcs():
        bad = trace.in_segment(pts[:, 0], pts[:, 1], arc)
        # points on the chord itself are allowed
        p, q = arc.points()
        d = np.abs((q.x - p.x) * (pts[:, 1] - p.y) - (q.y - p.y) * (pts[:, 0] - p.x)) / (q - p).norm()
        bad &= d > 1e-9
        if bad.any():
            ok = False
            notes.append(f"boundary arc of label {arc.label} at {arc.start:.4f}: segment not contained")
    return ok


def disk_region_chain(trace: BoundaryTrace) -> ArcChain:
    a = trace.jumps[0][0]
    return ArcChain(tuple(boundary_arcs(a, a + TWO_PI)))


def constant_cluster(trace: BoundaryTrace) -> ArcCluster:
    return ArcCluster((), (), (Region(trace.jumps[0][1], disk_region_chain(trace)),))


def segment_interface(p, q, left: Label, right: Label) -> Interface:
    return Interface(ArcChain((CircArc(p, q, 0.0),), closed=False), left, right)
