"""Wetted small-delta clusters built from a dry network.

Every interior triple junction is replaced by the cusped region between
three mutually tangent circles of radius ``r``; a boundary triple junction
gets a piece with a corner at its jump point, solved numerically.  All
pieces share one curvature and their areas add up to delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .arcs import ArcChain, CircArc, GeometryError, Point2, chain_area, cross, unit
from .cluster import G, ArcCluster, InfeasibleError, Interface, Junction, Region, Weights, segment_interface
from .dry import JunctionNetwork, face_paths

# area of the cusped triangle between three tangent unit circles
TRIANGLE_AREA = math.sqrt(3) - math.pi / 2
# energy change of one wetted interior junction per unit radius (equal weights)
JUNCTION_GAIN = math.pi - 2 * math.sqrt(3)


def remark_constant() -> float:
    """Length change per square root of piece area for one third of a wetted junction."""
    return (math.pi / 3 - 2 / math.sqrt(3)) / math.sqrt(TRIANGLE_AREA / 3)


@dataclass(frozen=True)
class WettingParams:
    r: float
    n_interior: int
    n_boundary: int = 0
    delta: float = 0.0
    boundary_areas: tuple[float, ...] = ()

    @property
    def kappa(self) -> float:
        return math.inf if self.r == 0 else 1.0 / self.r

    @property
    def junction_area(self) -> float:
        return TRIANGLE_AREA * self.r**2

    @property
    def piece_area(self) -> float:
        """Area of one of the three congruent thirds of an interior piece."""
        return self.junction_area / 3

    @property
    def nothing_to_wet(self) -> bool:
        return self.n_interior + self.n_boundary == 0


@dataclass(frozen=True)
class WetPiece:
    node: tuple
    # edge index -> cusp point
    cusps: dict
    # chamber label -> circle radius of its wet arc
    radii: dict
    corner: Point2 | None = None
    chain: ArcChain | None = None

    @property
    def area(self) -> float:
        return 0.0 if self.chain is None else chain_area(self.chain)


@dataclass(frozen=True)
class WettedCluster:
    base: JunctionNetwork
    params: WettingParams
    pieces: tuple[WetPiece, ...]
    assembled: ArcCluster
    predicted_energy: float
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# interior junctions


def _incident(net: JunctionNetwork, node):
    """(edge index, far node, chamber on the left of the outward ray, right chamber)."""
    out = []
    for k, ((u, v), (r, l)) in enumerate(zip(net.topology.edges, net.topology.sides)):
        if u == node:
            out.append((k, v, l, r))
        elif v == node:
            out.append((k, u, r, l))
    return out


def wet_interior_junction(net: JunctionNetwork, k: int, r: float, directions: dict | None = None) -> WetPiece:
    """Cusped triangle of radius ``r`` centred on free junction ``k``.

    ``directions`` may override the outward unit direction of an incident
    edge (used when a neighbouring boundary piece tilts a segment).
    """
    node = ("j", k)
    x = net.junctions[k]
    inc = _incident(net, node)
    if len(inc) != 3:
        raise GeometryError("interior junctions have three incident segments")
    if r < 0:
        raise GeometryError("radius must be non-negative")
    cusps = {}
    reach = r / math.sqrt(3)
    for e, far, _, _ in inc:
        d = net.position(far) - x
        # a segment between two junctions carries a cusp at each end
        need = reach * (2 if far[0] == "j" else 1)
        if need >= d.norm():
            raise InfeasibleError(
                f"wet radius {r:.4g} puts the cusps past the end of segment {e} ({d.norm():.4g}) at junction {k}"
            )
        if directions and e in directions:
            d = directions[e]
        cusps[e] = x + d.scale(reach / d.norm())
    radii = {}
    for e, far, left, right in inc:
        radii[left] = r
    if r == 0:
        return WetPiece(node, cusps, radii)
    # order cusps counter-clockwise around the junction; G is walked that way
    ordered = sorted(inc, key=lambda t: math.atan2(cusps[t[0]].y - x.y, cusps[t[0]].x - x.x))
    arcs = []
    for i, (e, _, _, _) in enumerate(ordered):
        e2 = ordered[(i + 1) % 3][0]
        arcs.append(CircArc(cusps[e], cusps[e2], -1.0 / r))
    return WetPiece(node, cusps, radii, None, ArcChain(tuple(arcs)))


# ---------------------------------------------------------------------------
# boundary junctions


def _boundary_geometry(p, a, b, RA, RM, RB, guess):
    """Solve for the cusps of a corner piece at jump point p.

    Segment 1 runs from anchor a to cusp q1 and separates chamber A (on the
    side of the circle arc ending at p) from the middle chamber M; segment 2
    runs from b to q2 between B and M.  Unknowns: distance and direction of
    each cusp from its anchor.
    """
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))

    def parts(z):
        s1, t1, s2, t2 = z
        d1 = np.array([math.cos(t1), math.sin(t1)])
        d2 = np.array([math.cos(t2), math.sin(t2)])
        q1, q2 = a + s1 * d1, b + s2 * d2
        # normals pointing into A and B respectively
        n1 = np.array([-d1[1], d1[0]]) * _side(a, d1, p, b)
        n2 = np.array([-d2[1], d2[0]]) * _side(b, d2, p, a)
        cA, cB = q1 + RA * n1, q2 + RB * n2
        cM1, cM2 = q1 - RM * n1, q2 - RM * n2
        return q1, q2, cA, cB, cM1, cM2

    def resid(z):
        q1, q2, cA, cB, cM1, cM2 = parts(z)
        return np.array([
            np.linalg.norm(p - cA) - RA,
            np.linalg.norm(p - cB) - RB,
            *(cM1 - cM2),
        ])

    sol = optimize.least_squares(resid, guess, xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
    return sol.x, float(np.max(np.abs(resid(sol.x)))), parts(sol.x)


def _side(anchor, d, p, other):
    """+1 if the chamber containing the boundary near p lies to the left of the
    line (anchor, d), i.e. opposite to the other segment's anchor."""
    s = d[0] * (other[1] - anchor[1]) - d[1] * (other[0] - anchor[0])
    return -1.0 if s > 0 else 1.0


def wet_boundary_junction(
    net: JunctionNetwork, i: int, area_target: float, w: Weights | None = None
) -> WetPiece:
    """Corner piece at pinned jump point ``i`` enclosing ``area_target``."""
    w = w or net.weights
    node = ("p", i)
    p = net.position(node)
    inc = _incident(net, node)
    if len(inc) != 2:
        raise GeometryError("a boundary junction has two incident segments")
    if area_target < 0:
        raise GeometryError("area must be non-negative")
    if area_target == 0:
        return WetPiece(node, {e: p for e, *_ in inc}, {}, p)

    def build(rho):
        return _boundary_piece(net, node, inc, rho, w)

    # area grows like rho^2; bracket then bisect on the curvature scale
    lo, hi = 0.0, math.sqrt(area_target)
    while True:
        piece = build(hi)
        if piece.area >= area_target:
            break
        lo, hi = hi, 2 * hi
        if hi > 10:
            raise InfeasibleError("no corner piece with the requested area")
    rho = optimize.brentq(lambda s: build(s).area - area_target if s > 0 else -area_target, lo, hi, xtol=1e-15, rtol=1e-15)
    piece = build(rho)
    if abs(piece.area - area_target) > 1e-10:
        raise InfeasibleError(f"corner piece area residual {piece.area - area_target:.3e}")
    return piece


def _boundary_piece(net, node, inc, rho, w: Weights) -> WetPiece:
    p = net.position(node)
    (e1, far1, l1, r1), (e2, far2, l2, r2) = inc
    a, b = net.position(far1), net.position(far2)
    # the chamber shared by both segments is the middle one
    mid = ({l1, r1} & {l2, r2}).pop()
    A = l1 if r1 == mid else r1
    B = l2 if r2 == mid else r2
    RA, RM, RB = (w.c[x] * rho for x in (A, mid, B))
    da, db = p - a, p - b
    # opening angle of the middle chamber at p
    phi = math.acos(max(-1.0, min(1.0, (da.x * db.x + da.y * db.y) / (da.norm() * db.norm()))))
    t = RM / math.tan(phi / 2)
    guess = [da.norm() - t, math.atan2(da.y, da.x), db.norm() - t, math.atan2(db.y, db.x)]
    z, res, (q1, q2, cA, cB, cM1, cM2) = _boundary_geometry(p, a, b, RA, RM, RB, guess)
    if res > 1e-11 or z[0] <= 0 or z[2] <= 0 or z[0] > da.norm() or z[2] > db.norm():
        raise InfeasibleError(f"corner piece geometry did not close (residual {res:.2e})")
    q1, q2 = Point2(*q1), Point2(*q2)
    # G walked counter-clockwise: p -> q1 -> q2 -> p or the reverse
    arcs = [CircArc(p, q1, -1.0 / RA), CircArc(q1, q2, -1.0 / RM), CircArc(q2, p, -1.0 / RB)]
    chain = ArcChain(tuple(arcs))
    if chain.signed_area() <= 0:
        raise InfeasibleError("corner piece arcs overlap")
    piece = WetPiece(node, {e1: q1, e2: q2}, {A: RA, mid: RM, B: RB}, p, chain)
    for arc in chain:
        if np.any(np.hypot(*arc.sample(16).T) > 1 + 1e-12):
            raise InfeasibleError("corner piece leaves the disk")
    return piece


# ---------------------------------------------------------------------------
# assembly


def calibrate_radius(dry: JunctionNetwork, delta: float) -> WettingParams:
    """Shared arc radius so that the wet pieces enclose ``delta`` in total."""
    if delta < 0:
        raise GeometryError("delta must be non-negative")
    P = len(dry.junctions)
    B = len(dry.topology.boundary_junctions)
    if P + B == 0 or delta == 0:
        return WettingParams(0.0, P, B, delta)
    if B == 0:
        return WettingParams(math.sqrt(delta / (P * TRIANGLE_AREA)), P, 0, delta)
    w = dry.weights

    def areas(r):
        out = []
        for i in dry.topology.boundary_junctions:
            node = ("p", i)
            out.append(_boundary_piece(dry, node, _incident(dry, node), r, w).area)
        return out

    def total(r):
        return P * TRIANGLE_AREA * r * r + sum(areas(r)) - delta

    hi = math.sqrt(delta / (P + B) / TRIANGLE_AREA)
    lo = 0.0
    while total(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 10:
            raise InfeasibleError("delta too large to wet the boundary junctions")
    r = optimize.brentq(lambda s: total(s) if s > 0 else -delta, lo, hi, xtol=1e-15, rtol=1e-15)
    return WettingParams(r, P, B, delta, tuple(areas(r)))


def build_wetted(dry: JunctionNetwork, delta: float) -> WettedCluster:
    if not dry.weights.equal:
        raise GeometryError("wetting is constructed for equal weights only")
    params = calibrate_radius(dry, delta)
    if params.r == 0:
        cl = dry.to_cluster()
        return WettedCluster(dry, params, (), cl, dry.energy)
    notes = []
    pieces = {}
    tilted = {}
    for i in dry.topology.boundary_junctions:
        node = ("p", i)
        piece = _boundary_piece(dry, node, _incident(dry, node), params.r, dry.weights)
        pieces[node] = piece
        for e, far, _, _ in _incident(dry, node):
            if far[0] == "j":
                tilted[(far, e)] = piece.cusps[e] - dry.position(far)
                notes.append(f"segment {e} tilted by the corner piece at jump {i}; cusp tangency at {far} is approximate")
    for k in range(len(dry.junctions)):
        node = ("j", k)
        dirs = {e: d for (nd, e), d in tilted.items() if nd == node}
        pieces[node] = wet_interior_junction(dry, k, params.r, dirs)
    cluster = assemble(dry, pieces)
    from .cluster import energy

    return WettedCluster(dry, params, tuple(pieces.values()), cluster, energy(cluster, dry.weights), tuple(notes))


def assemble(dry: JunctionNetwork, pieces: dict) -> ArcCluster:
    """Chamber faces with every wetted node replaced by its wet arc, plus G regions."""
    from .arcs import boundary_arcs

    edges = dry.topology.edges
    index = {frozenset(e): k for k, e in enumerate(edges)}

    def end_point(e, node):
        pc = pieces.get(node)
        return pc.cusps[e] if pc is not None else dry.position(node)

    trace_arcs = dry.trace.arcs()
    regions = []
    wet_itfs = []
    for label, chunks in face_paths(dry):
        chain: list = []
        for kind, item in chunks:
            if kind == "arc":
                chain += boundary_arcs(trace_arcs[item].start, trace_arcs[item].end)
                continue
            cur = None
            for idx, node in enumerate(item):
                pc = pieces.get(node)
                if pc is None or pc.chain is None:
                    stops = [dry.position(node)]
                    arc = None
                else:
                    prev_e = index[frozenset((item[idx - 1], node))] if idx > 0 else None
                    next_e = index[frozenset((node, item[idx + 1]))] if idx + 1 < len(item) else None
                    a = pc.cusps[prev_e] if prev_e is not None else pc.corner
                    b = pc.cusps[next_e] if next_e is not None else pc.corner
                    arc = CircArc(a, b, 1.0 / pc.radii[label])
                    wet_itfs.append(Interface(ArcChain((arc,), closed=False), label, G))
                    stops = [a]
                if cur is not None and (stops[0] - cur).norm() > 0:
                    chain.append(CircArc(cur, stops[0]))
                if arc is not None:
                    chain.append(arc)
                    cur = arc.end
                else:
                    cur = stops[0]
        regions.append(Region(label, ArcChain(tuple(chain))))
    interfaces = [
        segment_interface(end_point(k, u), end_point(k, v), l, r)
        for k, ((u, v), (r, l)) in enumerate(zip(edges, dry.topology.sides))
    ]
    juncs = []
    for node, pc in pieces.items():
        if pc.chain is None:
            continue
        regions.append(Region(G, pc.chain))
        for e, q in pc.cusps.items():
            juncs.append(Junction(q, "interior-cusp", (e,)))
        if pc.corner is not None:
            juncs.append(Junction(pc.corner, "boundary-corner", tuple(pc.cusps)))
    for i, p in enumerate(dry.trace.jump_points()):
        pc = pieces.get(("p", i))
        if pc is None or pc.chain is None:
            inc = tuple(k for k, e in enumerate(edges) if ("p", i) in e)
            juncs.append(Junction(p, "boundary-jump", inc))
    return ArcCluster(tuple(interfaces + wet_itfs), tuple(juncs), tuple(regions), {"wet": True})
