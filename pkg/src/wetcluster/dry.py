"""Straight-segment minimizers on the unit disk at zero wet area.

A topology is a planar forest whose leaves are the jump points of the
trace.  Interior nodes have degree three; a jump point of degree two is a
boundary triple junction (a junction pinned to that jump point).  Given a
topology, the free junction positions minimize the weighted length
``sum (c_l + c_m) |segment|`` and are found by damped Newton.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .arcs import ArcChain, CircArc, Point2, boundary_arcs, cross, endpoint_tangent
from .cluster import (
    ArcCluster,
    BoundaryTrace,
    InfeasibleError,
    InstanceSpec,
    Interface,
    Junction,
    Region,
    Weights,
    constant_cluster,
    segment_interface,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 200
EPS = np.finfo(float).eps
TIE_TOL = 1e-9
# a free junction closer than this to another node has collapsed
COLLAPSE_TOL = 1e-7

Node = tuple  # ("p", i) for jump point i, ("j", k) for free junction k


@dataclass(frozen=True)
class Topology:
    n_points: int
    n_junctions: int
    edges: tuple[tuple[Node, Node], ...]
    # (right, left) chamber labels of each edge walked from edges[k][0] to edges[k][1]
    sides: tuple[tuple[int, int], ...]
    # jump points that carry a boundary triple junction
    boundary_junctions: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]

    def key(self):
        return _canonical_key(self)

    def neighbors(self) -> dict:
        nb = defaultdict(list)
        for k, (u, v) in enumerate(self.edges):
            nb[u].append((v, k))
            nb[v].append((u, k))
        return nb

    def describe(self) -> str:
        def name(n):
            return f"p{n[1]}" if n[0] == "p" else f"j{n[1]}"

        return " ".join(f"{name(u)}-{name(v)}" for u, v in self.edges) or "(empty)"


# ---------------------------------------------------------------------------
# enumeration


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def _crossing(a, b) -> bool:
    for x1, x2 in itertools.combinations(sorted(a), 2):
        inside = [y for y in b if x1 < y < x2]
        if inside and len(inside) < len(b):
            return True
    return False


def noncrossing_partitions(n: int):
    """Non-crossing partitions of range(n) into blocks of size at least two."""
    for part in _set_partitions(list(range(n))):
        if any(len(b) < 2 for b in part):
            continue
        if any(_crossing(a, b) for a, b in itertools.combinations(part, 2)):
            continue
        yield [tuple(sorted(b)) for b in part]


def _binary_trees(leaves):
    """Planar rooted binary trees over an ordered leaf sequence (nested tuples)."""
    if len(leaves) == 1:
        yield leaves[0]
        return
    for i in range(1, len(leaves)):
        for left in _binary_trees(leaves[:i]):
            for right in _binary_trees(leaves[i:]):
                yield (left, right)


def _tree_edges(block):
    """Unrooted planar trees on a block of jump points, as edge lists over
    point ids and junction placeholders ("t", k)."""
    root, rest = block[0], block[1:]
    if len(rest) == 1:
        yield [(("p", root), ("p", rest[0]))]
        return
    for shape in _binary_trees(list(rest)):
        edges = []
        counter = itertools.count()

        def build(t):
            if not isinstance(t, tuple):
                return ("p", t)
            me = ("t", next(counter))
            for child in t:
                edges.append((me, build(child)))
            return me

        top = build(shape)
        edges.append((("p", root), top))
        yield edges


def _contractions(edges):
    """All ways to pin junctions onto adjacent jump points (at most one each)."""
    junctions = sorted({n for e in edges for n in e if n[0] == "t"})
    options = []
    for j in junctions:
        adj = [n for e in edges if j in e for n in e if n != j and n[0] == "p"]
        options.append([None] + adj)
    for choice in itertools.product(*options):
        used = [c for c in choice if c is not None]
        if len(used) != len(set(used)):
            continue
        mapping = {j: c for j, c in zip(junctions, choice) if c is not None}
        new = []
        for u, v in edges:
            u2, v2 = mapping.get(u, u), mapping.get(v, v)
            if u2 != v2:
                new.append((u2, v2))
        yield new, sorted(c[1] for c in used)


def _side_points(adj, start, banned):
    """Jump points reachable from ``start`` without crossing ``banned``."""
    seen = {start, banned}
    stack = [start]
    pts = [start[1]] if start[0] == "p" else []
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
                if v[0] == "p":
                    pts.append(v[1])
    return pts


def _last_in_cyclic(block: tuple[int, ...], side: set) -> int:
    """Last element (counter-clockwise) of a cyclic interval ``side`` of ``block``."""
    k = len(block)
    for i, p in enumerate(block):
        if p in side and block[(i + 1) % k] not in side:
            return p
    raise ValueError("side is not a proper cyclic interval")


def _face_walk(n: int, comp_of: dict, blocks) -> list[list[int]]:
    """Faces as lists of boundary-arc indices (arc i runs from jump i to i+1)."""
    pred = {}
    for b in blocks:
        for i, p in enumerate(b):
            pred[p] = b[i - 1]
    seen = set()
    faces = []
    for start in range(n):
        if start in seen:
            continue
        face = []
        i = start
        while i not in seen:
            seen.add(i)
            face.append(i)
            i = pred[(i + 1) % n]
        faces.append(face)
    return faces


def enumerate_topologies(trace: BoundaryTrace, max_junctions: int | None = None) -> list[Topology]:
    n = trace.n_jumps
    if n == 0:
        return [Topology(0, 0, (), (), (), ())]
    if max_junctions is None:
        max_junctions = n
    labels = trace.labels
    found = {}
    for blocks in noncrossing_partitions(n):
        comp_of = {p: bi for bi, b in enumerate(blocks) for p in b}
        faces = _face_walk(n, comp_of, blocks)
        if any(len({labels[i] for i in f}) != 1 for f in faces):
            continue
        per_block = []
        for b in blocks:
            opts = []
            for edges in _tree_edges(b):
                opts.extend(_contractions(edges))
            per_block.append(opts)
        for combo in itertools.product(*per_block):
            topo = _assemble(n, blocks, combo, labels)
            if topo is None or topo.n_junctions > max_junctions:
                continue
            found.setdefault(topo.key(), topo)
    return sorted(found.values(), key=lambda t: (t.n_junctions, t.describe()))


def _assemble(n, blocks, combo, labels):
    edges, bj = [], []
    renum = {}
    for bi, (e, pinned) in enumerate(combo):
        for u, v in e:
            for x in (u, v):
                if x[0] == "t" and (bi, x) not in renum:
                    renum[(bi, x)] = ("j", len(renum))
            edges.append((renum.get((bi, u), u), renum.get((bi, v), v)))
        bj.extend(pinned)
    adj = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    block_of = {p: b for b in blocks for p in b}
    sides = []
    for u, v in edges:
        anchor = u if u[0] == "p" else v
        block = block_of[anchor[1]]
        b_side = set(_side_points(adj, v, u))
        a_side = set(block) - b_side
        right = labels[_last_in_cyclic(block, a_side)]
        left = labels[_last_in_cyclic(block, b_side)]
        if right == left:
            return None
        sides.append((right, left))
    return Topology(n, len(renum), tuple(edges), tuple(sides), tuple(sorted(bj)), tuple(blocks))


def _canonical_key(t: Topology):
    adj = defaultdict(list)
    for u, v in t.edges:
        adj[u].append(v)
        adj[v].append(u)

    def node_key(x):
        if x[0] == "p":
            return ("p", x[1])
        branches = frozenset(frozenset(_side_points(adj, y, x)) for y in adj[x])
        return ("j", tuple(sorted(tuple(sorted(b)) for b in branches)))

    return frozenset(frozenset((node_key(u), node_key(v))) for u, v in t.edges)


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class JunctionNetwork:
    topology: Topology
    trace: BoundaryTrace
    weights: Weights
    junctions: tuple[Point2, ...]
    energy: float
    angle_residual: float
    force_residual: float = 0.0
    converged: bool = True
    feasible: bool = True
    iterations: int = 0
    notes: tuple[str, ...] = ()

    def position(self, node: Node) -> Point2:
        if node[0] == "p":
            return Point2(math.cos(self.trace.angles[node[1]]), math.sin(self.trace.angles[node[1]]))
        return self.junctions[node[1]]

    def segments(self) -> list[tuple[Point2, Point2, int, int]]:
        """(start, end, right label, left label) for every interface segment."""
        out = []
        for (u, v), (r, l) in zip(self.topology.edges, self.topology.sides):
            out.append((self.position(u), self.position(v), r, l))
        return out

    def interior_junctions(self) -> list[int]:
        return list(range(len(self.junctions)))

    @property
    def singular_points(self) -> list[Point2]:
        """Interior and boundary triple junctions."""
        pts = list(self.junctions)
        pts += [self.position(("p", i)) for i in self.topology.boundary_junctions]
        return pts

    def junction_angles(self, k: int) -> list[tuple[int, float]]:
        """(chamber label, opening angle) of the sectors around free junction k."""
        node = ("j", k)
        x = self.junctions[k]
        rays = []
        for (u, v), (r, l) in zip(self.topology.edges, self.topology.sides):
            if node == u:
                d = self.position(v) - x
                rays.append((math.atan2(d.y, d.x), l))  # left of the outward ray
            elif node == v:
                d = self.position(u) - x
                rays.append((math.atan2(d.y, d.x), r))
        rays.sort()
        out = []
        for i, (a, lab) in enumerate(rays):
            b = rays[(i + 1) % len(rays)][0]
            out.append((lab, (b - a) % (2 * math.pi)))
        return out

    def to_cluster(self) -> ArcCluster:
        return network_cluster(self)


def _objective(x, fixed, edges, w):
    """Weighted length, gradient and Hessian in the free coordinates."""
    n = len(x) // 2
    pos = lambda node: x[2 * node[1] : 2 * node[1] + 2] if node[0] == "j" else fixed[node[1]]
    f = 0.0
    g = np.zeros_like(x)
    H = np.zeros((len(x), len(x)))
    dmin = math.inf
    for (u, v), wk in zip(edges, w):
        d = pos(v) - pos(u)
        L = math.hypot(d[0], d[1])
        f += wk * L
        if u[0] == "j" or v[0] == "j":
            dmin = min(dmin, L)
        if L == 0:
            continue
        e = d / L
        A = wk * (np.eye(2) - np.outer(e, e)) / L
        for node, s in ((u, -1.0), (v, 1.0)):
            if node[0] == "j":
                i = 2 * node[1]
                g[i : i + 2] += s * wk * e
                H[i : i + 2, i : i + 2] += A
        if u[0] == "j" and v[0] == "j":
            i, j = 2 * u[1], 2 * v[1]
            H[i : i + 2, j : j + 2] -= A
            H[j : j + 2, i : i + 2] -= A
    return f, g, H, dmin


def _initial_junctions(t: Topology, fixed: np.ndarray) -> np.ndarray:
    adj = defaultdict(list)
    for u, v in t.edges:
        adj[u].append(v)
        adj[v].append(u)
    x = np.zeros(2 * t.n_junctions)
    for k in range(t.n_junctions):
        node = ("j", k)
        cents = [fixed[_side_points(adj, y, node)].mean(axis=0) for y in adj[node]]
        x[2 * k : 2 * k + 2] = 0.5 * np.mean(cents, axis=0)
    return x


def solve_network(t: Topology, trace: BoundaryTrace, w: Weights) -> JunctionNetwork:
    fixed = np.array([[math.cos(a), math.sin(a)] for a in trace.angles]) if trace.n_jumps else np.zeros((0, 2))
    weights = [w.c[r] + w.c[l] for r, l in t.sides]
    x = _initial_junctions(t, fixed)
    notes = []
    converged = feasible = True
    it = 0
    if t.n_junctions:
        f, g, H, dmin = _objective(x, fixed, t.edges, weights)
        converged = False
        for it in range(1, NEWTON_MAXITER + 1):
            if np.linalg.norm(g) < NEWTON_TOL:
                converged = True
                break
            mu = 0.0
            while True:
                try:
                    step = -np.linalg.solve(H + mu * np.eye(len(x)), g)
                    break
                except np.linalg.LinAlgError:
                    mu = max(2 * mu, 1e-12)
            if g @ step >= 0:
                step = -g
            s = 1.0
            while True:
                xn = x + s * step
                fn, gn, Hn, dn = _objective(xn, fixed, t.edges, weights)
                if fn <= f + 1e-4 * s * (g @ step) or s < 1e-12:
                    break
                # at round-off level f cannot discriminate; the gradient still can
                if fn <= f + 8 * EPS * abs(f) and np.linalg.norm(gn) < np.linalg.norm(g):
                    break
                s *= 0.5
            if fn > f + 8 * EPS * abs(f):
                # no descent possible at round-off level
                converged = np.linalg.norm(g) < 1e-9
                break
            x, f, g, H, dmin = xn, fn, gn, Hn, dn
            if dmin < COLLAPSE_TOL:
                break
        else:
            converged = np.linalg.norm(g) < NEWTON_TOL
        if not converged:
            notes.append(f"Newton stopped at gradient norm {np.linalg.norm(g):.3e}")
        pts = x.reshape(-1, 2)
        if dmin < COLLAPSE_TOL:
            feasible = False
            notes.append("junction collapsed onto a neighbouring node")
        if np.any(np.hypot(pts[:, 0], pts[:, 1]) >= 1.0):
            feasible = False
            notes.append("junction left the disk")
        force = float(np.linalg.norm(g))
    else:
        f = sum(wk * np.linalg.norm(fixed[v[1]] - fixed[u[1]]) for (u, v), wk in zip(t.edges, weights))
        force = 0.0
    net = JunctionNetwork(
        t, trace, w, tuple(Point2(*p) for p in x.reshape(-1, 2)), float(f), 0.0, force,
        converged, feasible, it, tuple(notes),
    )
    res = max((sine_law_residual(net, k) for k in range(t.n_junctions)), default=0.0)
    return JunctionNetwork(**{**net.__dict__, "angle_residual": res})


def sine_law_residual(net: JunctionNetwork, k: int) -> float:
    """Spread of sin(theta_l) / (c_m + c_n) over the three sectors of junction k,
    relative to their mean."""
    secs = net.junction_angles(k)
    labs = [l for l, _ in secs]
    c = net.weights.c
    ratios = []
    for lab, th in secs:
        others = [m for m in labs if m != lab]
        if len(others) != 2:
            return math.inf
        ratios.append(math.sin(th) / (c[others[0]] + c[others[1]]))
    mean = sum(ratios) / 3
    return (max(ratios) - min(ratios)) / mean


@dataclass
class DryResult:
    best: JunctionNetwork
    ties: list[JunctionNetwork]
    runners_up: list[JunctionNetwork]
    convex: bool
    diagnostics: list[str] = field(default_factory=list)


def best_dry(spec: InstanceSpec, max_junctions: int | None = None) -> DryResult:
    if spec.domain != "ball":
        raise InfeasibleError("the dry solver handles the disk only")
    trace, w = spec.trace, spec.weights
    diags = []
    if len(set(trace.labels)) > 3 and not w.equal:
        diags.append(
            "more than three chambers with unequal weights: junctions of degree above three "
            "are not enumerated"
        )
    sols = [solve_network(t, trace, w) for t in enumerate_topologies(trace, max_junctions)]
    good = [s for s in sols if s.feasible]
    if not good:
        raise InfeasibleError("no feasible topology")
    good.sort(key=lambda s: s.energy)
    e0 = good[0].energy
    ties = [s for s in good if s.energy - e0 <= TIE_TOL]
    ties.sort(key=lambda s: sorted(tuple(p) for p in s.junctions))
    rest = [s for s in good if s.energy - e0 > TIE_TOL]
    convex = all(is_convex_chain(r.boundary) for r in ties[0].to_cluster().regions)
    if not convex:
        diags.append("a chamber component of the minimizer is not convex")
    return DryResult(ties[0], ties, rest, convex, diags)


# ---------------------------------------------------------------------------
# regions


def is_convex_chain(chain: ArcChain, tol: float = 1e-9) -> bool:
    """Counter-clockwise chain that turns left everywhere."""
    arcs = chain.arcs
    if any(a.curvature < -tol for a in arcs):
        return False
    for a, b in zip(arcs, arcs[1:] + arcs[:1]):
        ta = endpoint_tangent(a, at_start=False)
        tb = endpoint_tangent(b, at_start=True)
        if cross(ta, tb) < -tol and (ta.x * tb.x + ta.y * tb.y) < 1 - tol:
            return False
    return chain.signed_area() > 0


def _tree_path(adj, a, b):
    prev = {a: None}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                stack.append(v)
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]


def face_paths(net: JunctionNetwork):
    """For each face: its label and the boundary as a list of pieces.

    A piece is ("arc", i) for boundary arc i or ("path", [nodes]) for a
    walk through the network from one jump point to another.
    """
    t = net.topology
    n = t.n_points
    adj = defaultdict(list)
    for u, v in t.edges:
        adj[u].append(v)
        adj[v].append(u)
    faces = _face_walk(n, None, t.components)
    pred = {}
    for b in t.components:
        for i, p in enumerate(b):
            pred[p] = b[i - 1]
    out = []
    labels = net.trace.labels
    for face in faces:
        pieces = []
        for i in face:
            pieces.append(("arc", i))
            j = (i + 1) % n
            pieces.append(("path", _tree_path(adj, ("p", j), ("p", pred[j]))))
        out.append((labels[face[0]], pieces))
    return out


def network_cluster(net: JunctionNetwork) -> ArcCluster:
    trace = net.trace
    if trace.n_jumps == 0:
        return constant_cluster(trace)
    arcs = trace.arcs()
    regions = []
    for label, pieces in face_paths(net):
        chain = []
        for kind, item in pieces:
            if kind == "arc":
                chain += boundary_arcs(arcs[item].start, arcs[item].end)
            else:
                pts = [net.position(nd) for nd in item]
                chain += [CircArc(p, q) for p, q in zip(pts, pts[1:]) if (q - p).norm() > 0]
        regions.append(Region(label, ArcChain(tuple(chain))))
    interfaces = tuple(segment_interface(p, q, l, r) for p, q, r, l in net.segments())
    juncs = []
    for k, x in enumerate(net.junctions):
        inc = tuple(i for i, e in enumerate(net.topology.edges) if ("j", k) in e)
        juncs.append(Junction(x, "interior-triple", inc))
    for i, p in enumerate(trace.jump_points()):
        inc = tuple(k for k, e in enumerate(net.topology.edges) if ("p", i) in e)
        kind = "boundary-jump"
        juncs.append(Junction(p, kind, inc))
    return ArcCluster(interfaces, tuple(juncs), tuple(regions))
