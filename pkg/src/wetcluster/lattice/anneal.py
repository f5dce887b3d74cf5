"""Simulated-annealing oracle over label rasters."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import ndimage

from ..cluster import ArcCluster, BoundaryTrace, InfeasibleError, InstanceSpec, points_in_polygon
from ..arcs import Point2
from .consolidate import regrow, consolidate, straighten
from .crofton import full_stencil, labels_energy, pair_cost_matrix
from .field import LabelField, domain_mask, grid_for
from . import kernel

PAD = 2
TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class OracleConfig:
    resolution: int = 256
    stencil: int = 16
    t0: float = 2.0  # in cell-lengths of energy
    cooling: float = 0.97
    sweeps: int = 400
    seed: int = 0
    flip: bool = True
    exchange: bool = True
    swap: bool | None = None  # None: on for the plane, off for the ball
    p_g: float = 0.05
    p_exchange: float = 0.15
    p_swap: float = 0.3
    polish_sweeps: int = 60
    exchange_moves: int = 50  # per wet cell in each polish round
    ring: float = 2.5  # frozen boundary ring width in cells
    band: int = 2  # proposals go to cells this close to an interface
    g_focus: int = 4  # extra proposal weight on cells near G
    consolidate: int = 3  # rounds of stray-G gathering after the polish
    straighten: bool = True  # chord moves on chamber-chamber interfaces (ball)
    backend: str | None = None

    def __post_init__(self):
        if self.resolution < 8:
            raise ValueError("resolution must be at least 8")
        if self.stencil not in (8, 16):
            raise ValueError("stencil must be 8 or 16")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.sweeps < 0 or self.polish_sweeps < 0:
            raise ValueError("sweep counts must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OracleResult:
    field: LabelField
    energy: float
    initial_energy: float
    trace: list = field(default_factory=list)
    backend: str = ""
    wall: float = 0.0
    accepted: int = 0
    notes: list = field(default_factory=list)

    @property
    def wet_area(self) -> float:
        return self.field.wet_area


# ---------------------------------------------------------------------------
# initial fields


def polar_grid(f: LabelField) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    xs, ys = f.centers()
    X, Y = np.meshgrid(xs, ys)
    return X, Y, np.hypot(X, Y), np.mod(np.arctan2(Y, X), TWO_PI)


def trace_labels(trace: BoundaryTrace, theta: np.ndarray) -> np.ndarray:
    """Label of the boundary arc at each polar angle."""
    ang = np.array(trace.angles)
    lab = np.array(trace.labels)
    if len(ang) <= 1:
        return np.full(theta.shape, lab[0], dtype=np.uint8)
    idx = np.searchsorted(ang, theta, side="right") - 1
    return lab[idx % len(lab)].astype(np.uint8)


def segment_masks(f: LabelField, trace: BoundaryTrace) -> dict[int, np.ndarray]:
    """Cells of the circular segments between each boundary arc and its chord, per label."""
    X, Y, _, _ = polar_grid(f)
    dom = f.domain
    out: dict[int, np.ndarray] = {}
    if trace.n_jumps == 0:
        out[trace.labels[0]] = dom.copy()
        return out
    for arc in trace.arcs():
        m = trace.in_segment(X, Y, arc) & dom
        out[arc.label] = out.get(arc.label, np.zeros_like(m)) | m
    return out


def repair_containment(f: LabelField, trace: BoundaryTrace) -> LabelField:
    """Give every circular segment to the label of its arc, label by label."""
    if f.kind != "ball":
        raise ValueError("containment repair applies to the ball")
    lab = np.array(f.labels)
    for label, m in sorted(segment_masks(f, trace).items()):
        lab[m] = label
    return f.with_labels(lab)


def containment_violations(f: LabelField, trace: BoundaryTrace) -> int:
    return int(sum(np.count_nonzero(m & (f.labels != label)) for label, m in segment_masks(f, trace).items()))


def sector_field(spec: InstanceSpec, resolution: int) -> LabelField:
    """Angular Voronoi seeding: every disk cell takes the label of the nearest boundary arc."""
    origin, cell, shape = grid_for("ball", resolution)
    f = LabelField(origin, cell, np.zeros(shape, np.uint8), spec.n_chambers, "ball")
    _, _, _, th = polar_grid(f)
    lab = np.where(f.domain, trace_labels(spec.trace, th), 0).astype(np.uint8)
    return f.with_labels(lab)


def plane_field(spec: InstanceSpec, resolution: int) -> LabelField:
    """Chambers as sectors of one disk of the total mass, exact cell counts per chamber."""
    origin, cell, shape = grid_for("plane", resolution)
    f = LabelField(origin, cell, np.zeros(shape, np.uint8), spec.n_chambers, "plane")
    masses = np.array(spec.masses)
    total = masses.sum()
    X, Y, R, th = polar_grid(f)
    rad = math.sqrt(total / math.pi)
    if rad > 1.1 - 4 * cell:
        raise InfeasibleError("chamber masses do not fit the plane window")
    bounds = np.concatenate([[0.0], np.cumsum(masses) / total * TWO_PI])
    lab = np.zeros(shape, np.uint8)
    targets = np.rint(masses / cell**2).astype(int)
    # order cells by radius so each chamber gets exactly its target count
    order = np.argsort(R, axis=None, kind="stable")
    thf = th.ravel()[order]
    flat = lab.ravel()
    for k in range(len(masses)):
        sel = order[(thf >= bounds[k]) & (thf < bounds[k + 1])][: targets[k]]
        flat[sel] = k + 1
    return f.with_labels(flat.reshape(shape))


# ---------------------------------------------------------------------------
# kernel state


def _state(f: LabelField, frozen: np.ndarray, weights, stencil: int, cap: int) -> dict:
    n = f.n_chambers
    g, void = n + 1, n + 2
    h, w = f.shape
    H, W = h + 2 * PAD, w + 2 * PAD
    lab = np.full((H, W), void, np.uint8)
    inner = np.where(f.domain, f.labels, void) if f.kind == "ball" else f.labels
    lab[PAD:-PAD, PAD:-PAD] = inner
    mob = np.zeros((H, W), np.uint8)
    mob[PAD:-PAD, PAD:-PAD] = f.domain & ~frozen
    vecs, wts = full_stencil(stencil)
    off = np.array([dy * W + dx for dx, dy in vecs], np.int64)
    nb8 = np.array([dy * W + dx for dx, dy in [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]], np.int64)
    nb4 = nb8[::2].copy()
    flat = lab.ravel()
    gidx = np.full(flat.size, -1, np.int64)
    gpos = np.zeros(max(cap, 1) + 1, np.int64)
    gcells = np.nonzero(flat == g)[0]
    if len(gcells) > cap:
        raise InfeasibleError("initial field exceeds the wet-area cap")
    gpos[: len(gcells)] = gcells
    gidx[gcells] = np.arange(len(gcells))
    cost = pair_cost_matrix(weights.c, n + 3, g)
    cost[void, :] = 0.0
    cost[:, void] = 0.0
    return {
        "lab": flat,
        "shape": (H, W),
        "mobile": np.nonzero(mob.ravel())[0].astype(np.int64),
        "is_mobile": mob.ravel().copy(),
        "cost": np.ascontiguousarray(cost),
        "off": off,
        "w": np.ascontiguousarray(wts),
        "nb8": nb8,
        "nb4": nb4,
        "gidx": gidx,
        "gpos": gpos,
        "gcount": len(gcells),
        "g": g,
        "void": void,
        "cap": cap,
        "stencil": stencil,
    }


def active_band(st: dict, radius: int = 2, g_focus: int = 0, g_radius: int = 4) -> np.ndarray:
    """Mobile cells within ``radius`` cells of a label change between domain cells.

    With ``g_focus`` > 0 the cells near G are listed that many extra times,
    so uniform picks from the list favour the wet pieces.
    """
    H, W = st["shape"]
    lab = st["lab"].reshape(H, W)
    void = st["void"]
    edge = np.zeros((H, W), dtype=bool)
    a = lab[:, :-1]
    b = lab[:, 1:]
    e = (a != b) & (a != void) & (b != void)
    edge[:, :-1] |= e
    edge[:, 1:] |= e
    a = lab[:-1, :]
    b = lab[1:, :]
    e = (a != b) & (a != void) & (b != void)
    edge[:-1, :] |= e
    edge[1:, :] |= e
    mob = st["is_mobile"].reshape(H, W) == 1
    band = ndimage.binary_dilation(edge, iterations=radius) & mob
    idx = np.flatnonzero(band)
    if g_focus and st["gcount"]:
        near = ndimage.binary_dilation(lab == st["g"], iterations=g_radius) & band
        gi = np.flatnonzero(near)
        idx = np.concatenate([idx] + [gi] * g_focus)
    return idx.astype(np.int64)


def _unpad(state: dict, f: LabelField) -> np.ndarray:
    H, W = state["shape"]
    lab = state["lab"].reshape(H, W)[PAD:-PAD, PAD:-PAD].copy()
    lab[lab == state["void"]] = 0
    return lab


def _draws(rng: np.random.Generator, n: int, nmob: int) -> dict:
    return {
        "pick": rng.integers(0, nmob, n, dtype=np.int64),
        "pick2": rng.integers(0, 2**62, n, dtype=np.int64),
        "kind": rng.random(n),
        "choice": rng.integers(0, 2**62, n, dtype=np.int64),
        "accept": rng.random(n),
    }


def wet_cap(delta: float, cell: float) -> int:
    return int(math.floor(delta / cell**2 + 1e-9))


def frozen_ring(f: LabelField, width_cells: float) -> np.ndarray:
    _, _, R, _ = polar_grid(f)
    if f.kind == "ball":
        return R > 1.0 - width_cells * f.cell
    h, w = f.shape
    ring = np.zeros(f.shape, dtype=bool)
    k = PAD
    ring[:k, :] = ring[-k:, :] = ring[:, :k] = ring[:, -k:] = True
    return ring


def initial_field(spec: InstanceSpec, cfg: OracleConfig) -> LabelField:
    if spec.domain == "ball":
        return repair_containment(sector_field(spec, cfg.resolution), spec.trace)
    return plane_field(spec, cfg.resolution)


def optimize(spec: InstanceSpec, cfg: OracleConfig = OracleConfig(), init: LabelField | None = None) -> OracleResult:
    """Anneal from the seeded field, then polish at zero temperature; deterministic in (spec, cfg)."""
    t_start = time.perf_counter()
    f0 = init if init is not None else initial_field(spec, cfg)
    area = math.pi if spec.domain == "ball" else float(np.prod(f0.shape)) * f0.cell**2
    if spec.delta > area:
        raise InfeasibleError("delta exceeds the domain area")
    cap = wet_cap(spec.delta, f0.cell)
    frozen = frozen_ring(f0, cfg.ring)
    st = _state(f0, frozen, spec.weights, cfg.stencil, cap)
    nmob = len(st["mobile"])
    rng = np.random.default_rng(cfg.seed)
    swap = cfg.swap if cfg.swap is not None else spec.domain == "plane"
    p_ex = cfg.p_exchange if cfg.exchange and cap > 0 else 0.0
    p_sw = cfg.p_swap if swap else 0.0
    flip_mode = 1 if spec.domain == "plane" else 0
    if not cfg.flip:
        p_sw = 1.0 - p_ex
    backend = cfg.backend or kernel.BACKEND

    e_init = f0.energy(spec.weights, cfg.stencil)
    e_cur = e_init
    best_lab, best_e = st["lab"].copy(), e_init
    best_g = st["gcount"]
    rows = [(0, cfg.t0 * f0.cell, best_e, best_g * f0.cell**2)]
    accepted = 0
    temp = cfg.t0
    for s in range(1, cfg.sweeps + 1):
        st["mobile"] = active_band(st, cfg.band, cfg.g_focus)
        if len(st["mobile"]) == 0:
            break
        d, acc = kernel.run_sweep(st, _draws(rng, nmob, len(st["mobile"])), temp, p_ex, p_sw, cfg.p_g, flip_mode, backend)
        accepted += acc
        e_cur += d * f0.cell
        if e_cur < best_e - 1e-12:
            best_e, best_lab, best_g = e_cur, st["lab"].copy(), st["gcount"]
        rows.append((s, temp * f0.cell, best_e, best_g * f0.cell**2))
        temp *= cfg.cooling
    # zero-temperature polish from the best field: wet-cell exchanges gather
    # stray G (neutral on straight interfaces) into the junction pieces
    st["lab"][:] = best_lab
    _reindex_g(st)
    accepted += _polish(st, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend)
    if st["gcount"] and cfg.consolidate:
        _gather(st, f0.cell, spec, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend)
    if 0 < st["gcount"] < cap:
        _fill(st, f0.cell, cap, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend)
    out = f0.with_labels(_unpad(st, f0))
    if spec.domain == "ball" and cfg.straighten:
        # chamber-chamber interfaces: pick the chord among equal-energy staircases
        cost = pair_cost_matrix(spec.weights.c, spec.n_chambers + 2, out.g_label)
        dom = out.domain

        def local(lab, sl):
            return labels_energy(lab[sl], cost, out.cell, cfg.stencil, dom[sl])

        lab, _ = straighten(out.labels, dom & ~frozen, spec.n_chambers, local)
        out = out.with_labels(lab)
    e_out = out.energy(spec.weights, cfg.stencil)
    if e_out > best_e + 1e-9:
        # polish never raises the energy; guard against drift anyway
        st["lab"][:] = best_lab
        out = f0.with_labels(_unpad(st, f0))
        e_out = out.energy(spec.weights, cfg.stencil)
    rows.append((cfg.sweeps + 1, 0.0, e_out, out.wet_area))
    notes = []
    if spec.domain == "ball":
        v = containment_violations(out, spec.trace)
        if v:
            notes.append(f"{v} cells violate segment containment")
    meta = {"energy": e_out, "seed": cfg.seed, "config": cfg.to_dict(), "spec": spec.to_dict(), "backend": backend}
    out = out.with_labels(out.labels, **meta)
    return OracleResult(out, e_out, e_init, rows, backend, time.perf_counter() - t_start, accepted, notes)


def _polish(st, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend) -> int:
    """Zero-temperature rounds until nothing is accepted; returns accepted moves."""
    accepted = 0
    for _ in range(cfg.polish_sweeps):
        acc = 0
        if st["gcount"] > 0 and p_ex > 0:
            n_ex = cfg.exchange_moves * st["gcount"]
            _, a = kernel.run_sweep(st, _draws(rng, n_ex, 1), 0.0, 1.0, 0.0, 0.0, flip_mode, backend)
            acc += a
        st["mobile"] = active_band(st, cfg.band, cfg.g_focus)
        if len(st["mobile"]):
            _, a = kernel.run_sweep(st, _draws(rng, nmob, len(st["mobile"])), 0.0, p_ex, p_sw, cfg.p_g, flip_mode, backend)
            acc += a
        accepted += acc
        if acc == 0:
            break
    return accepted


def _gather(st, cell, spec, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend) -> None:
    """Consolidate stray G and re-polish, keeping the result only if the energy does not rise."""
    H, W = st["shape"]
    for _ in range(cfg.consolidate):
        before = st["lab"].copy()
        e0 = _energy(st, cell)
        consolidate(st)
        _reindex_g(st)
        _polish(st, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend)
        e1 = _energy(st, cell)
        if e1 > e0 + 1e-12:
            st["lab"][:] = before
            _reindex_g(st)
            return
        if e1 > e0 - 1e-12:
            return


def _fill(st, cell, cap, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend) -> None:
    """Grow G to the cap with the cheapest cells touching it; undone if the energy rises."""
    before = st["lab"].copy()
    e0 = _energy(st, cell)
    regrow(st, cap - st["gcount"])
    _reindex_g(st)
    _polish(st, cfg, rng, nmob, p_ex, p_sw, flip_mode, backend)
    if _energy(st, cell) > e0 + 1e-12:
        st["lab"][:] = before
        _reindex_g(st)


def _energy(st: dict, cell: float) -> float:
    H, W = st["shape"]
    return labels_energy(st["lab"].reshape(H, W), st["cost"], cell, st["stencil"])


def _reindex_g(st: dict) -> None:
    g = st["g"]
    gcells = np.nonzero(st["lab"] == g)[0]
    st["gidx"][:] = -1
    st["gpos"][: len(gcells)] = gcells
    st["gidx"][gcells] = np.arange(len(gcells))
    st["gcount"] = len(gcells)


# ---------------------------------------------------------------------------
# rasterizing arc clusters


def rasterize(cluster: ArcCluster, spec: InstanceSpec, resolution: int, step: float | None = None) -> LabelField:
    """Label each disk cell by the cluster region containing its center."""
    origin, cell, shape = grid_for(spec.domain, resolution)
    f = LabelField(origin, cell, np.zeros(shape, np.uint8), spec.n_chambers, spec.domain)
    X, Y, _, _ = polar_grid(f)
    lab = np.zeros(shape, np.uint8)
    step = step or cell / 4
    g = f.g_label
    # chambers first, wet pieces on top
    for reg in sorted(cluster.regions, key=lambda r: r.label == "G"):
        poly = reg.boundary.polyline(max_step=step)
        inside = points_in_polygon(poly, X, Y)
        lab[inside] = g if reg.label == "G" else reg.label
    if spec.domain == "ball":
        lab[~f.domain] = 0
    return f.with_labels(lab)
