"""Measurements on optimized label fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, optimize
from skimage import measure as skmeasure
from skimage.morphology import convex_hull_image

from ..cluster import ArcCluster, InstanceSpec, Weights
from .crofton import full_stencil, pair_cost_matrix
from .field import LabelField


class MeasurementError(ValueError):
    pass


# ---------------------------------------------------------------------------
# interface extraction and circle fits


def interface_points(f: LabelField, a: int, b: int, window=None, clearance: float = 2.0) -> np.ndarray:
    """Sub-cell points on the a|b interface, away from any third label.

    ``window`` is (cx, cy, radius) in world coordinates; ``clearance`` is the
    minimum distance in cells to cells of any other label.
    """
    lab = f.labels
    contours = skmeasure.find_contours((lab == a).astype(float), 0.5)
    if not contours:
        return np.zeros((0, 2))
    pts = np.concatenate(contours)
    other = ~np.isin(lab, (a, b))
    if f.kind == "ball":
        other |= ~f.domain
    dist_other = ndimage.distance_transform_edt(~other)
    dist_b = ndimage.distance_transform_edt(lab != b)
    r = np.clip(np.rint(pts[:, 0]).astype(int), 0, lab.shape[0] - 1)
    c = np.clip(np.rint(pts[:, 1]).astype(int), 0, lab.shape[1] - 1)
    keep = (dist_other[r, c] > clearance) & (dist_b[r, c] <= 1.5)
    pts = pts[keep]
    xy = np.column_stack([f.origin.x + (pts[:, 1] + 0.5) * f.cell, f.origin.y + (pts[:, 0] + 0.5) * f.cell])
    if window is not None:
        cx, cy, rad = window
        xy = xy[np.hypot(xy[:, 0] - cx, xy[:, 1] - cy) <= rad]
    return xy


@dataclass(frozen=True)
class CircleFit:
    center: tuple[float, float]
    radius: float
    curvature: float  # signed: positive when the first label is convex toward the second
    rms: float
    n_points: int


def fit_circle(xy: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Geometric least-squares circle, started from the algebraic fit."""
    x, y = xy[:, 0], xy[:, 1]
    A = np.column_stack([x, y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(A, x * x + y * y, rcond=None)
    c0 = sol[:2] / 2
    r0 = math.sqrt(max(sol[2] + c0 @ c0, 1e-300))

    def res(p):
        return np.hypot(x - p[0], y - p[1]) - p[2]

    out = optimize.least_squares(res, [c0[0], c0[1], r0], method="lm")
    cx, cy, r = out.x
    return np.array([cx, cy]), abs(r), float(np.sqrt(np.mean(res(out.x) ** 2)))


def measure_curvature(f: LabelField, pair: tuple[int, int], window=None, clearance: float = 2.0) -> CircleFit:
    a, b = pair
    xy = interface_points(f, a, b, window, clearance)
    if len(xy) < 8:
        raise MeasurementError(f"only {len(xy)} interface points for labels {a}|{b}")
    center, r, rms = fit_circle(xy)
    # sign: is the center on a's side?
    i = int(np.clip((center[1] - f.origin.y) / f.cell, 0, f.shape[0] - 1))
    j = int(np.clip((center[0] - f.origin.x) / f.cell, 0, f.shape[1] - 1))
    mid = xy.mean(axis=0)
    # probe a point between the arc and the center to decide the side
    probe = mid + (center - mid) * min(1.0, 3 * f.cell / max(np.linalg.norm(center - mid), 1e-300))
    pi = int(np.clip((probe[1] - f.origin.y) / f.cell, 0, f.shape[0] - 1))
    pj = int(np.clip((probe[0] - f.origin.x) / f.cell, 0, f.shape[1] - 1))
    sign = 1.0 if f.labels[pi, pj] == a else -1.0
    return CircleFit((float(center[0]), float(center[1])), r, sign / r, rms, len(xy))


# ---------------------------------------------------------------------------
# distances


def _as_field(x, like: LabelField, spec: InstanceSpec | None) -> LabelField:
    if isinstance(x, LabelField):
        return x
    if isinstance(x, ArcCluster):
        from .anneal import rasterize

        if spec is None:
            spec = _spec_stub(like)
        return rasterize(x, spec, int(round(like.resolution)))
    raise TypeError("expected a LabelField or ArcCluster")


def _spec_stub(f: LabelField):
    class _S:
        domain = f.kind
        n_chambers = f.n_chambers

    return _S()


def hausdorff(fa, fb, region: int, spec: InstanceSpec | None = None) -> float:
    """Symmetric Hausdorff distance between the cells of ``region`` in two rasters.

    Returns +inf when the region is empty in exactly one input.
    """
    if isinstance(fa, LabelField):
        fb = _as_field(fb, fa, spec)
    else:
        fb = _as_field(fb, fb, spec) if isinstance(fb, LabelField) else fb
        fa = _as_field(fa, fb, spec)
    if fa.shape != fb.shape or not math.isclose(fa.cell, fb.cell):
        raise MeasurementError("fields live on different grids")
    ma, mb = fa.mask(region), fb.mask(region)
    na, nb = ma.any(), mb.any()
    if not na and not nb:
        return 0.0
    if na != nb:
        return math.inf
    da = ndimage.distance_transform_edt(~mb)[ma].max()
    db = ndimage.distance_transform_edt(~ma)[mb].max()
    return float(max(da, db)) * fa.cell


def chamber_hausdorff(fa, fb, spec: InstanceSpec | None = None) -> float:
    ref = fa if isinstance(fa, LabelField) else fb
    return max(hausdorff(fa, fb, k, spec) for k in range(1, ref.n_chambers + 1))


def distance_to_points(f: LabelField, region: int, points) -> float:
    """sup over cells of ``region`` of the distance to the nearest point; 0 if empty."""
    m = f.mask(region)
    if not m.any() or len(points) == 0:
        return 0.0
    xs, ys = f.centers()
    ii, jj = np.nonzero(m)
    P = np.column_stack([xs[jj], ys[ii]])
    Q = np.asarray(points, dtype=float).reshape(-1, 2)
    d = np.min(np.hypot(P[:, None, 0] - Q[None, :, 0], P[:, None, 1] - Q[None, :, 1]), axis=1)
    return float(d.max())


# ---------------------------------------------------------------------------
# structural counts


def cusp_points(f: LabelField, merge_cells: float = 4.0) -> list[tuple[float, float]]:
    """Places where G meets two distinct chambers, clustered within ``merge_cells``."""
    g = f.g_label
    lab = f.labels
    windows = [lab[:-1, :-1], lab[1:, :-1], lab[:-1, 1:], lab[1:, 1:]]
    stack = np.stack(windows)
    has_g = (stack == g).any(axis=0)
    chambers = np.where((stack != g) & (stack != 0), stack, 0)
    distinct = np.zeros(has_g.shape, dtype=int)
    for k in range(1, f.n_chambers + 1):
        distinct += (chambers == k).any(axis=0)
    hit = has_g & (distinct >= 2)
    if not hit.any():
        return []
    grown = ndimage.binary_dilation(hit, iterations=int(math.ceil(merge_cells / 2)))
    comp, n = ndimage.label(grown)
    out = []
    for k in range(1, n + 1):
        ii, jj = np.nonzero(hit & (comp == k))
        out.append((f.origin.x + (jj.mean() + 1) * f.cell, f.origin.y + (ii.mean() + 1) * f.cell))
    return out


def convexity_excess(f: LabelField, label: int) -> list[int]:
    """Cells of each connected component's convex hull that the component lacks."""
    comp, n = ndimage.label(f.mask(label))
    out = []
    for k in range(1, n + 1):
        m = comp == k
        hull = convex_hull_image(m, offset_coordinates=False)
        out.append(int(np.count_nonzero(hull & ~m)))
    return out


# ---------------------------------------------------------------------------
# monotonicity and infiltration probes


def ball_energy(f: LabelField, w: Weights, x: float, y: float, r: float, stencil: int = 16) -> float:
    """Lattice energy of the cut pairs whose midpoint lies in B_r(x, y)."""
    g = f.g_label
    cost = pair_cost_matrix(w.c, f.n_chambers + 2, g)
    lab = f.labels
    dom = f.domain if f.kind == "ball" else np.ones(lab.shape, bool)
    xs, ys = f.centers()
    c = f.cell
    j0 = max(0, int((x - r - f.origin.x) / c) - 3)
    j1 = min(lab.shape[1], int((x + r - f.origin.x) / c) + 4)
    i0 = max(0, int((y - r - f.origin.y) / c) - 3)
    i1 = min(lab.shape[0], int((y + r - f.origin.y) / c) + 4)
    sub = lab[i0:i1, j0:j1]
    sdom = dom[i0:i1, j0:j1]
    X, Y = np.meshgrid(xs[j0:j1], ys[i0:i1])
    vecs, wts = full_stencil(stencil)
    total = 0.0
    half = len(wts) // 2
    for (dx, dy), wk in zip(vecs[:half], wts[:half]):
        dx, dy = int(dx), int(dy)
        h, wd = sub.shape
        ys0, ys1 = max(0, -dy), h - max(0, dy)
        xs0, xs1 = max(0, -dx), wd - max(0, dx)
        p = sub[ys0:ys1, xs0:xs1]
        q = sub[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
        ok = sdom[ys0:ys1, xs0:xs1] & sdom[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
        mx = X[ys0:ys1, xs0:xs1] + dx * c / 2
        my = Y[ys0:ys1, xs0:xs1] + dy * c / 2
        inside = (mx - x) ** 2 + (my - y) ** 2 < r * r
        total += wk * float((cost[p, q] * (ok & inside)).sum())
    return total * c


@dataclass(frozen=True)
class MonotonicityReport:
    points: list
    radii: np.ndarray
    profiles: np.ndarray  # energy(B_r(x)) / r per point and radius
    lambdas: np.ndarray  # smallest slope fixing each profile
    lam: float  # max over points

    def corrected(self, lam: float | None = None) -> np.ndarray:
        lam = self.lam if lam is None else lam
        return self.profiles + lam * self.radii[None, :]

    def is_monotone(self, lam: float | None = None, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.corrected(lam), axis=1) >= -tol))


def sample_interface_points(f: LabelField, n: int, seed: int = 0, margin: float = 0.3) -> list[tuple[float, float]]:
    """Seeded sample of interface cell centers at least ``margin`` from the disk boundary."""
    lab = f.labels
    edge = np.zeros(lab.shape, bool)
    edge[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    edge[:-1, :] |= lab[:-1, :] != lab[1:, :]
    xs, ys = f.centers()
    X, Y = np.meshgrid(xs, ys)
    if f.kind == "ball":
        edge &= np.hypot(X, Y) < 1.0 - margin
    ii, jj = np.nonzero(edge)
    if len(ii) == 0:
        return []
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(ii), size=min(n, len(ii)), replace=False)
    pick.sort()
    return [(float(xs[jj[k]]), float(ys[ii[k]])) for k in pick]


def monotonicity_profile(f: LabelField, w: Weights, points, r_min: float | None = None, r_max: float = 0.3,
                         n_radii: int = 24, stencil: int = 16) -> MonotonicityReport:
    """Profiles r -> E(B_r(x))/r and the smallest slope Lambda making each non-decreasing."""
    r_min = 4 * f.cell if r_min is None else r_min
    radii = np.geomspace(r_min, r_max, n_radii)
    prof = np.array([[ball_energy(f, w, x, y, r, stencil) / r for r in radii] for x, y in points])
    if len(points) == 0:
        return MonotonicityReport([], radii, prof.reshape(0, n_radii), np.zeros(0), 0.0)
    # (P[i+1] - P[i]) + lam (r[i+1] - r[i]) >= 0 for all i
    dr = np.diff(radii)
    need = np.max(-np.diff(prof, axis=1) / dr[None, :], axis=1)
    lams = np.maximum(need, 0.0)
    return MonotonicityReport(list(points), radii, prof, lams, float(lams.max()))


@dataclass(frozen=True)
class InfiltrationReport:
    samples: int
    low_density: int
    violations: int
    threshold: float
    max_low_density: float


def infiltration_probe(f: LabelField, n: int = 200, seed: int = 0, threshold: float = 0.05,
                       r_range: tuple[float, float] = (0.02, 0.2)) -> InfiltrationReport:
    """Sample (x, r, chamber); where the chamber's cell count in B_r(x) is below
    threshold * r^2 / cell^2, record whether B_{r/4}(x) still meets it."""
    rng = np.random.default_rng(seed)
    xs, ys = f.centers()
    X, Y = np.meshgrid(xs, ys)
    dom = f.domain
    low = viol = 0
    worst = 0.0
    for _ in range(n):
        r = rng.uniform(*r_range)
        while True:
            x, y = rng.uniform(-1, 1, size=2)
            if f.kind != "ball" or math.hypot(x, y) < 1 - r:
                break
        ell = int(rng.integers(1, f.n_chambers + 1))
        d2 = (X - x) ** 2 + (Y - y) ** 2
        m = f.labels == ell
        count = np.count_nonzero(m & (d2 < r * r) & dom)
        if count < threshold * r * r / f.cell**2:
            low += 1
            worst = max(worst, count * f.cell**2 / (r * r))
            if np.count_nonzero(m & (d2 < (r / 4) ** 2)):
                viol += 1
    return InfiltrationReport(n, low, viol, threshold, worst)
