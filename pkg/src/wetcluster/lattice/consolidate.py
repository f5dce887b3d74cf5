"""Gathering stray wet cells back into the junction pieces.

One-cell strips of G along a straight interface cost nothing extra, so an
annealed field keeps some of them.  ``consolidate`` strips G down to its
thick cores, hands the stripped cells to the cheapest neighbouring chamber
and regrows the cores greedily by the same number of cells.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy import ndimage

_BOX = [(dy, dx) for dy in range(-2, 3) for dx in range(-2, 3)]


def _delta(st: dict, p: int, a: int, b: int) -> float:
    n = st["lab"][p + st["off"]]
    c = st["cost"]
    return float(np.dot(st["w"], c[b, n] - c[a, n]))


def _dry_label(st: dict, p: int) -> tuple[int, float] | None:
    """Cheapest non-G label among the 8 neighbours of p, with its energy change."""
    lab = st["lab"]
    g, void = st["g"], st["void"]
    best = None
    for b in {int(lab[p + o]) for o in st["nb8"]}:
        if b in (g, void):
            continue
        d = _delta(st, p, g, b)
        if best is None or d < best[1]:
            best = (b, d)
    return best


def consolidate(st: dict, min_core: int = 9, reach: int = 2) -> float:
    """Strip thin G and regrow the thick cores; returns the energy change in stencil units.

    Modifies ``st["lab"]`` in place and leaves the G bookkeeping stale; the
    caller reindexes.
    """
    H, W = st["shape"]
    g = st["g"]
    lab = st["lab"]
    grid = lab.reshape(H, W)
    wet = grid == g
    mobile = st["is_mobile"].reshape(H, W) == 1
    core = ndimage.binary_opening(wet, structure=np.ones((3, 3), bool))
    comp, n = ndimage.label(core, structure=np.ones((3, 3), bool))
    if n == 0:
        return 0.0
    sizes = ndimage.sum(core, comp, index=np.arange(1, n + 1))
    kept = np.isin(comp, 1 + np.flatnonzero(sizes >= min_core))
    keep = wet & ndimage.binary_dilation(kept, iterations=reach)
    strip = list(np.flatnonzero(wet & ~keep & mobile))
    if not strip:
        return 0.0
    total = 0.0
    # peel from the outside in so each cell sees a dry neighbour
    pending = strip
    while pending:
        left = []
        for p in pending:
            choice = _dry_label(st, p)
            if choice is None:
                left.append(p)
                continue
            lab[p] = choice[0]
            total += choice[1]
        if len(left) == len(pending):
            break
        pending = left
    n_back = len(strip) - len(pending)
    total += regrow(st, n_back)
    return total


def regrow(st: dict, k: int) -> float:
    """Add k G cells one at a time, always the cheapest cell touching G."""
    H, W = st["shape"]
    lab = st["lab"]
    g, void = st["g"], st["void"]
    mob = st["is_mobile"]
    nb8 = st["nb8"]
    version = np.zeros(lab.size, np.int64)
    heap: list = []

    def push(p: int) -> None:
        a = int(lab[p])
        if a in (g, void) or not mob[p] or not any(lab[p + o] == g for o in nb8):
            return
        version[p] += 1
        heapq.heappush(heap, (_delta(st, p, a, g), int(p), int(version[p])))

    for p in np.flatnonzero(lab == g):
        for o in nb8:
            push(int(p + o))
    total = 0.0
    while k > 0 and heap:
        d, p, v = heapq.heappop(heap)
        if v != version[p] or lab[p] in (g, void):
            continue
        lab[p] = g
        total += d
        k -= 1
        for dy, dx in _BOX:
            push(p + dy * W + dx)
    return total


def window_delta(old: np.ndarray, new: np.ndarray, energy, pad: int = 3) -> float:
    """Energy change between two label arrays, evaluated on the bounding window of the change."""
    ys, xs = np.nonzero(old != new)
    if len(ys) == 0:
        return 0.0
    sl = (slice(max(ys.min() - pad, 0), ys.max() + pad + 1), slice(max(xs.min() - pad, 0), xs.max() + pad + 1))
    return energy(new, sl) - energy(old, sl)


def straighten(labels: np.ndarray, mobile: np.ndarray, n_chambers: int, energy, band: float = 8.0,
               min_cells: int = 8) -> tuple[np.ndarray, int]:
    """Replace chamber-chamber interfaces by digital chords where that does not cost energy.

    On the 16-stencil every staircase whose steps stay between two adjacent
    stencil directions has the same energy, so minimizers come in large
    degenerate families.  This move picks the chord representative of each
    family.  ``energy(labels, window)`` is the lattice energy of the pairs
    inside a window.  Returns the new labels and the number of accepted chords.
    """
    lab = np.array(labels)
    h, w = lab.shape
    yy, xx = np.mgrid[0:h, 0:w]
    done = 0
    for a in range(1, n_chambers + 1):
        A = lab == a
        if not A.any():
            continue
        for b in range(a + 1, n_chambers + 1):
            B = lab == b
            touch = np.zeros_like(A)
            touch[:, :-1] |= B[:, 1:]
            touch[:, 1:] |= B[:, :-1]
            touch[:-1, :] |= B[1:, :]
            touch[1:, :] |= B[:-1, :]
            iface = A & touch
            comp, n = ndimage.label(ndimage.binary_dilation(iface, iterations=2))
            for k in range(1, n + 1):
                ys, xs = np.nonzero(iface & (comp == k))
                if len(ys) < min_cells:
                    continue
                cand, d = _best_chord(lab, mobile, a, b, ys, xs, yy, xx, band, energy)
                if cand is not None and d <= 1e-12:
                    lab = cand
                    done += 1
            A = lab == a
    return lab, done


_JITTER = [np.array((dx, dy)) for dx in (-1, -0.5, 0, 0.5, 1) for dy in (-1, -0.5, 0, 0.5, 1)]


def _best_chord(lab, mobile, a, b, ys, xs, yy, xx, band, energy):
    """Chord between the interface extremes, ends nudged by up to a cell to the cheapest fit."""
    pts = np.column_stack([xs, ys]).astype(float)
    c = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - c, full_matrices=False)
    t = (pts - c) @ vt[0]
    ends = [pts[np.argmin(t)], pts[np.argmax(t)]]
    best, d_best = None, math.inf
    for _ in range(2):
        moved = False
        for i in (0, 1):
            base = ends[i]
            for j in _JITTER:
                trial = list(ends)
                trial[i] = base + j
                cand = _chord(lab, mobile, a, b, trial[0], trial[1], yy, xx, band)
                if cand is None:
                    continue
                d = window_delta(lab, cand, energy)
                if d < d_best - 1e-12:
                    best, d_best, ends, moved = cand, d, trial, True
        if not moved:
            break
    return best, d_best


def _chord(lab, mobile, a, b, p0, p1, yy, xx, band):
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    L = float(np.hypot(*(p1 - p0)))
    if L < 2:
        return None
    h, w = lab.shape
    m = int(math.ceil(band)) + 1
    y0 = max(int(min(p0[1], p1[1])) - m, 0)
    y1 = min(int(max(p0[1], p1[1])) + m + 1, h)
    x0 = max(int(min(p0[0], p1[0])) - m, 0)
    x1 = min(int(max(p0[0], p1[0])) + m + 1, w)
    win = (slice(y0, y1), slice(x0, x1))
    sub = lab[win]
    u = (p1 - p0) / L
    dx = xx[win] - p0[0]
    dy = yy[win] - p0[1]
    s = dx * -u[1] + dy * u[0]
    tt = dx * u[0] + dy * u[1]
    region = ((sub == a) | (sub == b)) & mobile[win] & (np.abs(s) <= band) & (tt >= 0) & (tt <= L)
    if not region.any():
        return None
    side = np.sum(s[region & (sub == a)]) - np.sum(s[region & (sub == b)])
    if side == 0:
        return None
    out = lab.copy()
    out[win][region] = np.where(s[region] * np.sign(side) > 0, a, b)
    return out
