"""Pure-Python annealing kernel.

Mirrors ``_kernel.pyx`` operation for operation so both produce identical
fields from identical random streams.  Only practical on small grids.
"""

import math


def _delta(lab, cost, off, w, p, a, b):
    d = 0.0
    for k in range(len(off)):
        n = lab[p + off[k]]
        d += w[k] * (cost[b][n] - cost[a][n])
    return d


def _at_interface(lab, nb4, p):
    a = lab[p]
    for k in range(4):
        if lab[p + nb4[k]] != a:
            return True
    return False


def _set(lab, gidx, gpos, gcount, g, p, b):
    """Relabel p to b, keeping the G position list in sync; returns the new G count."""
    a = lab[p]
    if a == g:
        i = gidx[p]
        last = gpos[gcount - 1]
        gpos[i] = last
        gidx[last] = i
        gidx[p] = -1
        gcount -= 1
    lab[p] = b
    if b == g:
        gpos[gcount] = p
        gidx[p] = gcount
        gcount += 1
    return gcount


def run_sweep(
    lab, mobile, is_mobile, cost, off, w, nb8, nb4,
    gidx, gpos, gcount, g, void, cap,
    pick, pick2, kind, choice, accept,
    temp, p_exchange, p_swap, p_g, flip_mode,
):
    """One sweep of len(pick) proposals.

    Returns (energy change in stencil units, new G count, accepted moves).
    """
    total = 0.0
    n_acc = 0
    nmob = len(mobile)
    for m in range(len(pick)):
        u = kind[m]
        ch = choice[m]
        if u < p_exchange:
            if gcount == 0:
                continue
            g1 = gpos[ch % gcount]
            g2 = gpos[pick2[m] % gcount]
            q = g2 + nb8[(ch >> 8) % 8]
            if not is_mobile[q]:
                continue
            a = lab[q]
            if a == g or a == void:
                continue
            d = _delta(lab, cost, off, w, g1, g, a)
            gcount = _set(lab, gidx, gpos, gcount, g, g1, a)
            d += _delta(lab, cost, off, w, q, a, g)
            gcount = _set(lab, gidx, gpos, gcount, g, q, g)
            if d < -1e-12 or (temp > 0 and accept[m] < math.exp(-d / temp)):
                total += d
                n_acc += 1
            else:
                gcount = _set(lab, gidx, gpos, gcount, g, q, a)
                gcount = _set(lab, gidx, gpos, gcount, g, g1, g)
        elif u < p_exchange + p_swap:
            p = mobile[pick[m]]
            q = mobile[pick2[m] % nmob]
            a = lab[p]
            b = lab[q]
            if a == b or not _at_interface(lab, nb4, p) or not _at_interface(lab, nb4, q):
                continue
            d = _delta(lab, cost, off, w, p, a, b)
            gcount = _set(lab, gidx, gpos, gcount, g, p, b)
            d += _delta(lab, cost, off, w, q, b, a)
            gcount = _set(lab, gidx, gpos, gcount, g, q, a)
            if d < -1e-12 or (temp > 0 and accept[m] < math.exp(-d / temp)):
                total += d
                n_acc += 1
            else:
                gcount = _set(lab, gidx, gpos, gcount, g, q, b)
                gcount = _set(lab, gidx, gpos, gcount, g, p, a)
        else:
            p = mobile[pick[m]]
            a = lab[p]
            if (ch & 0xFFFF) < p_g * 65536.0:
                b = g
            else:
                b = lab[p + nb8[(ch >> 16) % 8]]
            if b == a or b == void:
                continue
            if b == g and gcount >= cap:
                continue
            if flip_mode == 1 and ((a != 0 and a != g) or (b != 0 and b != g)):
                continue
            d = _delta(lab, cost, off, w, p, a, b)
            if d < -1e-12 or (temp > 0 and accept[m] < math.exp(-d / temp)):
                gcount = _set(lab, gidx, gpos, gcount, g, p, b)
                total += d
                n_acc += 1
    return total, gcount, n_acc
