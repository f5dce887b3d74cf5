# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled annealing kernel; see _pykernel.py for the reference semantics."""

from libc.math cimport exp

ctypedef unsigned char u8
ctypedef long long i64


cdef inline double _delta(u8[::1] lab, double[:, ::1] cost, i64[::1] off, double[::1] w,
                          i64 p, int a, int b) noexcept nogil:
    cdef double d = 0.0
    cdef Py_ssize_t k
    cdef int n
    for k in range(off.shape[0]):
        n = lab[p + off[k]]
        d += w[k] * (cost[b, n] - cost[a, n])
    return d


cdef inline bint _at_interface(u8[::1] lab, i64[::1] nb4, i64 p) noexcept nogil:
    cdef int a = lab[p]
    cdef Py_ssize_t k
    for k in range(4):
        if lab[p + nb4[k]] != a:
            return True
    return False


cdef inline i64 _set(u8[::1] lab, i64[::1] gidx, i64[::1] gpos, i64 gcount, int g,
                     i64 p, int b) noexcept nogil:
    cdef int a = lab[p]
    cdef i64 i, last
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
    u8[::1] lab, i64[::1] mobile, u8[::1] is_mobile, double[:, ::1] cost,
    i64[::1] off, double[::1] w, i64[::1] nb8, i64[::1] nb4,
    i64[::1] gidx, i64[::1] gpos, i64 gcount, int g, int void, i64 cap,
    i64[::1] pick, i64[::1] pick2, double[::1] kind, i64[::1] choice, double[::1] accept,
    double temp, double p_exchange, double p_swap, double p_g, int flip_mode,
):
    cdef double total = 0.0, d, u
    cdef i64 n_acc = 0, nmob = mobile.shape[0], ch, g1, g2, p, q
    cdef Py_ssize_t m
    cdef int a, b
    with nogil:
        for m in range(pick.shape[0]):
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
                if d < -1e-12 or (temp > 0 and accept[m] < exp(-d / temp)):
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
                if d < -1e-12 or (temp > 0 and accept[m] < exp(-d / temp)):
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
                if d < -1e-12 or (temp > 0 and accept[m] < exp(-d / temp)):
                    gcount = _set(lab, gidx, gpos, gcount, g, p, b)
                    total += d
                    n_acc += 1
    return total, gcount, n_acc
