# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pycore`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef enum:
    MODE_CUT = 0
    MODE_EXPANSION = 1
    MODE_SIZE = 2


def walk(const double[:, ::1] cum, const double[::1] u, Py_ssize_t start):
    cdef Py_ssize_t n = cum.shape[0]
    cdef Py_ssize_t m = u.shape[0]
    out_arr = np.empty(m + 1, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t s = start, t, lo, hi, mid
    cdef double x
    out[0] = s
    with nogil:
        for t in range(m):
            x = u[t]
            # first j with x < cum[s, j]  (bisect_right)
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if x < cum[s, mid]:
                    hi = mid
                else:
                    lo = mid + 1
            s = lo if lo < n else n - 1
            out[t + 1] = s
    return out_arr


def scan_samples(const int64_t[::1] w, const int64_t[::1] local, r_in, Py_ssize_t k):
    r_arr = np.array(r_in, dtype=np.int64, copy=True)
    cdef int64_t[::1] r = r_arr
    cdef Py_ssize_t m = w.shape[0], i, pending = 0, consumed = 0, nout = 0
    cdef int64_t a, b, eta = k * k
    for i in range(k):
        if r[i] > 0:
            pending += 1
    codes_arr = np.empty(max(m - 1, 0), dtype=np.int64)
    cdef int64_t[::1] codes = codes_arr
    with nogil:
        for i in range(m - 1):
            a = local[w[i]]
            if a < 0:
                continue
            if pending:
                consumed += 1
            if r[a] > 0:
                b = local[w[i + 1]]
                codes[nout] = a * k + b if b >= 0 else eta
                nout += 1
                if r[a] == 1:
                    pending -= 1
            r[a] -= 1
    return codes_arr[:nout].copy(), consumed, r_arr


cdef inline bint lex_less(uint64_t a, uint64_t b) nogil:
    """Sorted member list of ``a`` precedes that of ``b``."""
    cdef uint64_t diff = a ^ b, low
    if diff == 0:
        return False
    low = diff & (~diff + 1)
    if a & low:
        # a holds the first differing element; b wins only if it ends there
        return (b & ~(low | (low - 1))) != 0
    return (a & ~(low | (low - 1))) == 0


cdef inline double denom(Py_ssize_t size, Py_ssize_t total, int mode) nogil:
    if mode == MODE_CUT:
        return <double>(size * (total - size))
    if mode == MODE_EXPANSION:
        return <double>(size if size < total - size else total - size)
    return <double>size


def enum_subsets(W_in, d_in, Py_ssize_t total, int mode,
                 double rel_tol=1e-10, double abs_tol=1e-12):
    cdef double[:, ::1] W = np.ascontiguousarray(W_in, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(d_in, dtype=np.float64)
    cdef Py_ssize_t k = d.shape[0]
    if k > 62:
        raise ValueError("at most 62 free nodes")
    cdef double[::1] s = np.zeros(k, dtype=np.float64)
    cdef uint64_t i, g, nsub = (<uint64_t>1) << k, best_mask = 0
    cdef Py_ssize_t v, u, size
    cdef double cut, den, val, vmin = np.inf, cutoff = 0.0
    cdef int npass
    for npass in range(2):
        for u in range(k):
            s[u] = 0.0
        cut = 0.0
        size = 0
        g = 0
        if npass == 1:
            cutoff = vmin + abs_tol + rel_tol * (vmin if vmin >= 0 else -vmin)
        with nogil:
            for i in range(1, nsub):
                v = 0
                while not ((i >> v) & 1):
                    v += 1
                if (g >> v) & 1:
                    cut -= d[v] - 2.0 * s[v]
                    size -= 1
                    for u in range(k):
                        s[u] -= W[u, v]
                else:
                    cut += d[v] - 2.0 * s[v]
                    size += 1
                    for u in range(k):
                        s[u] += W[u, v]
                g ^= (<uint64_t>1) << v
                den = denom(size, total, mode)
                if den <= 0:
                    continue
                val = cut / den
                if npass == 0:
                    if val < vmin:
                        vmin = val
                elif val <= cutoff:
                    if best_mask == 0 or lex_less(g, best_mask):
                        best_mask = g
        if vmin == np.inf:
            return 0, np.inf
    return int(best_mask), float(vmin)
