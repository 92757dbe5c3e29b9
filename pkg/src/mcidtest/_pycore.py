"""Pure-Python/numpy implementations of the hot kernels.

Semantics must match ``_core.pyx`` exactly; the test suite runs both.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

MODE_CUT = 0        # |S| * (total - |S|)
MODE_EXPANSION = 1  # min(|S|, total - |S|)
MODE_SIZE = 2       # |S|, and S may be every free node

_CHUNK_BITS = 16


def walk(cum, u, start):
    """Inverse-CDF random walk.

    ``cum[i]`` is row i's cumulative distribution with last entry 1; step t
    moves to the first j with ``u[t] < cum[state, j]``.
    """
    n = cum.shape[0]
    rows = [list(map(float, r)) for r in cum]
    out = np.empty(len(u) + 1, dtype=np.int64)
    s = int(start)
    out[0] = s
    for t, x in enumerate(u.tolist()):
        s = min(bisect_right(rows[s], x), n - 1)
        out[t + 1] = s
    return out


def scan_samples(w, local, r, k):
    """One pass of the IID-sample generator over a word.

    Parameters
    ----------
    w : int64 array
        The word.
    local : int64 array
        ``local[x]`` is the position of state x inside the target set, or -1.
    r : int64 array of length k
        Per-state quotas; modified copy is returned.
    k : int
        Size of the target set.

    Returns
    -------
    codes : int64 array
        Emitted outcomes, ``a * k + b`` for the pair (a, b) and ``k * k`` for
        the escape outcome, in scan order.
    consumed : int
        Positions with ``w[i]`` in the set scanned before every quota was
        met (all of them if some quota never is).
    r : int64 array
        Quotas after the scan (entries may be negative).
    """
    r = np.array(r, dtype=np.int64, copy=True)
    rr = r.tolist()
    loc = local.tolist()
    ww = w.tolist()
    pending = sum(1 for x in rr if x > 0)
    codes = []
    consumed = 0
    eta = k * k
    for i in range(len(ww) - 1):
        a = loc[ww[i]]
        if a < 0:
            continue
        if pending:
            consumed += 1
        if rr[a] > 0:
            b = loc[ww[i + 1]]
            codes.append(a * k + b if b >= 0 else eta)
            if rr[a] == 1:
                pending -= 1
        rr[a] -= 1
    return np.asarray(codes, dtype=np.int64), consumed, np.asarray(rr, dtype=np.int64)


def _denominator(size, total, mode):
    if mode == MODE_CUT:
        return size * (total - size)
    if mode == MODE_EXPANSION:
        return np.minimum(size, total - size)
    return size


def lex_smallest(masks):
    """Mask whose sorted member sequence is lexicographically smallest."""
    masks = np.asarray(masks, dtype=np.int64)
    prefix = 0
    while True:
        rest = masks & ~prefix
        if np.any(rest == 0):
            return int(prefix)
        low = rest & -rest
        first = low.min()
        masks = masks[low == first]
        prefix |= int(first)


def enum_subsets(W, d, total, mode, rel_tol=1e-10, abs_tol=1e-12):
    """Exhaustive minimum of boundary(S) / denominator over nonempty S.

    ``S`` ranges over subsets of the ``k`` free nodes; ``W`` is their
    pairwise weight matrix (zero diagonal) and ``d[i]`` the total weight
    from node i to every node other than itself, so the boundary of S is
    ``sum_{i in S} d_i - sum_{i != j in S} W_ij``. Subsets with a zero
    denominator are skipped. Returns ``(mask, value)`` with ties inside the
    tolerance broken towards the lexicographically smallest member list.
    """
    W = np.asarray(W, dtype=float)
    d = np.asarray(d, dtype=float)
    k = d.size
    bits = np.int64(1) << np.arange(k, dtype=np.int64)
    values = []
    masks = []
    nchunk = 1 << min(k, _CHUNK_BITS)
    for lo in range(1, 1 << k, nchunk):
        m = np.arange(lo, min(lo + nchunk, 1 << k), dtype=np.int64)
        X = ((m[:, None] & bits) != 0).astype(float)
        size = X.sum(axis=1)
        cut = X @ d - np.einsum("ij,ij->i", X @ W, X)
        den = _denominator(size, total, mode)
        ok = den > 0
        values.append(cut[ok] / den[ok])
        masks.append(m[ok])
    if not values:
        return 0, np.inf
    values = np.concatenate(values)
    masks = np.concatenate(masks)
    if values.size == 0:
        return 0, np.inf
    vmin = values.min()
    cand = masks[values <= vmin + abs_tol + rel_tol * abs(vmin)]
    return lex_smallest(cand), float(vmin)
