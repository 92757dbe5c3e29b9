"""Brute-force references, exact by exhaustive subset enumeration.

These stay deliberately naive: they share no code with the relaxation,
embedding or rounding path they are used to check.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded, InvalidInput
from .kernels import MODE_CUT, MODE_EXPANSION, MODE_SIZE, enum_subsets
from .linalg import StateSubset, _as_array, as_subset, hellinger_sq, total_variation

BUDGET = 24
LOW_INFO_BUDGET = 20


def _check_budget(k: int, budget: int):
    if k > budget:
        raise BudgetExceeded(f"{k} free states exceed the enumeration budget of {budget}")


def _free_system(a: np.ndarray, free: list[int], universe: list[int]):
    """Weights among ``free`` and each free node's mass to the rest of ``universe``."""
    W = a[np.ix_(free, free)].copy()
    np.fill_diagonal(W, 0.0)
    d = a[np.ix_(free, universe)].sum(axis=1) - a[free, free]
    return W, d


def _members(mask: int, free: list[int]) -> list[int]:
    return [free[b] for b in range(len(free)) if mask >> b & 1]


def sparsest_cut_exact(P, universe=None, T=()) -> tuple[StateSubset, float]:
    """Exact minimum cut value over ``S`` inside ``universe`` avoiding ``T``.

    Among equal minima the lexicographically smallest member list wins.
    """
    a = _as_array(P)
    n = a.shape[0]
    U = StateSubset.full(n) if universe is None else as_subset(universe, n)
    T = as_subset(T, n)
    free = [u for u in U if u not in T]
    if not free or len(U) < 2:
        raise InvalidInput("no nontrivial cut exists")
    _check_budget(len(free), BUDGET)
    W, d = _free_system(a, free, list(U))
    mask, value = enum_subsets(W, d, len(U), MODE_CUT)
    if not np.isfinite(value):
        raise InvalidInput("no nontrivial cut exists")
    S = StateSubset.of(_members(mask, free), n)
    # recompute directly so the reported value does not depend on the kernel
    inside = S.mask
    rest = U.mask & ~inside
    value = float(a[np.ix_(inside, rest)].sum()) / (len(S) * int(rest.sum()))
    return S, value


def cheeger_exact(P) -> float:
    """Minimum expansion over all nonempty proper subsets."""
    a = _as_array(P)
    n = a.shape[0]
    if n < 2:
        return float("inf")
    _check_budget(n, BUDGET)
    everything = list(range(n))
    W, d = _free_system(a, everything, everything)
    return enum_subsets(W, d, n, MODE_EXPANSION)[1]


def min_internal_expansion_exact(P, S) -> float:
    """Cheeger constant of the principal submatrix on ``S`` (inf if ``|S| < 2``)."""
    a = _as_array(P)
    S = as_subset(S, a.shape[0])
    if len(S) < 2:
        return float("inf")
    return cheeger_exact(a[np.ix_(S.index, S.index)])


def min_low_info_ratio(P, T) -> float:
    """``min over nonempty R in T`` of mass leaving R divided by ``|R|``."""
    a = _as_array(P)
    n = a.shape[0]
    T = as_subset(T, n)
    if not T:
        return float("inf")
    _check_budget(len(T), LOW_INFO_BUDGET)
    W, d = _free_system(a, list(T), list(range(n)))
    return enum_subsets(W, d, n, MODE_SIZE)[1]


def low_info_claim_check(P, T, floor: float) -> bool:
    """Every nonempty ``R`` inside ``T`` leaks at least ``floor * |R|`` mass."""
    return min_low_info_ratio(P, T) >= floor


def edge_distribution_distance_exact(P, Q, R) -> tuple[float, float]:
    """(TV, squared Hellinger) between the two edge distributions on ``R``.

    Both distributions are written out from their definition here rather
    than taken from the tester module.
    """
    a, b = _as_array(P), _as_array(Q)
    if a.shape != b.shape:
        raise InvalidInput("P and Q differ in size")
    R = as_subset(R, a.shape[0])
    if not R:
        raise InvalidInput("R must be nonempty")
    idx = R.index
    p = np.append(a[np.ix_(idx, idx)].ravel() / len(R), 0.0)
    q = np.append(b[np.ix_(idx, idx)].ravel() / len(R), 0.0)
    p[-1] = max(0.0, 1.0 - p[:-1].sum())
    q[-1] = max(0.0, 1.0 - q[:-1].sum())
    return total_variation(p, q), hellinger_sq(p, q)


def cheeger_sweep_bound(P) -> float:
    """Upper bound on the Cheeger constant from sweep cuts of the second eigenvector.

    Any subset's expansion bounds the minimum from above, so a check of the
    form ``f(alpha) <= bound`` that passes with this value also passes with
    the exact constant whenever ``bound`` decreases in ``alpha``.
    """
    a = _as_array(P)
    n = a.shape[0]
    if n < 2:
        return float("inf")
    _, vecs = np.linalg.eigh(0.5 * (a + a.T))
    best = float("inf")
    for v in (vecs[:, -2], np.arange(n)):
        order = np.argsort(v, kind="stable")
        mask = np.zeros(n, dtype=bool)
        for k in order[:-1]:
            mask[k] = True
            size = int(mask.sum())
            best = min(best, float(a[np.ix_(mask, ~mask)].sum()) / min(size, n - size))
    for i in range(n):
        best = min(best, float(1.0 - a[i, i]))
    return best
