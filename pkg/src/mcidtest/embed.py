"""Bourgain embedding into L1, cut decomposition, and cut rounding.

``find_comp`` is the rounding pipeline: solve the metric relaxation, embed
the metric into L1, split the embedding into weighted cut metrics, and keep
the candidate cut of smallest cut value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONSTANTS, Constants
from .errors import InvalidInput
from .linalg import StateSubset, _as_array, as_subset
from .lp import Metric, solve_metric
from .rng import derive_seed, generator


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray = field(repr=False)
    #: max over pairs of ||f(i) - f(j)||_1 / d(i, j), after rescaling
    distortion: float = 1.0

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 2:
            raise InvalidInput("coords must be an n x m array")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def m(self) -> int:
        return self.coords.shape[1]

    def l1(self) -> np.ndarray:
        c = self.coords
        return np.abs(c[:, None, :] - c[None, :, :]).sum(axis=2)


@dataclass(frozen=True)
class CutDecomposition:
    n: int
    cuts: tuple[tuple[StateSubset, float], ...]

    def __len__(self):
        return len(self.cuts)

    def distances(self) -> np.ndarray:
        """``sum_S alpha_S delta_S`` as an ``n x n`` matrix."""
        out = np.zeros((self.n, self.n))
        for S, alpha in self.cuts:
            m = S.mask
            out += alpha * (m[:, None] != m[None, :])
        return out


def embedding_dimension(n: int, c_emb: float) -> tuple[int, int]:
    """(number of scales, repetitions per scale)."""
    scales = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    reps = max(1, math.ceil(c_emb * math.log(n))) if n > 1 else 1
    return scales, reps


def _zero_classes(d: np.ndarray) -> np.ndarray:
    """Representative index for each point under ``d == 0``."""
    n = d.shape[0]
    rep = np.arange(n)
    for i in range(n):
        if rep[i] != i:
            continue
        same = np.flatnonzero((d[i] <= 0.0) & (rep == np.arange(n)))
        rep[same] = i
    return rep


def bourgain_embed(d, seed: int, c_emb: float = DEFAULT_CONSTANTS.c_emb) -> Embedding:
    """Randomized Fréchet embedding of a finite metric into L1.

    For each scale ``t = 1..ceil(log2 n)`` and repetition ``r = 1..L`` with
    ``L = ceil(c_emb ln n)``, a random set keeps each point with probability
    ``2**-t`` and contributes the coordinate ``x -> d(x, A)`` (the largest
    distance when ``A`` is empty).  Coordinates are then scaled by one global
    factor so that ``d(i, j) <= ||f(i) - f(j)||_1`` holds with equality on the
    tightest pair.  Points at distance zero get identical rows.
    """
    D = d.d if isinstance(d, Metric) else np.asarray(d, dtype=float)
    n = D.shape[0]
    scales, reps = embedding_dimension(n, c_emb)
    if n < 2 or D.max() <= 0:
        return Embedding(np.zeros((n, scales * reps)))
    far = float(D.max())
    cols = []
    for t in range(1, scales + 1):
        for r in range(reps):
            # one derived stream per (scale, repetition): order independent
            g = generator(derive_seed(seed, t, r))
            A = g.random(n) < 2.0 ** -t
            cols.append(D[:, A].min(axis=1) if A.any() else np.full(n, far))
    F = np.column_stack(cols)
    rep = _zero_classes(D)
    F = F[rep]

    iu = np.triu_indices(n, 1)
    dist = D[iu]
    l1 = np.abs(F[:, None, :] - F[None, :, :]).sum(axis=2)[iu]
    pos = dist > 0
    if not pos.any():
        return Embedding(np.zeros_like(F))
    ratio = l1[pos] / dist[pos]
    s = float(ratio.min())
    if s <= 0:
        # a nontrivial pair collapsed; fall back to the metric's own columns
        F = D[rep].copy()
        l1 = np.abs(F[:, None, :] - F[None, :, :]).sum(axis=2)[iu]
        ratio = l1[pos] / dist[pos]
        s = float(ratio.min())
    F = F / s
    return Embedding(F, distortion=float(ratio.max() / s))


def l1_to_cuts(E: Embedding) -> CutDecomposition:
    """Threshold cuts per coordinate: ``||f(j) - f(k)||_1 = sum alpha_S delta_S(j, k)``.

    Along one coordinate with distinct sorted values ``v_1 < ... < v_q``, the
    cut ``{x : f(x) <= v_a}`` gets weight ``v_{a+1} - v_a``.
    """
    n = E.n
    cuts = []
    for col in E.coords.T:
        vals = np.unique(col)
        for lo, hi in zip(vals[:-1], vals[1:]):
            cuts.append((StateSubset.from_mask(col <= lo), float(hi - lo)))
    return CutDecomposition(n, tuple(cuts))


@dataclass(frozen=True)
class CompResult:
    """Outcome of :func:`find_comp` with its audit trail."""

    cut: StateSubset
    value: float
    lp_value: float
    candidates: int
    distortion: float


def find_comp(P, universe, T=(), seed: int = 0,
              constants: Constants = DEFAULT_CONSTANTS) -> StateSubset:
    """Approximate sparsest cut of ``P`` restricted to ``universe``, avoiding ``T``.

    Returns a nonempty proper subset of ``universe`` disjoint from ``T``.
    """
    return find_comp_detail(P, universe, T, seed, constants).cut


def find_comp_detail(P, universe, T=(), seed: int = 0,
                     constants: Constants = DEFAULT_CONSTANTS) -> CompResult:
    a = _as_array(P)
    n = a.shape[0]
    U = as_subset(universe, n)
    T = as_subset(T, n)
    if len(U) < 2:
        raise InvalidInput("universe needs at least two states")
    if not T.issubset(U):
        raise InvalidInput("T must lie inside the universe")
    free = [u for u in U if u not in T]
    if not free:
        raise InvalidInput("no valid cut: universe minus T is empty")

    loc = U.index
    sub = a[np.ix_(loc, loc)]
    k = len(loc)
    pos = {u: p for p, u in enumerate(U)}
    t_local = [pos[t] for t in T]
    t_mask = np.zeros(k, dtype=bool)
    t_mask[t_local] = True

    metric, lp_value = solve_metric(sub, StateSubset.of(t_local, k))
    emb = bourgain_embed(metric, seed, constants.c_emb)
    decomp = l1_to_cuts(emb)

    masks = set()
    for S, _ in decomp.cuts:
        m = S.mask
        if t_mask.any():
            if (m & t_mask).any():
                m = ~m  # orient away from T; T is never split
        else:
            masks.add(tuple(np.flatnonzero(~m).tolist()))
        masks.add(tuple(np.flatnonzero(m).tolist()))
    for v in range(k):
        if not t_mask[v]:
            masks.add((v,))

    scored = []
    for members in masks:
        if not members or len(members) == k or t_mask[list(members)].any():
            continue
        inside = np.zeros(k, dtype=bool)
        inside[list(members)] = True
        boundary = float(sub[np.ix_(inside, ~inside)].sum())
        scored.append((boundary / (len(members) * (k - len(members))), members))
    g_min = min(g for g, _ in scored)
    # equal values up to round-off are ties; break them lexicographically
    g, members = min((m, g) for g, m in scored if g <= g_min + 1e-12 + 1e-10 * g_min)[::-1]
    cut = StateSubset.of((loc[i] for i in members), n)
    return CompResult(cut, g, lp_value, len(masks), emb.distortion)
