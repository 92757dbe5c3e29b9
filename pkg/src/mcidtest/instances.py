"""Constructed chains with known structure, used by the benchmark suite and tests."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .linalg import StochasticMatrix, chain_distance


def _sym(w: np.ndarray) -> np.ndarray:
    w = np.triu(w, 1)
    return w + w.T


def _labels(sizes) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def _finish(off: np.ndarray) -> StochasticMatrix:
    rows = off.sum(axis=1)
    if rows.max() > 1.0 + 1e-12:
        raise InvalidInput("off-diagonal mass exceeds one")
    off = off.copy()
    off[np.diag_indices_from(off)] = np.maximum(0.0, 1.0 - rows)
    return StochasticMatrix(off)


def _scale_rows_max(w: np.ndarray, mask: np.ndarray, budget: np.ndarray) -> np.ndarray:
    """Scale the symmetric weights ``w * mask`` so no row exceeds ``budget``."""
    w = w * mask
    rows = w.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rows > 0, budget / rows, np.inf)
    f = ratio.min() if np.isfinite(ratio).any() else 0.0
    return w * f


def three_region(block_sizes, low_size: int, leak: float, escape: float,
                 rng: np.random.Generator) -> tuple[StochasticMatrix, list[list[int]], list[int]]:
    """Dense blocks joined by ``leak`` mass per state, plus a leaky region.

    Each block state sends at most ``leak`` to other blocks.  Each state of
    the leaky region sends exactly ``escape`` to the blocks and spreads
    most of the rest inside the region.  Returns the matrix, the blocks and
    the leaky region.
    """
    sizes = list(block_sizes)
    nb = sum(sizes)
    n = nb + low_size
    lab = np.concatenate([_labels(sizes), np.full(low_size, -1)])
    is_low = lab < 0
    same = (lab[:, None] == lab[None, :]) & ~is_low[:, None]
    cross = (lab[:, None] != lab[None, :]) & ~is_low[:, None] & ~is_low[None, :]

    off = _scale_rows_max(_sym(rng.random((n, n))), cross, np.full(n, leak))
    if low_size:
        link = _sym(rng.random((n, n)) + 0.5) * (is_low[:, None] ^ is_low[None, :])
        low_rows = link[is_low].sum(axis=1)
        scale = np.ones(n)
        scale[is_low] = escape / low_rows
        # symmetric rescale: every low row sums to exactly ``escape``
        link = link * np.where(is_low[:, None], scale[:, None], scale[None, :])
        off += link
        inner = _sym(rng.random((n, n)) + 0.5) * (is_low[:, None] & is_low[None, :])
        off += _scale_rows_max(inner, np.ones((n, n), bool), np.where(is_low, 0.9 * (1 - escape), np.inf))
    budget = 1.0 - off.sum(axis=1)
    blocks_w = _sym(rng.random((n, n)) + 0.5) * same
    for b in range(len(sizes)):
        m = lab == b
        part = blocks_w * (m[:, None] & m[None, :])
        rows = part[m].sum(axis=1)
        if rows.max() > 0:
            # the diagonal takes the remaining slack
            off += part * (0.95 * budget[m].min() / rows.max())
    blocks = [np.flatnonzero(lab == b).tolist() for b in range(len(sizes))]
    return _finish(off), blocks, np.flatnonzero(is_low).tolist()


def leaky_hub(block_size: int, blocks: int, escape: float) -> tuple[StochasticMatrix, list[list[int]], list[int]]:
    """Uniform blocks plus one last state that spreads ``escape`` evenly over all block states."""
    nb = block_size * blocks
    n = nb + 1
    a = np.zeros((n, n))
    for b in range(blocks):
        s = slice(b * block_size, (b + 1) * block_size)
        a[s, s] = (1.0 - escape / nb) / block_size
    a[-1, :nb] = a[:nb, -1] = escape / nb
    a[-1, -1] = 1.0 - escape
    return StochasticMatrix(a), [list(range(b * block_size, (b + 1) * block_size)) for b in range(blocks)], [nb]


def planted_blocks(block_sizes, leak: float, rng: np.random.Generator):
    """:func:`three_region` without the leaky region."""
    P, blocks, _ = three_region(block_sizes, 0, leak, 0.0, rng)
    return P, blocks


def uniform_blocks(size: int, count: int, leak: float) -> StochasticMatrix:
    """``count`` uniform blocks of ``size`` states; each state spreads ``leak`` evenly over other blocks."""
    n = size * count
    lab = _labels([size] * count)
    same = lab[:, None] == lab[None, :]
    a = np.where(same, (1.0 - leak) / size, leak / (n - size) if count > 1 else 0.0)
    return StochasticMatrix(a)


def rewire_blocks(P, blocks, mode: str = "cycle") -> StochasticMatrix:
    """Replace each block's internal transitions, keeping mass between blocks.

    ``mode="cycle"`` moves the block mass onto a cycle through the block
    (a swap for two states); ``mode="stay"`` moves it onto the self loops.
    Single states keep their self loop.
    """
    if mode not in ("cycle", "stay"):
        raise InvalidInput(f"unknown mode {mode!r}")
    off = np.array(P, dtype=float)
    np.fill_diagonal(off, 0.0)
    for B in blocks:
        B = list(B)
        if len(B) < 2:
            continue
        idx = np.ix_(B, B)
        kept = 1.0 - off[B].sum(axis=1) + off[idx].sum(axis=1)  # per-state block mass incl. self loop
        m = float(kept.min())
        off[idx] = 0.0
        if mode == "stay":
            continue
        k = len(B)
        for t in range(k):
            i, j = B[t], B[(t + 1) % k]
            if k == 2:
                off[i, j] = off[j, i] = m
            else:
                off[i, j] += m / 2
                off[j, i] += m / 2
    return _finish(off)


def far_pair(P, blocks, eps: float) -> StochasticMatrix:
    """A chain at distance at least ``eps`` from ``P`` obtained by :func:`rewire_blocks`.

    Every state should lie in some block: an untouched, nearly closed
    region keeps the distance near zero.
    """
    best = 0.0
    for mode in ("cycle", "stay"):
        Q = rewire_blocks(P, blocks, mode)
        d = chain_distance(P, Q)
        if d >= eps:
            return Q
        best = max(best, d)
    raise InvalidInput(f"rewired chains are at most {best:.4f} away")


def two_block_chain(n: int = 24, leak: float = 1e-3) -> StochasticMatrix:
    if n % 2:
        raise InvalidInput("n must be even")
    return uniform_blocks(n // 2, 2, leak)


def bridge_chain(n: int = 24, bridge: float = 1e-4) -> StochasticMatrix:
    """Two uniform halves joined by a single edge of probability ``bridge``."""
    if n % 2:
        raise InvalidInput("n must be even")
    h = n // 2
    a = np.zeros((n, n))
    a[:h, :h] = 1.0 / h
    a[h:, h:] = 1.0 / h
    a[h - 1, h - 1] -= bridge
    a[h, h] -= bridge
    a[h - 1, h] = a[h, h - 1] = bridge
    return StochasticMatrix(a)
