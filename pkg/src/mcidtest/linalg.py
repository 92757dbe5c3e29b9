"""Dense symmetric matrix types and the scalar functionals built on them.

Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidInput, InvalidMatrix

ROW_TOL = 1e-9
SYM_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class StochasticMatrix:
    """Symmetric, row-stochastic, nonnegative ``n x n`` transition matrix.

    Construction validates and never renormalizes; use :func:`normalize` to
    repair approximately stochastic input explicitly.
    """

    __slots__ = ("_a",)

    def __init__(self, entries: "ArrayLike"):
        a = np.asarray(entries.array if isinstance(entries, StochasticMatrix) else entries,
                       dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidMatrix(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("matrix has non-finite entries")
        if np.any(a < 0):
            raise InvalidMatrix("matrix has negative entries")
        rows = a.sum(axis=1)
        bad = np.abs(rows - 1.0) > ROW_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise InvalidMatrix(f"row {i} sums to {float(rows[i])!r}, not 1")
        asym = np.abs(a - a.T)
        if np.any(asym > SYM_TOL):
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise InvalidMatrix(f"not symmetric at ({i}, {j}): |diff| = {asym[i, j]:.3g}")
        self._a = _frozen(a)

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __getitem__(self, idx):
        return self._a[idx]

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash(self._a.tobytes())

    def __repr__(self):
        return f"StochasticMatrix(n={self.n})"

    def submatrix(self, S: "StateSubset") -> np.ndarray:
        idx = np.asarray(S.members, dtype=int)
        return self._a[np.ix_(idx, idx)]


ArrayLike = Union[StochasticMatrix, np.ndarray, Sequence[Sequence[float]]]


def normalize(entries: ArrayLike) -> StochasticMatrix:
    """Symmetrize and rescale rows of a nonnegative matrix into a chain.

    Averages with the transpose, then scales by the largest row sum and puts
    the remaining mass of each row on its diagonal, which keeps symmetry.
    """
    a = np.asarray(entries, dtype=float)
    if np.any(a < 0):
        raise InvalidMatrix("matrix has negative entries")
    a = 0.5 * (a + a.T)
    top = a.sum(axis=1).max()
    if top <= 0:
        raise InvalidMatrix("matrix is identically zero")
    a = a / top
    a[np.diag_indices_from(a)] += 1.0 - a.sum(axis=1)
    return StochasticMatrix(a)


@dataclass(frozen=True)
class StateSubset:
    """Sorted set of state indices drawn from ``range(universe_size)``."""

    members: tuple[int, ...]
    universe_size: int

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if any(b <= a for a, b in zip(members, members[1:])):
            raise InvalidInput(f"members must be strictly increasing: {members}")
        if members and (members[0] < 0 or members[-1] >= self.universe_size):
            raise InvalidInput(f"members out of range [0, {self.universe_size})")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[int], universe_size: int) -> "StateSubset":
        return cls(tuple(sorted(set(int(m) for m in members))), universe_size)

    @classmethod
    def full(cls, n: int) -> "StateSubset":
        return cls(tuple(range(n)), n)

    @classmethod
    def empty(cls, n: int) -> "StateSubset":
        return cls((), n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "StateSubset":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(np.flatnonzero(mask).tolist()), mask.size)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in set(self.members)

    def __bool__(self):
        return bool(self.members)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.universe_size, dtype=bool)
        m[list(self.members)] = True
        return m

    @property
    def index(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp)

    def complement(self) -> "StateSubset":
        return StateSubset.from_mask(~self.mask)

    def union(self, other: "StateSubset") -> "StateSubset":
        _same_universe(self, other)
        return StateSubset.from_mask(self.mask | other.mask)

    def difference(self, other: "StateSubset") -> "StateSubset":
        _same_universe(self, other)
        return StateSubset.from_mask(self.mask & ~other.mask)

    def isdisjoint(self, other: "StateSubset") -> bool:
        return set(self.members).isdisjoint(other.members)

    def issubset(self, other: "StateSubset") -> bool:
        return set(self.members) <= set(other.members)


def _same_universe(a: StateSubset, b: StateSubset):
    if a.universe_size != b.universe_size:
        raise DimensionMismatch(f"universes differ: {a.universe_size} vs {b.universe_size}")


def as_subset(S, n: int) -> StateSubset:
    if isinstance(S, StateSubset):
        if S.universe_size != n:
            raise DimensionMismatch(f"subset universe {S.universe_size} != {n}")
        return S
    return StateSubset.of(S, n)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over an abstract finite support."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidInput("distribution must be a nonempty vector")
        if np.any(p < 0):
            raise InvalidInput("distribution has negative mass")
        if abs(p.sum() - 1.0) > ROW_TOL:
            raise InvalidInput(f"distribution sums to {float(p.sum())!r}")
        object.__setattr__(self, "probs", _frozen(p))

    def __len__(self):
        return self.probs.size


def _as_array(P) -> np.ndarray:
    if isinstance(P, StochasticMatrix):
        return P.array
    a = np.asarray(P, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    return a


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def sq_matrix(P: StochasticMatrix, Q: StochasticMatrix) -> np.ndarray:
    """Entrywise geometric mean ``sqrt(P_ij * Q_ij)``."""
    a, b = _as_array(P), _as_array(Q)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return np.sqrt(a * b)


def spectral_radius(M) -> float:
    """Largest eigenvalue of a symmetric matrix (the spectral radius when M >= 0)."""
    a = _as_array(M)
    if not np.allclose(a, a.T, rtol=0.0, atol=SYM_TOL):
        raise InvalidInput("spectral_radius requires a symmetric matrix")
    # LAPACK syevd: Householder tridiagonalisation + divide and conquer
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[-1])


def chain_distance(P: StochasticMatrix, Q: StochasticMatrix) -> float:
    """``1 - rho(Sq(P, Q))``, clamped to [0, 1]."""
    d = 1.0 - spectral_radius(sq_matrix(P, Q))
    if d < -1e-9:
        raise ArithmeticError(f"chain distance {d} is negative beyond rounding")
    return min(1.0, max(0.0, d))


def _boundary(a: np.ndarray, mask: np.ndarray) -> float:
    return float(a[np.ix_(mask, ~mask)].sum())


def _proper_mask(P, S):
    a = _as_array(P)
    S = as_subset(S, a.shape[0])
    k = len(S)
    if k == 0 or k == a.shape[0]:
        raise InvalidInput("subset must be nonempty and proper")
    return a, S.mask, k, a.shape[0] - k


def expansion(P, S) -> float:
    """Boundary mass of S over ``min(|S|, |S^c|)``.

    ``P`` may be any square nonnegative matrix (e.g. a principal submatrix),
    in which case the complement is taken inside that matrix's index set.
    """
    a, mask, k, rest = _proper_mask(P, S)
    return _boundary(a, mask) / min(k, rest)


def cut_value(P, S) -> float:
    """Boundary mass of S over ``|S| |S^c|``."""
    a, mask, k, rest = _proper_mask(P, S)
    return _boundary(a, mask) / (k * rest)


def internal_mass_ratio(P, S) -> float:
    """Mass of transitions staying inside S, per state of S."""
    a = _as_array(P)
    S = as_subset(S, a.shape[0])
    if not S:
        raise InvalidInput("subset must be nonempty")
    idx = S.index
    return float(a[np.ix_(idx, idx)].sum()) / len(S)


def _pair(p, q):
    a, b = _as_probs(p), _as_probs(q)
    if a.shape != b.shape:
        raise DimensionMismatch(f"supports differ: {a.size} vs {b.size}")
    return a, b


def hellinger_sq(p, q) -> float:
    """Squared Hellinger distance ``1 - sum sqrt(p_i q_i)``."""
    a, b = _pair(p, q)
    return min(1.0, max(0.0, 1.0 - float(np.sqrt(a * b).sum())))


def total_variation(p, q) -> float:
    a, b = _pair(p, q)
    return min(1.0, 0.5 * float(np.abs(a - b).sum()))


def second_eigenvalue(M) -> float:
    """Second largest eigenvalue of a symmetric matrix."""
    a = _as_array(M)
    if a.shape[0] < 2:
        raise InvalidInput("need at least two states")
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[-2])


def spectral_norm(M) -> float:
    """Operator 2-norm of a symmetric matrix."""
    a = _as_array(M)
    if a.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(0.5 * (a + a.T))).max())


def random_symmetric_stochastic(n: int, rng: np.random.Generator,
                                density: float = 1.0, laziness: float = 0.0) -> StochasticMatrix:
    """Random symmetric chain: symmetric nonnegative weights, normalized.

    ``density`` thins off-diagonal weights; ``laziness`` is extra diagonal mass
    added before normalization (as a fraction of the largest row sum).
    """
    w = rng.random((n, n))
    if density < 1.0:
        w *= rng.random((n, n)) < density
    w = np.triu(w, 1)
    w = w + w.T
    top = max(w.sum(axis=1).max(), 1e-12)
    w = w / (top * (1.0 + laziness))
    w[np.diag_indices(n)] = np.maximum(0.0, 1.0 - w.sum(axis=1))
    return StochasticMatrix(w)
