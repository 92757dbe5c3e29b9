"""Trajectories: simulation, restriction to a subset, and exact hitting times."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import TRAJECTORY_CAP
from .errors import InvalidInput, ReducibleChain, TrajectoryCapExceeded
from .kernels import walk
from .linalg import Distribution, StochasticMatrix, _as_array, as_subset, spectral_radius
from .rng import derive_seed, generator

CHUNK = 1 << 16


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray = field(repr=False)
    n: int
    seed: int | None = None

    def __post_init__(self):
        s = np.array(self.states, dtype=np.int64).reshape(-1)
        if s.size and (s.min() < 0 or s.max() >= self.n):
            raise InvalidInput(f"trajectory has states outside [0, {self.n})")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return self.states.size

    def __getitem__(self, i):
        return self.states[i]


def _cumulative(P: StochasticMatrix) -> np.ndarray:
    cum = np.cumsum(P.array, axis=1)
    cum[:, -1] = 1.0
    return np.ascontiguousarray(cum)


def _start_state(start, n: int, seed: int) -> int:
    if isinstance(start, (int, np.integer)):
        if not 0 <= int(start) < n:
            raise InvalidInput(f"start state {start} outside [0, {n})")
        return int(start)
    probs = start.probs if isinstance(start, Distribution) else Distribution(start).probs
    if probs.size != n:
        raise InvalidInput(f"start distribution has {probs.size} entries, expected {n}")
    g = generator(derive_seed(seed, 0))
    return int(min(np.searchsorted(np.cumsum(probs), g.random(), side="right"), n - 1))


class InfiniteWord:
    """A trajectory extended lazily, chunk by chunk, up to a hard cap.

    Chunk ``c`` draws its uniforms from its own derived stream, so every
    prefix is the same no matter how the word was grown.
    """

    def __init__(self, P: StochasticMatrix, start, seed: int, cap: int = TRAJECTORY_CAP):
        self.P = P
        self.seed = int(seed)
        self.cap = int(cap)
        self._cum = _cumulative(P)
        self._chunks = [np.array([_start_state(start, P.n, self.seed)], dtype=np.int64)]
        self._len = 1

    def __len__(self):
        return self._len

    def extend_to(self, length: int) -> None:
        if length > self.cap:
            raise TrajectoryCapExceeded(f"requested {length} steps, cap is {self.cap}")
        while self._len < length:
            c = len(self._chunks)
            u = generator(derive_seed(self.seed, c)).random(CHUNK)
            steps = walk(self._cum, u, int(self._chunks[-1][-1]))[1:]
            self._chunks.append(steps)
            self._len += steps.size

    def prefix(self, length: int) -> np.ndarray:
        self.extend_to(length)
        return np.concatenate(self._chunks)[:length]

    def chunks(self):
        """Yield the word chunk by chunk, growing it on demand."""
        c = 0
        while True:
            if c == len(self._chunks):
                self.extend_to(self._len + 1)
            yield self._chunks[c]
            c += 1


def simulate(P: StochasticMatrix, start, length: int, seed: int) -> Trajectory:
    """Sample path of ``length`` states; a prefix of ``InfiniteWord(P, start, seed)``.

    ``start`` is a state index or a distribution over states.
    """
    if length < 1:
        raise InvalidInput("length must be at least 1")
    P = P if isinstance(P, StochasticMatrix) else StochasticMatrix(P)
    word = InfiniteWord(P, start, seed, cap=max(length, TRAJECTORY_CAP))
    return Trajectory(word.prefix(length), P.n, seed)


def restrict_trajectory(w: Trajectory, T) -> Trajectory:
    """Entries of ``w`` that lie in ``T``, in order."""
    T = as_subset(T, w.n)
    return Trajectory(w.states[T.mask[w.states]], w.n, w.seed)


def escape_count(w: Trajectory, T) -> int:
    """Number of entries of ``w`` outside ``T``."""
    T = as_subset(T, w.n)
    return int(np.count_nonzero(~T.mask[w.states]))


def is_irreducible(P) -> bool:
    a = _as_array(P)
    n = a.shape[0]
    adj = a > 0
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    todo = deque([0])
    while todo:
        i = todo.popleft()
        nxt = np.flatnonzero(adj[i] & ~seen)
        seen[nxt] = True
        todo.extend(nxt.tolist())
    return bool(seen.all())


def observed_chain(P: StochasticMatrix, T) -> StochasticMatrix:
    """Transition matrix of the chain watched only while it is inside ``T``.

    ``Q = P_T + P_{T,T'} (I - P_{T'})^{-1} P_{T',T}`` with ``T'`` the
    complement, evaluated by a dense LU solve.
    """
    a = _as_array(P)
    n = a.shape[0]
    T = as_subset(T, n)
    if not T:
        raise InvalidInput("T must be nonempty")
    if len(T) == n:
        return P if isinstance(P, StochasticMatrix) else StochasticMatrix(a)
    t, o = T.index, T.complement().index
    inner = a[np.ix_(o, o)]
    if spectral_radius(inner) >= 1.0 - 1e-12:
        raise ReducibleChain("the chain can stay outside T forever")
    try:
        escape = np.linalg.solve(np.eye(o.size) - inner, a[np.ix_(o, t)])
    except np.linalg.LinAlgError as exc:
        raise ReducibleChain("I - P outside T is singular") from exc
    Q = a[np.ix_(t, t)] + a[np.ix_(t, o)] @ escape
    return StochasticMatrix(Q)


def hitting_times(P) -> np.ndarray:
    """``H[i, j] = E[first time at j | start at i]`` (zero on the diagonal)."""
    a = _as_array(P)
    n = a.shape[0]
    if not is_irreducible(a):
        raise ReducibleChain("hitting times need an irreducible chain")
    H = np.zeros((n, n))
    for j in range(n):
        keep = np.arange(n) != j
        A = np.eye(n - 1) - a[np.ix_(keep, keep)]
        H[keep, j] = np.linalg.solve(A, np.ones(n - 1))
    return H


def hitting_time_exact(P) -> float:
    """``max_{i,j} E[tau_j | X_0 = i]``."""
    if _as_array(P).shape[0] == 1:
        return 0.0
    return float(hitting_times(P).max())
