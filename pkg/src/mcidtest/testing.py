"""Identity testing: edge distributions, IID sample generation, and the chain tester.

Every visit to a state ``j`` of a subset ``R`` is followed by one transition
drawn from row ``j`` of the chain.  Taking the ``r_j``-th such transition for a
histogram ``r`` of uniform draws over ``R`` turns one trajectory into IID
samples from the edge distribution of ``R``: outcome ``(i, j)`` with mass
``P_ij / |R|`` and a sentinel outcome ``ETA`` for steps that leave ``R``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import DEFAULT_CONSTANTS, Constants, log_n
from .errors import InsufficientSamples, InvalidInput
from .kernels import scan_samples
from .linalg import StateSubset, StochasticMatrix, _as_array, as_subset
from .partition import Partition, partition_graph
from .rng import derive_seed, generator

ETA = "eta"

SAME = "same"
DIFFERENT = "different"
ALL_GENERATION_FAILED = "AllGenerationFailed"

#: seed of the null-distribution simulations behind every test threshold
CALIBRATION_SEED = 0x6D63_6964


@dataclass(frozen=True)
class EdgeDistribution:
    """Distribution over ordered pairs of ``R`` plus the escape outcome.

    ``probs[a * k + b]`` is the mass of ``(R[a], R[b])`` and ``probs[k * k]``
    the mass of ``ETA``, with ``k = |R|``.
    """

    R: StateSubset
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        k = len(self.R)
        if p.shape != (k * k + 1,):
            raise InvalidInput(f"expected {k * k + 1} outcomes, got {p.shape}")
        if p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
            raise InvalidInput("edge distribution is not a probability vector")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def k(self) -> int:
        return len(self.R)

    @property
    def support_size(self) -> int:
        return self.probs.size

    @property
    def eta(self) -> float:
        return float(self.probs[-1])

    def outcome(self, code: int):
        """``(i, j)`` in global state labels, or ``ETA``."""
        k = self.k
        if code == k * k:
            return ETA
        a, b = divmod(int(code), k)
        return self.R.members[a], self.R.members[b]

    def mass(self, i: int, j: int) -> float:
        m = self.R.members
        return float(self.probs[m.index(i) * self.k + m.index(j)])

    def as_dict(self) -> dict:
        return {self.outcome(c): float(v) for c, v in enumerate(self.probs)}


def edge_distribution(P, R) -> EdgeDistribution:
    a = _as_array(P)
    R = as_subset(R, a.shape[0])
    if not R:
        raise InvalidInput("R must be nonempty")
    idx = R.index
    inner = a[np.ix_(idx, idx)].ravel() / len(R)
    eta = 1.0 - inner.sum()
    if eta < -1e-12:
        raise InvalidInput("rows of P restricted to R carry more than unit mass")
    return EdgeDistribution(R, np.append(inner, max(0.0, eta)))


@dataclass(frozen=True)
class SampleSet:
    """Outcome codes produced by one generation pass (see :class:`EdgeDistribution`)."""

    R: StateSubset
    codes: np.ndarray = field(repr=False)
    #: positions of the word inside R read before every quota was met
    consumed: int = 0

    def __len__(self):
        return self.codes.size

    def counts(self) -> np.ndarray:
        k = len(self.R)
        return np.bincount(self.codes, minlength=k * k + 1)

    def outcomes(self) -> list:
        k = len(self.R)
        m = self.R.members
        return [ETA if c == k * k else (m[c // k], m[c % k]) for c in self.codes.tolist()]


@dataclass(frozen=True)
class GenerationFailed:
    """Some state of the set was not visited often enough."""

    R: StateSubset
    consumed: int = 0
    shortfall: int = 0

    def __bool__(self):
        return False


def draw_quotas(k: int, l: int, seed: int) -> np.ndarray:
    """Histogram of ``l`` uniform draws over ``k`` cells."""
    return np.bincount(generator(seed).integers(k, size=l), minlength=k).astype(np.int64)


def generate_iid_samples(w, T, l: int, seed: int, *, counts=None) -> SampleSet | GenerationFailed:
    """Turn the word ``w`` into ``l`` IID draws from the edge distribution of ``T``.

    ``counts`` replaces the random histogram (for hand-traced checks).
    """
    states = np.asarray(getattr(w, "states", w), dtype=np.int64)
    n = w.n if hasattr(w, "n") else int(states.max(initial=-1)) + 1
    T = as_subset(T, n)
    if not T:
        raise InvalidInput("T must be nonempty")
    if l < 1:
        raise InvalidInput("l must be at least 1")
    k = len(T)
    r = draw_quotas(k, l, seed) if counts is None else np.asarray(counts, dtype=np.int64)
    if r.shape != (k,) or r.sum() != l:
        raise InvalidInput("counts must be a length-|T| histogram summing to l")
    local = np.full(n, -1, dtype=np.int64)
    local[T.index] = np.arange(k)
    codes, consumed, rest = scan_samples(states, local, r, k)
    if (rest > 0).any():
        return GenerationFailed(T, int(consumed), int(rest[rest > 0].sum()))
    return SampleSet(T, codes, int(consumed))


@dataclass(frozen=True)
class Verdict:
    value: str
    component: StateSubset | None = None
    reason: str = ""
    statistic: float | None = field(default=None, compare=False)
    threshold: float | None = field(default=None, compare=False)
    attempts: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.value not in (SAME, DIFFERENT):
            raise InvalidInput(f"unknown verdict {self.value!r}")
        if self.reason == ALL_GENERATION_FAILED and (self.value != DIFFERENT or self.component is not None):
            raise InvalidInput("generation failure must map to Different without a component")

    @property
    def same(self) -> bool:
        return self.value == SAME

    def to_json(self) -> str:
        comp = None if self.component is None else list(self.component.members)
        return json.dumps({"verdict": self.value, "component": comp, "reason": self.reason})


def required_samples(support: int, eps_sq: float, delta: float,
                     constants: Constants = DEFAULT_CONSTANTS) -> int:
    return math.ceil(constants.c_test * math.sqrt(support) / eps_sq * math.log(1.0 / delta))


def chi_statistic(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``sum ((X - m p)**2 - X) / (X + m p)`` row-wise; cells with zero denominator drop out."""
    X = np.asarray(counts, dtype=float)
    m = X.sum(axis=-1, keepdims=True)
    mp = m * p
    den = X + mp
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(den > 0, ((X - mp) ** 2 - X) / den, 0.0)
    return terms.sum(axis=-1)


def calibration_trials(delta: float) -> int:
    return max(2000, math.ceil(20.0 / delta))


@lru_cache(maxsize=256)
def _threshold(p_bytes: bytes, m: int, delta: float) -> float:
    p = np.frombuffer(p_bytes, dtype=float)
    g = generator(derive_seed(CALIBRATION_SEED, m))
    z = chi_statistic(g.multinomial(m, p, size=calibration_trials(delta)), p)
    return float(np.quantile(z, 1.0 - delta, method="higher"))


def null_threshold(p, m: int, delta: float) -> float:
    """Upper ``delta`` quantile of the statistic for ``m`` draws from ``p``."""
    probs = np.ascontiguousarray(getattr(p, "probs", p), dtype=float)
    return _threshold(probs.tobytes(), int(m), float(delta))


def identity_test_iid(p, samples, eps_sq: float, delta: float,
                      constants: Constants = DEFAULT_CONSTANTS) -> Verdict:
    """Decide whether IID ``samples`` come from ``p`` or from something far from it.

    The statistic is compared with its simulated upper ``delta`` quantile
    under ``p``, so the false-rejection rate is ``delta`` up to simulation
    error.  Any sample on an outcome of zero mass rejects outright.
    """
    if not 0.0 < eps_sq < 1.0:
        raise InvalidInput("eps_sq must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise InvalidInput("delta must lie in (0, 1)")
    probs = np.asarray(getattr(p, "probs", p), dtype=float)
    component = getattr(p, "R", None)
    if isinstance(samples, SampleSet):
        counts = samples.counts()
    else:
        counts = np.bincount(np.asarray(samples, dtype=np.int64), minlength=probs.size)
    if counts.size != probs.size:
        raise InvalidInput("samples fall outside the support of p")
    m = int(counts.sum())
    need = required_samples(probs.size, eps_sq, delta, constants)
    if m < need:
        raise InsufficientSamples(f"{m} samples given, {need} required")
    if counts[probs <= 0].any():
        return Verdict(DIFFERENT, component, "impossible outcome")
    z = float(chi_statistic(counts, probs))
    t = null_threshold(probs, m, delta)
    value = DIFFERENT if z > t else SAME
    return Verdict(value, component, "rejected" if z > t else "accepted", z, t)


def component_sample_count(size: int, n: int, eps: float,
                           constants: Constants = DEFAULT_CONSTANTS) -> int:
    return math.ceil(constants.c_samp * size * log_n(n) / eps**2)


def trajectory_length(n: int, eps: float, constants: Constants = DEFAULT_CONSTANTS) -> int:
    return math.ceil(constants.c_len * n * log_n(n) ** 2 / eps**4)


def chain_partition(P, eps: float, seed: int, constants: Constants = DEFAULT_CONSTANTS) -> Partition:
    """The partition :func:`identity_test_chain` computes for ``seed``."""
    return partition_graph(P, eps / 16.0, derive_seed(seed, 0), constants)


def identity_test_chain(w, P, eps: float, seed: int, *, partition: Partition | None = None,
                        constants: Constants = DEFAULT_CONSTANTS) -> Verdict:
    """Test whether the trajectory ``w`` was generated by ``P`` or by an ``eps``-far chain.

    Components are tried in order; the first one that the word visits often
    enough decides.  If none does, the answer is Different.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidInput("eps must lie in (0, 1)")
    P = P if isinstance(P, StochasticMatrix) else StochasticMatrix(P)
    n = P.n
    if getattr(w, "n", n) != n:
        raise InvalidInput(f"trajectory is over {w.n} states, matrix over {n}")
    if partition is None:
        partition = chain_partition(P, eps, seed, constants)
    elif partition.n != n:
        raise InvalidInput("partition does not match the matrix")
    attempts = []
    for idx, S in enumerate(partition.high_info):
        l = component_sample_count(len(S), n, eps, constants)
        got = generate_iid_samples(w, S, l, derive_seed(seed, 1, idx))
        attempts.append((S, bool(got), got.consumed))
        if got:
            v = identity_test_iid(edge_distribution(P, S), got, eps**2 / 32.0, 1.0 / (10 * n), constants)
            return Verdict(v.value, S, v.reason, v.statistic, v.threshold, tuple(attempts))
    return Verdict(DIFFERENT, None, ALL_GENERATION_FAILED, attempts=tuple(attempts))
