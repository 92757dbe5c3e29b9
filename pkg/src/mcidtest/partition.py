"""Decomposition of the state space into high-information components.

``partition_graph`` repeatedly extracts a component that leaks little mass
but is internally well connected, gluing every extracted state into the set
that the next sparsest-cut search must keep on one side.  What is left when
no component can be extracted is the low-information remainder.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .config import DEFAULT_CONSTANTS, Constants, log_n
from .embed import find_comp
from .errors import InvalidInput, MCIDError
from .linalg import StateSubset, _as_array, as_subset, expansion, internal_mass_ratio
from .rng import derive_seed


class ClaimViolation(MCIDError, AssertionError):
    """A guarantee that every run must satisfy failed."""


@dataclass(frozen=True)
class Step:
    """One pass of the shrinking loop: the cut tried and what was kept."""

    current: StateSubset
    cut: StateSubset
    expansion: float
    kept: StateSubset | None


@dataclass(frozen=True)
class Extraction:
    component: StateSubset | None
    first_cut: StateSubset
    first_expansion: float
    steps: tuple[Step, ...] = ()
    #: internal expansion floor recorded for the component (None if singleton/absent)
    internal_floor: float | None = None
    #: expansion floor certified for every subset outside T when nothing is extracted
    leak_floor: float | None = None


def _check_beta(beta: float):
    if not 0.0 < beta < 1.0:
        raise InvalidInput(f"beta must lie in (0, 1), got {beta}")


def internal_floor(beta: float, n: int, size: int, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Expansion floor recorded for every cut inside an extracted component."""
    return beta / (8.0 * constants.C_fc * log_n(n) * max(1.0, math.log(size)))


def leak_floor(beta: float, n: int, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Expansion floor for subsets of the remainder when extraction fails."""
    return beta / (8.0 * constants.C_fc * log_n(n))


def low_info_floor(beta: float, n: int, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Floor on ``mass leaving R / |R|`` for every R inside the low-information set.

    A remainder never exceeds ``8n/9`` states, so the ``min(|R|, n-|R|)``
    denominator of :func:`leak_floor` converts with a factor of 9.
    """
    return leak_floor(beta, n, constants) / 9.0


def denser_side(P, cut: StateSubset, rest: StateSubset) -> StateSubset:
    """The side with the larger internal mass ratio; ties keep ``cut``.

    Keeping the denser side is what bounds the mass lost per split: the
    larger of the two ratios is at least their size-weighted average.
    """
    return cut if internal_mass_ratio(P, cut) >= internal_mass_ratio(P, rest) else rest


def extract_component(P, T, beta: float, seed: int,
                      constants: Constants = DEFAULT_CONSTANTS) -> StateSubset | None:
    """One well-connected, low-leakage component disjoint from ``T``, or None."""
    return extract_component_detail(P, T, beta, seed, constants).component


def extract_component_detail(P, T, beta: float, seed: int,
                             constants: Constants = DEFAULT_CONSTANTS) -> Extraction:
    _check_beta(beta)
    a = _as_array(P)
    n = a.shape[0]
    T = as_subset(T, n)
    everything = StateSubset.full(n)
    if len(T) == n:
        return Extraction(None, T, math.inf)
    logn = log_n(n)

    S = find_comp(a, everything, T, derive_seed(seed, 0), constants)
    first, v0 = S, expansion(a, S)
    if v0 >= beta / 8.0:
        S = T.complement()
        if internal_mass_ratio(a, S) <= 1.0 - beta / 8.0:
            return Extraction(None, first, v0, leak_floor=leak_floor(beta, n, constants))

    steps = []
    t = 0
    while len(S) > 1:
        t += 1
        cut = find_comp(a, S, (), derive_seed(seed, t), constants)
        sub = a[S.index][:, S.index]
        local = [S.members.index(i) for i in cut]
        v = expansion(sub, StateSubset.of(local, len(S)))
        if v >= beta / (8.0 * logn):
            steps.append(Step(S, cut, v, None))
            break
        keep = denser_side(a, cut, S.difference(cut))
        steps.append(Step(S, cut, v, keep))
        S = keep
    floor = internal_floor(beta, n, len(S), constants) if len(S) > 1 else None
    return Extraction(S, first, v0, tuple(steps), internal_floor=floor)


@dataclass(frozen=True)
class Partition:
    high_info: tuple[StateSubset, ...]
    low_info: StateSubset
    beta: float
    #: per-component internal expansion floor (None for singletons)
    internal_floors: tuple[float | None, ...] = ()
    low_info_floor: float | None = None
    extractions: tuple[Extraction, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        n = self.low_info.universe_size
        seen = set(self.low_info.members)
        total = len(seen)
        for S in self.high_info:
            if not S:
                raise InvalidInput("high-information sets must be nonempty")
            if S.universe_size != n:
                raise InvalidInput("all parts must share one universe")
            if seen & set(S.members):
                raise InvalidInput("parts overlap")
            seen |= set(S.members)
            total += len(S)
        if total != n:
            raise InvalidInput("parts do not cover the state space")

    @property
    def n(self) -> int:
        return self.low_info.universe_size

    def to_json(self) -> str:
        doc = {
            "beta": self.beta,
            "high_info": [list(S.members) for S in self.high_info],
            "low_info": list(self.low_info.members),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str, n: int) -> "Partition":
        doc = json.loads(text)
        return cls(tuple(StateSubset.of(s, n) for s in doc["high_info"]),
                   StateSubset.of(doc["low_info"], n), float(doc["beta"]))


def partition_graph(P, beta: float, seed: int,
                    constants: Constants = DEFAULT_CONSTANTS) -> Partition:
    """Split ``[n]`` into high-information components and one remainder."""
    _check_beta(beta)
    a = _as_array(P)
    n = a.shape[0]
    taken = StateSubset.empty(n)
    comps, floors, trail = [], [], []
    for t in range(n + 1):
        ex = extract_component_detail(a, taken, beta, derive_seed(seed, t), constants)
        trail.append(ex)
        if ex.component is None:
            break
        S = ex.component
        if not S or not S.isdisjoint(taken):
            raise ClaimViolation("extraction returned an empty or overlapping set")
        mass = internal_mass_ratio(a, S)
        if mass < 1.0 - beta - 1e-12:
            raise ClaimViolation(f"component {S.members} keeps only {mass:.6f} of its mass")
        comps.append(S)
        floors.append(ex.internal_floor)
        taken = taken.union(S)
    else:
        raise ClaimViolation("extraction did not terminate within n rounds")
    rest = taken.complement()
    return Partition(tuple(comps), rest, beta, tuple(floors),
                     low_info_floor(beta, n, constants) if rest else None, tuple(trail))
