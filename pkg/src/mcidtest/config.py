"""Named constants that the analysis only pins down up to Õ(·) factors."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    """Tunable constants with their recorded defaults.

    Attributes
    ----------
    c_samp : float
        Multiplier of ``|S| ln(n) / eps**2`` for the per-component sample
        count requested by the chain tester.
    c_len : float
        Multiplier of ``n ln(n)**2 / eps**4`` for experiment trajectory length.
    c_test : float
        Multiplier of ``sqrt(support) / eps_sq * ln(1/delta)`` giving the
        minimum sample count accepted by the IID tester.
    c_emb : float
        Bourgain repetitions per scale are ``ceil(c_emb * ln n)``.
    C_fc : float
        Approximation allowance of ``find_comp`` relative to ``ln n``.
    c_N : float
        Multiplier of ``|S| ln(n)**2 / eps**2`` bounding positions consumed
        by sample generation.
    """

    c_samp: float = 4.0
    c_len: float = 8.0
    c_test: float = 0.02
    c_emb: float = 4.0
    C_fc: float = 20.0
    c_N: float = 32.0

    def replace(self, **overrides: float) -> "Constants":
        unknown = set(overrides) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown constants: {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT_CONSTANTS = Constants()

#: Hard cap on lazily extended "infinite" trajectories.
TRAJECTORY_CAP = 10_000_000


def log_n(n: int) -> float:
    """Natural log of the state count, floored at 1."""
    return max(1.0, math.log(n)) if n > 0 else 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one benchmark run; every random choice derives from ``master_seed``."""

    master_seed: int = 20240917
    eps: float = 0.3
    beta_override: float | None = None
    trials: int = 100
    constants: Constants = DEFAULT_CONSTANTS
    trajectory_cap: int = TRAJECTORY_CAP

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.beta_override is not None and not 0.0 < self.beta_override < 1.0:
            raise ValueError("beta must lie in (0, 1)")

    @property
    def beta(self) -> float:
        return self.eps / 16.0 if self.beta_override is None else self.beta_override

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        consts = DEFAULT_CONSTANTS.replace(**doc.pop("constants", {}))
        return cls(constants=consts, **doc)

    def as_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "eps": self.eps,
            "beta_override": self.beta_override,
            "trials": self.trials,
            "constants": self.constants.as_dict(),
            "trajectory_cap": self.trajectory_cap,
        }
