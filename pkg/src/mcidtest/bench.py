"""Acceptance suite: nine seeded checks with time limits, shared by the CLI and the tests.

Each ``criterion_k`` returns a :class:`CriterionResult`; ``run_suite`` runs
a selection of them.  All randomness descends from the configured master
seed, so a report is reproducible from its header.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .chain import Trajectory, escape_count, hitting_time_exact, is_irreducible, observed_chain, simulate
from .config import ExperimentConfig, log_n
from .embed import Embedding, find_comp_detail, l1_to_cuts
from .errors import InvalidInput
from .instances import bridge_chain, far_pair, leaky_hub, three_region, two_block_chain
from .linalg import (
    StateSubset, StochasticMatrix, chain_distance, cut_value, hellinger_sq,
    internal_mass_ratio, random_symmetric_stochastic, second_eigenvalue,
    spectral_norm, total_variation,
)
from .oracle import (
    cheeger_exact, cheeger_sweep_bound, low_info_claim_check, min_internal_expansion_exact,
    min_low_info_ratio, sparsest_cut_exact,
)
from .partition import partition_graph
from .rng import derive_seed, generator
from .testing import (
    ALL_GENERATION_FAILED, chain_partition, draw_quotas, edge_distribution,
    generate_iid_samples, identity_test_chain, trajectory_length,
)

TITLES = {
    1: "exactness",
    2: "spectral inequalities",
    3: "hitting-time bound",
    4: "relaxation and rounding",
    5: "partition guarantees",
    6: "sampler fidelity",
    7: "Hellinger separation",
    8: "escape and histogram bounds",
    9: "end-to-end identity test",
}

LIMITS = {1: 10.0, 2: 30.0, 3: 60.0, 4: 300.0, 5: 300.0, 6: 120.0, 7: 60.0, 8: 300.0, 9: 900.0}


@dataclass
class CriterionResult:
    number: int
    passed: bool
    measured: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def title(self) -> str:
        return TITLES[self.number]

    @property
    def limit(self) -> float:
        return LIMITS[self.number]

    @property
    def in_time(self) -> bool:
        return self.elapsed <= self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.in_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        timing = f"{self.elapsed:.1f}s/{self.limit:.0f}s"
        facts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.number} ({self.title}, {timing}): {facts}"

    def as_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "measured": {k: _plain(v) for k, v in self.measured.items()}}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    return v


def _connected_random(n: int, g: np.random.Generator, density: float = 1.0) -> StochasticMatrix:
    while True:
        P = random_symmetric_stochastic(n, g, density=density, laziness=float(g.random()))
        if is_irreducible(P):
            return P


def _random_subset(n: int, g: np.random.Generator, lo: int = 1, hi: int | None = None) -> StateSubset:
    hi = n - 1 if hi is None else hi
    k = int(g.integers(lo, hi + 1))
    return StateSubset.of(g.choice(n, size=k, replace=False).tolist(), n)


# --- 1 -----------------------------------------------------------------------

def criterion_1(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 1))
    worst_self = 0.0
    for _ in range(100):
        P = random_symmetric_stochastic(int(g.integers(2, 51)), g, density=float(g.uniform(0.2, 1.0)))
        worst_self = max(worst_self, abs(chain_distance(P, P)))

    sandwich_bad = 0
    for _ in range(1000):
        k = int(g.integers(2, 40))
        p = g.dirichlet(np.full(k, float(g.uniform(0.1, 2.0))))
        q = g.dirichlet(np.full(k, float(g.uniform(0.1, 2.0))))
        if g.random() < 0.2:
            p[g.integers(k)] = 0.0
            p /= p.sum()
        h2, tv = hellinger_sq(p, q), total_variation(p, q)
        if not (math.sqrt(2.0) * math.sqrt(h2) + 1e-12 >= tv >= h2 - 1e-12):
            sandwich_bad += 1

    recon = 0.0
    for _ in range(200):
        n, m = int(g.integers(2, 20)), int(g.integers(1, 10))
        coords = g.integers(0, 5, size=(n, m)) / 4.0 if g.random() < 0.3 else g.random((n, m))
        E = Embedding(coords)
        recon = max(recon, float(np.abs(l1_to_cuts(E).distances() - E.l1()).max()))

    observed_bad = 0
    for _ in range(100):
        n = int(g.integers(2, 15))
        P = _connected_random(n, g)
        T = _random_subset(n, g, 1, n)
        try:
            Q = observed_chain(P, T).array
        except InvalidInput:
            observed_bad += 1
            continue
        if np.abs(Q - Q.T).max() > 1e-9 or np.abs(Q.sum(axis=1) - 1).max() > 1e-9:
            observed_bad += 1

    ok = worst_self <= 1e-9 and sandwich_bad == 0 and recon <= 1e-12 and observed_bad == 0
    return CriterionResult(1, ok, {"max |Dist(P,P)|": worst_self, "sandwich violations": sandwich_bad,
                                   "max cut reconstruction error": recon,
                                   "observed-chain failures": observed_bad})


# --- 2 -----------------------------------------------------------------------

def criterion_2(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 2))
    norm_bad = gap_bad = 0
    slack_norm = slack_gap = math.inf
    for _ in range(100):
        n = int(g.integers(3, 13))
        P = random_symmetric_stochastic(n, g, density=float(g.uniform(0.3, 1.0)),
                                        laziness=float(g.random()))
        T = _random_subset(n, g, 1, n - 1)
        a_T = min_low_info_ratio(P, T)
        lhs = spectral_norm(P.submatrix(T))
        slack_norm = min(slack_norm, 1 - a_T**2 / 2 - lhs)
        norm_bad += lhs > 1 - a_T**2 / 2 + 1e-12
        alpha = cheeger_exact(P)
        lam = second_eigenvalue(P)
        slack_gap = min(slack_gap, 1 - alpha**2 / 2 - lam)
        gap_bad += lam > 1 - alpha**2 / 2 + 1e-12
    return CriterionResult(2, norm_bad == 0 and gap_bad == 0,
                           {"norm violations": norm_bad, "gap violations": gap_bad,
                            "min norm slack": slack_norm, "min gap slack": slack_gap})


# --- 3 -----------------------------------------------------------------------

EXACT_CHEEGER_MAX_N = 20


def criterion_3(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 3))
    bad = 0
    worst = 0.0
    for _ in range(50):
        n = int(g.integers(2, 51))
        P = _connected_random(n, g, density=float(g.uniform(0.3, 1.0)))
        # above the enumeration budget, a sweep-cut upper bound makes the check stricter
        alpha = cheeger_exact(P) if n <= EXACT_CHEEGER_MAX_N else cheeger_sweep_bound(P)
        bound = 10 * n * math.log(10 * n) / alpha**2
        h = hitting_time_exact(P)
        worst = max(worst, h / bound)
        bad += h > bound
    two = hitting_time_exact(np.full((2, 2), 0.5))
    three = hitting_time_exact(np.full((3, 3), 1 / 3))
    worked = abs(two - 2) <= 1e-8 and abs(three - 3) <= 1e-8
    return CriterionResult(3, bad == 0 and worked, {"violations": bad, "max HitT/bound": worst,
                                                    "HitT(n=2)": two, "HitT(n=3)": three})


# --- 4 -----------------------------------------------------------------------

def _rounding_instances(g: np.random.Generator):
    for i in range(50):
        n = int(g.integers(3, 13))
        P = random_symmetric_stochastic(n, g, density=float(g.uniform(0.4, 1.0)), laziness=float(g.random()))
        T = StateSubset.empty(n) if i % 2 == 0 else _random_subset(n, g, 1, min(3, n - 1))
        yield P, T
    for i in range(10):
        sizes = g.integers(2, 6, size=int(g.integers(2, 4))).tolist()
        P, blocks, _ = three_region(sizes, 0, float(g.uniform(1e-4, 1e-2)), 0.0, g)
        T = StateSubset.empty(P.n) if i % 2 == 0 else StateSubset.of([blocks[0][0]], P.n)
        yield P, T


def criterion_4(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 4))
    unsound = overlap = ratio_bad = 0
    worst_ratio = worst_gap = 0.0
    for i, (P, T) in enumerate(_rounding_instances(g)):
        n = P.n
        _, opt = sparsest_cut_exact(P, None, T)
        res = find_comp_detail(P, StateSubset.full(n), T, derive_seed(cfg.master_seed, 4, i), cfg.constants)
        worst_gap = max(worst_gap, res.lp_value - opt)
        unsound += res.lp_value > opt + 1e-6
        overlap += not res.cut.isdisjoint(T)
        g_found = cut_value(P, res.cut)
        if opt <= 1e-15:
            r = 1.0 if g_found <= 1e-12 else math.inf
        else:
            r = g_found / opt
        worst_ratio = max(worst_ratio, r)
        ratio_bad += r > cfg.constants.C_fc * math.log(n)
    ok = unsound == 0 and overlap == 0 and ratio_bad == 0
    return CriterionResult(4, ok, {"instances": 60, "LP above optimum": unsound, "max LP - optimum": worst_gap,
                                   "cuts meeting T": overlap, "ratio violations": ratio_bad,
                                   "max ratio": worst_ratio})


# --- 5 -----------------------------------------------------------------------

def audit_partition(P, part) -> dict:
    """Component mass, internal expansion and low-information leakage, checked exhaustively."""
    mass = [internal_mass_ratio(P, S) for S in part.high_info]
    c1 = all(m >= 1 - part.beta for m in mass)
    c2 = all(f is None or min_internal_expansion_exact(P, S) >= f
             for S, f in zip(part.high_info, part.internal_floors))
    c3 = not part.low_info or low_info_claim_check(P, part.low_info, part.low_info_floor)
    return {"claim1": c1, "claim2": c2, "claim3": c3, "min mass": min(mass, default=1.0)}


def _planted_partition_instances(g: np.random.Generator):
    for i in range(20):
        beta = (0.05, 0.1)[i % 2]
        if i % 5 == 4:
            size, count = [(4, 2), (3, 4), (5, 2), (7, 2)][(i // 5) % 4]
            P, _, _ = leaky_hub(size, count, beta / 4)
        else:
            L = int(g.choice([0, 2, 3]))
            sizes = g.integers(3, 7, size=2).tolist()
            P, _, _ = three_region(sizes, L, beta / 100, beta / 4, g)
        yield P, beta


def criterion_5(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 5))
    fails = {"claim1": 0, "claim2": 0, "claim3": 0}
    low_seen = 0
    min_mass = 1.0
    for i, (P, beta) in enumerate(_planted_partition_instances(g)):
        part = partition_graph(P, beta, derive_seed(cfg.master_seed, 5, i), cfg.constants)
        audit = audit_partition(P, part)
        for k in fails:
            fails[k] += not audit[k]
        low_seen += bool(part.low_info)
        min_mass = min(min_mass, audit["min mass"])
    structural = 0
    for i in range(200):
        n = int(g.integers(2, 9))
        P = random_symmetric_stochastic(n, g, density=float(g.uniform(0.2, 1.0)), laziness=float(g.random()))
        beta = float(g.uniform(0.01, 0.5))
        part = partition_graph(P, beta, derive_seed(cfg.master_seed, 5, 100 + i), cfg.constants)
        parts = [set(S.members) for S in part.high_info] + [set(part.low_info.members)]
        covered = set().union(*parts)
        if covered != set(range(n)) or sum(map(len, parts)) != n or not all(part.high_info):
            structural += 1
    ok = not any(fails.values()) and structural == 0
    measured = {f"{k} failures": v for k, v in fails.items()}
    measured.update({"instances with low-info set": low_seen, "min component mass": min_mass,
                     "structural failures": structural})
    return CriterionResult(5, ok, measured)


# --- 6 -----------------------------------------------------------------------

HAND_TRACES = (
    # (word, n, T, quotas, expected outcomes)
    ([0, 1, 0, 1, 0], 2, [0, 1], [1, 1], [(0, 1), (1, 0)]),
    ([0], 2, [0, 1], [1, 0], None),
    ([0, 2, 1], 3, [0], [1], ["eta"]),
)


def hand_traces_pass() -> bool:
    for word, n, T, quotas, expected in HAND_TRACES:
        got = generate_iid_samples(Trajectory(word, n), T, sum(quotas), 0, counts=quotas)
        if expected is None:
            if got:
                return False
        elif not got or got.outcomes() != expected:
            return False
    return True


def sample_until_success(P, T, l: int, seed: int, start_length: int = 1 << 15, cap: int = 1 << 24):
    """Simulate ever longer words until generation succeeds."""
    length = start_length
    while True:
        w = simulate(P, 0, length, seed)
        got = generate_iid_samples(w, T, l, derive_seed(seed, 1))
        if got or length >= cap:
            return got
        length *= 2


def criterion_6(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 6))
    worst = 0.0
    failed = 0
    for i in range(10):
        P = _connected_random(4, g)
        T = _random_subset(4, g, 2, 2)
        got = sample_until_success(P, T, 10_000, derive_seed(cfg.master_seed, 6, i))
        if not got:
            failed += 1
            continue
        emp = got.counts() / len(got)
        worst = max(worst, total_variation(emp, edge_distribution(P, T).probs))
    traces = hand_traces_pass()
    return CriterionResult(6, worst <= 0.05 and failed == 0 and traces,
                           {"max TV": worst, "generation failures": failed, "hand traces": traces})


# --- 7 -----------------------------------------------------------------------

def separated_pairs(g: np.random.Generator, count: int, eps: float, beta: float):
    """Planted chains with a rewired partner at distance at least ``eps``."""
    out = []
    while len(out) < count:
        L = int(g.choice([0, 2, 3]))
        sizes = g.integers(3, 7, size=int(g.integers(2, 4))).tolist()
        P, blocks, low = three_region(sizes, L, beta / 100, beta / 4, g)
        try:
            Q = far_pair(P, blocks + ([low] if low else []), eps)
        except InvalidInput:
            continue
        out.append((P, Q))
    return out


def criterion_7(cfg: ExperimentConfig) -> CriterionResult:
    g = generator(derive_seed(cfg.master_seed, 7))
    eps = 0.3
    beta = eps / 16
    bad = 0
    smallest = math.inf
    for i, (P, Q) in enumerate(separated_pairs(g, 20, eps, beta)):
        part = partition_graph(P, beta, derive_seed(cfg.master_seed, 7, i), cfg.constants)
        for S in part.high_info:
            h2 = hellinger_sq(edge_distribution(P, S).probs, edge_distribution(Q, S).probs)
            smallest = min(smallest, h2)
            bad += h2 < eps**2 / 32
    return CriterionResult(7, bad == 0, {"violations": bad, "min Hel^2": smallest, "floor": eps**2 / 32})


# --- 8 -----------------------------------------------------------------------

def histogram_rate(seed: int, trials: int = 1000, k: int = 8, n: int = 64, eps: float = 0.1) -> float:
    m = math.ceil(10 * k * math.log(n / eps))
    hits = sum(draw_quotas(k, m, derive_seed(seed, t)).max() <= 2 * m / k for t in range(trials))
    return hits / trials


def escape_rate(P, T, delta: float, seed: int, trials: int = 200) -> tuple[float, int, float]:
    n = P.n
    alpha = min_low_info_ratio(P, T)
    l = math.ceil(16 * math.log(n) * math.log(1 / delta) / alpha**2)
    need = l * alpha**2 / (8 * math.log(n))
    uniform = np.full(n, 1.0 / n)
    hits = sum(escape_count(simulate(P, uniform, l, derive_seed(seed, t)), T) >= need for t in range(trials))
    return hits / trials, l, alpha


def criterion_8(cfg: ExperimentConfig) -> CriterionResult:
    hist = histogram_rate(derive_seed(cfg.master_seed, 8, 0))
    g = generator(derive_seed(cfg.master_seed, 8, 1))
    P = random_symmetric_stochastic(8, g)
    T = StateSubset.of([0, 1, 2], 8)
    delta = 0.1
    rate, l, alpha = escape_rate(P, T, delta, derive_seed(cfg.master_seed, 8, 2))
    ok = hist >= 0.99 and rate >= 1 - delta - 0.02
    return CriterionResult(8, ok, {"histogram rate": hist, "escape rate": rate,
                                   "escape target": 1 - delta - 0.02, "alpha": alpha, "l": l})


# --- 9 -----------------------------------------------------------------------

def run_trials(P, Q, eps: float, length: int, part, seed: int, trials: int, threads: int = 1,
               constants=None):
    """Verdicts on words drawn from ``P`` (null) and ``Q`` (alternative)."""
    n = P.n
    uniform = np.full(n, 1.0 / n)
    kw = {} if constants is None else {"constants": constants}

    def one(job):
        case, t = job
        src = P if case == 0 else Q
        s = derive_seed(seed, case, t)
        w = simulate(src, uniform, length, s)
        return identity_test_chain(w, P, eps, derive_seed(s, 1), partition=part, **kw)

    jobs = [(c, t) for c in (0, 1) for t in range(trials)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            verdicts = list(pool.map(one, jobs))
    else:
        verdicts = [one(j) for j in jobs]
    return verdicts[:trials], verdicts[trials:]


def _demand(verdicts, n: int, eps: float, c_N: float) -> float:
    """Share of decided runs whose consumed positions stay under the demand bound."""
    ok = total = 0
    for v in verdicts:
        if v.reason == ALL_GENERATION_FAILED:
            continue
        S, _, used = v.attempts[-1]
        total += 1
        ok += used <= c_N * len(S) * log_n(n) ** 2 / eps**2
    return ok / total if total else 1.0


def criterion_9(cfg: ExperimentConfig, threads: int = 1) -> CriterionResult:
    eps, trials = cfg.eps, cfg.trials
    need = math.ceil(0.6 * trials)
    measured = {}
    ok = True
    cases = {
        "two-block": (two_block_chain(24), trajectory_length(24, eps, cfg.constants)),
        "bridge": (bridge_chain(24, 1e-4), 10_000),
    }
    for j, (name, (P, length)) in enumerate(cases.items()):
        blocks = [list(range(12)), list(range(12, 24))]
        Q = far_pair(P, blocks, eps)
        part = chain_partition(P, eps, derive_seed(cfg.master_seed, 9, j, 0), cfg.constants) \
            if cfg.beta_override is None else \
            partition_graph(P, cfg.beta, derive_seed(cfg.master_seed, 9, j, 0), cfg.constants)
        null, alt = run_trials(P, Q, eps, min(length, cfg.trajectory_cap), part,
                               derive_seed(cfg.master_seed, 9, j, 1), trials, threads, cfg.constants)
        same = sum(v.same for v in null)
        diff = sum(not v.same for v in alt)
        measured[f"{name} m"] = length
        measured[f"{name} same"] = same
        measured[f"{name} different"] = diff
        measured[f"{name} demand rate"] = _demand(null + alt, P.n, eps, cfg.constants.c_N)
        ok &= same >= need and diff >= need and measured[f"{name} demand rate"] >= 0.9
        if name == "bridge":
            hit = hitting_time_exact(P)
            measured["bridge HitT"] = hit
            ok &= hit >= 1e5 and length <= 1e4
    return CriterionResult(9, bool(ok), measured)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def run_criterion(k: int, cfg: ExperimentConfig, threads: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    res = criterion_9(cfg, threads) if k == 9 else CRITERIA[k](cfg)
    res.elapsed = time.perf_counter() - t0
    return res


def run_suite(cfg: ExperimentConfig, only=None, threads: int = 1, on_result=None) -> list[CriterionResult]:
    out = []
    for k in sorted(only or CRITERIA):
        res = run_criterion(k, cfg, threads)
        if on_result is not None:
            on_result(res)
        out.append(res)
    return out


def report(cfg: ExperimentConfig, results) -> dict:
    return {
        "master_seed": cfg.master_seed,
        "config": cfg.as_dict(),
        "backend": kernels.BACKEND,
        "criteria": [r.as_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
