"""Dense two-phase simplex and the sparsest-cut metric relaxations.

The relaxation minimizes ``sum_{i,j} delta_ij P_ij`` over semimetrics with
``sum_{i,j} delta_ij = 1`` (ordered pairs).  With a nonempty set ``T`` the
metric must additionally collapse ``T`` to a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

import numpy as np

from .errors import Infeasible, InvalidInput, IterationLimit, Unbounded
from .linalg import StateSubset, _as_array, as_subset

RELATIONS = ("<=", "=", ">=")
PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-7
METRIC_TOL = 1e-7


@dataclass
class Constraint:
    coeffs: dict[int, float]
    relation: str
    rhs: float

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InvalidInput(f"relation must be one of {RELATIONS}, got {self.relation!r}")


@dataclass
class LinearProgram:
    """``minimize objective @ x`` subject to sparse-row constraints and ``x >= lower``."""

    num_vars: int
    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)
    lower: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise InvalidInput(
                f"objective has length {self.objective.size}, expected {self.num_vars}")
        if self.lower is None:
            self.lower = np.zeros(self.num_vars)
        self.lower = np.asarray(self.lower, dtype=float)
        if self.lower.shape != (self.num_vars,) or not np.all(np.isfinite(self.lower)):
            raise InvalidInput("lower bounds must be finite, one per variable")
        for c in self.constraints:
            self._check(c)

    def _check(self, c: Constraint):
        for j in c.coeffs:
            if not 0 <= j < self.num_vars:
                raise InvalidInput(f"constraint references variable {j} >= {self.num_vars}")

    def add(self, coeffs: Mapping[int, float], relation: str, rhs: float) -> None:
        c = Constraint(dict(coeffs), relation, float(rhs))
        self._check(c)
        self.constraints.append(c)

    def dense(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        A = np.zeros((len(self.constraints), self.num_vars))
        for r, c in enumerate(self.constraints):
            for j, v in c.coeffs.items():
                A[r, j] += v
        b = np.array([c.rhs for c in self.constraints], dtype=float)
        return A, b, [c.relation for c in self.constraints]

    def max_violation(self, x: np.ndarray) -> float:
        A, b, rel = self.dense()
        worst = float(np.max(self.lower - x, initial=0.0))
        if A.size:
            ax = A @ x
            for r, rel_r in enumerate(rel):
                gap = ax[r] - b[r]
                if rel_r == "<=":
                    worst = max(worst, gap)
                elif rel_r == ">=":
                    worst = max(worst, -gap)
                else:
                    worst = max(worst, abs(gap))
        return worst


@dataclass(frozen=True)
class LPSolution:
    value: float
    x: np.ndarray
    iterations: int


class _Tableau:
    """Dense tableau ``[B^-1 A | B^-1 b]`` with a trailing reduced-cost row."""

    def __init__(self, A, b, basis, max_iter):
        m, N = A.shape
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.basis = list(basis)
        self.iterations = 0
        self.max_iter = max_iter

    @property
    def m(self):
        return self.T.shape[0] - 1

    def set_cost(self, c):
        N = self.T.shape[1] - 1
        self.T[-1, :N] = c
        self.T[-1, N] = 0.0
        cb = c[self.basis]
        self.T[-1] -= cb @ self.T[:-1]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def run(self, allowed: np.ndarray):
        """Primal simplex from the current feasible basis.

        Entering column by most negative reduced cost; while pivots are
        degenerate, switch to Bland's smallest-index rule, which cannot cycle.
        """
        T = self.T
        bland = False
        while True:
            cost = T[-1, :-1]
            neg = allowed & (cost < -COST_TOL)
            if not neg.any():
                return
            if self.iterations >= self.max_iter:
                raise IterationLimit(f"simplex exceeded {self.max_iter} pivots")
            j = int(np.flatnonzero(neg)[0]) if bland else int(np.argmin(np.where(neg, cost, 0.0)))
            colj = T[:-1, j]
            pos = colj > PIVOT_TOL
            if not pos.any():
                raise Unbounded("objective is unbounded below")
            ratios = np.full(self.m, np.inf)
            ratios[pos] = T[:-1, -1][pos] / colj[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            # Bland's leaving rule: smallest basic variable index among ties
            r = int(min(ties, key=lambda i: self.basis[i]))
            bland = best <= 1e-12
            self.pivot(r, j)
            self.iterations += 1


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LPSolution:
    """Solve a linear program exactly enough for 1e-7 feasibility.

    Raises
    ------
    Infeasible, Unbounded
        Signalled distinctly.
    IterationLimit
        Pivot cap ``50 * (rows + cols)`` exceeded.
    """
    A0, b0, rel = lp.dense()
    n = lp.num_vars
    b = b0 - A0 @ lp.lower
    A = A0.copy()
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    rel = [{"<=": ">=", ">=": "<=", "=": "="}[r] if f else r for r, f in zip(rel, flip)]
    m = len(rel)

    slack_cols, art_rows = [], []
    for i, r in enumerate(rel):
        if r in ("<=", ">="):
            slack_cols.append((i, 1.0 if r == "<=" else -1.0))
        if r in ("=", ">="):
            art_rows.append(i)
    ns, na = len(slack_cols), len(art_rows)
    N = n + ns + na
    full = np.zeros((m, N))
    full[:, :n] = A
    basis = [-1] * m
    for s, (i, sign) in enumerate(slack_cols):
        full[i, n + s] = sign
        if sign > 0:
            basis[i] = n + s
    for a, i in enumerate(art_rows):
        full[i, n + ns + a] = 1.0
        basis[i] = n + ns + a
    if max_iter is None:
        max_iter = 50 * (m + N)

    tab = _Tableau(full, b, basis, max_iter)
    is_art = np.zeros(N, dtype=bool)
    is_art[n + ns:] = True
    if na:
        tab.set_cost(is_art.astype(float))
        tab.run(np.ones(N, dtype=bool))
        if -tab.T[-1, -1] > FEAS_TOL:
            raise Infeasible(f"phase one ended with infeasibility {-tab.T[-1, -1]:.3g}")
        _drive_out_artificials(tab, is_art)

    cost = np.zeros(N)
    cost[:n] = lp.objective
    tab.set_cost(cost)
    tab.run(~is_art)

    x = _basic_solution(full, b, tab, N)[:n]
    x = np.maximum(x, 0.0) + lp.lower
    value = float(lp.objective @ x)
    return LPSolution(value, x, tab.iterations)


def _drive_out_artificials(tab: _Tableau, is_art: np.ndarray):
    keep = []
    for r in range(tab.m):
        if not is_art[tab.basis[r]]:
            keep.append(r)
            continue
        row = np.abs(tab.T[r, :-1])
        row[is_art] = 0.0
        if row.max() > PIVOT_TOL:
            tab.pivot(r, int(np.argmax(row)))
            keep.append(r)
        # else: the row is redundant; drop it
    if len(keep) < tab.m:
        tab.T = np.vstack([tab.T[keep], tab.T[-1:]])
        tab.basis = [tab.basis[r] for r in keep]


def _basic_solution(full, b, tab, N):
    # re-solve B x_B = b on the original data to shed tableau round-off;
    # B may be tall when redundant rows were dropped, but stays consistent
    x = np.zeros(N)
    basis = tab.basis
    if not basis:
        return x
    B = full[:, basis]
    xb = np.linalg.lstsq(B, b, rcond=None)[0]
    if np.abs(B @ xb - b).max() > FEAS_TOL:
        xb = tab.T[:-1, -1]
    x[basis] = xb
    return x


# --------------------------------------------------------------------------
# metric relaxations


@dataclass(frozen=True)
class Metric:
    """Finite semimetric; construction audits every triangle."""

    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidInput("metric must be square")
        if np.any(np.abs(np.diag(d)) > METRIC_TOL) or np.any(d < -METRIC_TOL):
            raise InvalidInput("metric needs a zero diagonal and nonnegative entries")
        if np.any(np.abs(d - d.T) > METRIC_TOL):
            raise InvalidInput("metric must be symmetric")
        worst = triangle_violation(d)
        if worst > METRIC_TOL:
            raise InvalidInput(f"triangle inequality violated by {worst:.3g}")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


def triangle_violation(d: np.ndarray) -> float:
    """Largest ``d_ij - d_ik - d_kj`` over all triples (0 if none is positive)."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    worst = 0.0
    for k in range(n):
        via = d[:, k][:, None] + d[k, :][None, :]
        worst = max(worst, float((d - via).max()))
    return worst


def _pairs(n):
    return list(combinations(range(n), 2))


def build_lpccc(P, T=()) -> LinearProgram:
    """The relaxation with explicit component constraints (no collapsing).

    Variables are ``delta_ij`` for ``i < j`` in ``combinations`` order.
    ``T = ()`` gives the plain sparsest-cut relaxation.
    """
    a = _as_array(P)
    n = a.shape[0]
    T = as_subset(T, n)
    if len(T) == n:
        raise InvalidInput("T must be a proper subset")
    if n < 2:
        raise InvalidInput("need at least two states")
    pairs = _pairs(n)
    idx = {p: v for v, p in enumerate(pairs)}

    def var(i, j):
        return idx[(i, j) if i < j else (j, i)]

    lp = LinearProgram(len(pairs), np.array([a[i, j] + a[j, i] for i, j in pairs]))
    for i, j in pairs:
        for k in range(n):
            if k != i and k != j:
                lp.add({var(i, j): 1.0, var(i, k): -1.0, var(k, j): -1.0}, "<=", 0.0)
    lp.add({v: 2.0 for v in range(len(pairs))}, "=", 1.0)
    tm = list(T)
    for i, j in combinations(tm, 2):
        lp.add({var(i, j): 1.0}, "=", 0.0)
    for t in tm[1:]:
        for k in range(n):
            if k not in T:
                lp.add({var(tm[0], k): 1.0, var(t, k): -1.0}, "=", 0.0)
    return lp


@dataclass(frozen=True)
class _Collapsed:
    nodes: list[int]          # representative original index per reduced node
    groups: list[list[int]]   # original states per reduced node
    weight: np.ndarray        # objective weight per reduced pair
    norm: np.ndarray          # normalization weight per reduced pair


def _collapse(a: np.ndarray, T: StateSubset) -> _Collapsed:
    n = a.shape[0]
    groups = [[i] for i in range(n) if i not in T]
    if T:
        groups.append(list(T))
    sym = a + a.T
    k = len(groups)
    weight = np.zeros((k, k))
    norm = np.zeros((k, k))
    for x in range(k):
        for y in range(x + 1, k):
            gx, gy = groups[x], groups[y]
            weight[x, y] = weight[y, x] = sym[np.ix_(gx, gy)].sum()
            norm[x, y] = norm[y, x] = 2.0 * len(gx) * len(gy)
    return _Collapsed([g[0] for g in groups], groups, weight, norm)


def _violations(D: np.ndarray, tol: float):
    """All ``(excess, i, j, m)`` with ``D_ij > D_im + D_mj + tol``, ``i < j``."""
    k = D.shape[0]
    found = []
    for m_ in range(k):
        slack = D - (D[:, m_][:, None] + D[m_, :][None, :])
        slack[m_, :] = -np.inf
        slack[:, m_] = -np.inf
        ii, jj = np.nonzero(np.triu(slack > tol, 1))
        found.extend(zip(slack[ii, jj].tolist(), ii.tolist(), jj.tolist(), [m_] * len(ii)))
    found.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))
    return found


class _MetricDual:
    """Column-generation simplex for the dual of the metric relaxation.

    Dual: ``max lam`` s.t. ``lam * norm_e - sum_r y_r tri_{r,e} <= w_e`` for every
    reduced pair e, ``lam, y >= 0``; one column ``y_r`` per triangle
    inequality, priced in only when the current primal metric violates it.
    The primal metric is read off the reduced costs of the slack columns.
    """

    def __init__(self, weight, norm, pairs, max_iter):
        self.K = K = len(pairs)
        self.pairs = pairs
        self.idx = {p: v for v, p in enumerate(pairs)}
        self.k = max(max(p) for p in pairs) + 1
        self.norm = norm
        self.weight = weight
        # columns: K slacks, lambda, then triangle columns
        self.T = np.zeros((K + 1, K + 2))
        self.T[:K, :K] = np.eye(K)
        self.T[:K, K] = norm
        self.T[:K, -1] = weight
        self.T[K, K] = -1.0
        self.basis = list(range(K))
        self.columns: list[tuple[int, int, int]] = []
        self.iterations = 0
        self.max_iter = max_iter

    def primal(self) -> np.ndarray:
        return np.maximum(self.T[-1, :self.K], 0.0)

    def add_columns(self, rows):
        K = self.K
        binv = self.T[:K, :K]
        x = self.T[-1, :K]
        new = np.zeros((K + 1, len(rows)))
        for c, (e_ij, e_im, e_mj) in enumerate(rows):
            a = np.zeros(K)
            a[e_ij] -= 1.0
            a[e_im] += 1.0
            a[e_mj] += 1.0
            new[:K, c] = binv @ a
            new[K, c] = x @ a
        self.T = np.hstack([self.T[:, :-1], new, self.T[:, -1:]])
        self.columns.extend(rows)

    def optimize(self):
        T = self.T
        K = self.K
        bland = False
        while True:
            cost = T[-1, :-1]
            neg = cost < -COST_TOL
            if not neg.any():
                return
            if self.iterations >= self.max_iter:
                raise IterationLimit(f"metric simplex exceeded {self.max_iter} pivots")
            j = int(np.flatnonzero(neg)[0]) if bland else int(np.argmin(cost))
            colj = T[:K, j]
            pos = colj > PIVOT_TOL
            if not pos.any():
                raise Unbounded("metric dual is unbounded")
            ratios = np.full(K, np.inf)
            ratios[pos] = T[:K, -1][pos] / colj[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            r = int(min(ties, key=lambda i: self.basis[i]))
            bland = best <= 1e-12
            T[r] /= T[r, j]
            col = T[:, j].copy()
            col[r] = 0.0
            T -= np.outer(col, T[r])
            T[:, j] = 0.0
            T[r, j] = 1.0
            self.basis[r] = j
            self.iterations += 1


def _metric_from_pairs(x, k, pairs):
    D = np.zeros((k, k))
    for v, (i, j) in enumerate(pairs):
        D[i, j] = D[j, i] = x[v]
    return D


def _shortest_paths(D):
    D = D.copy()
    for m_ in range(D.shape[0]):
        D = np.minimum(D, D[:, m_][:, None] + D[m_, :][None, :])
    return D


def solve_metric(P, T=(), *, method: str = "colgen",
                 max_rounds: int = 500) -> tuple[Metric, float]:
    """Optimal metric of the relaxation, with ``T`` glued to a single point.

    ``T`` is collapsed to one super-node before the LP is built, which makes
    the within-``T`` and tied-distance constraints hold exactly and shrinks
    the program.  ``method="colgen"`` solves the dual by simplex, adding a
    triangle inequality only once the current metric violates it;
    ``method="direct"`` hands the collapsed primal with every triangle row to
    :func:`solve_lp`.

    Returns
    -------
    metric : Metric
        Distances between the original states.
    value : float
        Optimal objective ``sum_{i,j} delta_ij P_ij``.
    """
    a = _as_array(P)
    n = a.shape[0]
    T = as_subset(T, n)
    if n < 2 or len(T) == n:
        raise InvalidInput("need at least two states and a proper T")
    red = _collapse(a, T)
    k = len(red.groups)
    pairs = _pairs(k)
    w = np.array([red.weight[i, j] for i, j in pairs])
    nu = np.array([red.norm[i, j] for i, j in pairs])

    if method == "direct":
        lp = LinearProgram(len(pairs), w)
        lp.add({v: nu[v] for v in range(len(pairs))}, "=", 1.0)
        idx = {p: v for v, p in enumerate(pairs)}
        for (i, j) in pairs:
            for m_ in range(k):
                if m_ != i and m_ != j:
                    lp.add({idx[(i, j)]: 1.0, idx[tuple(sorted((i, m_)))]: -1.0,
                            idx[tuple(sorted((m_, j)))]: -1.0}, "<=", 0.0)
        x = solve_lp(lp).x
    elif method == "colgen":
        K = len(pairs)
        dual = _MetricDual(w, nu, pairs, max_iter=50 * (K + K * max(k - 2, 0)) + 1000)
        seen: set[tuple[int, int, int]] = set()
        for _ in range(max_rounds):
            dual.optimize()
            D = _metric_from_pairs(dual.primal(), k, pairs)
            rows = []
            for _, i, j, m_ in _violations(D, 1e-12):
                r = (dual.idx[(i, j)], dual.idx[tuple(sorted((i, m_)))],
                     dual.idx[tuple(sorted((m_, j)))])
                if r not in seen:
                    rows.append(r)
            if not rows:
                break
            rows = rows[:max(K, 8)]
            seen.update(rows)
            dual.add_columns(rows)
        else:
            raise IterationLimit("triangle column generation did not converge")
        x = dual.primal()
    else:
        raise InvalidInput(f"unknown method {method!r}")

    # project onto metrics (shortest-path closure) and restore the normalization
    D = _shortest_paths(_metric_from_pairs(np.maximum(x, 0.0), k, pairs))
    xs = np.array([D[i, j] for i, j in pairs])
    scale = float(nu @ xs)
    if scale <= 0:
        raise ArithmeticError("relaxation returned the zero metric")
    D /= scale
    value = float(w @ (xs / scale))

    owner = np.empty(n, dtype=int)
    for g, members in enumerate(red.groups):
        owner[members] = g
    d = D[np.ix_(owner, owner)]
    np.fill_diagonal(d, 0.0)
    return Metric(d), value
