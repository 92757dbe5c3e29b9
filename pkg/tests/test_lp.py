import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcidtest import oracle
from mcidtest.errors import Infeasible, InvalidInput, Unbounded
from mcidtest.linalg import StateSubset, cut_value, random_symmetric_stochastic
from mcidtest.lp import LinearProgram, Metric, build_lpccc, solve_lp, solve_metric, triangle_violation

from conftest import BLOCK, UNIFORM4


class TestSolveLP:
    def test_single_bound(self):
        lp = LinearProgram(1, [1.0])
        lp.add({0: 1.0}, ">=", 3.0)
        sol = solve_lp(lp)
        assert sol.value == pytest.approx(3.0)
        assert sol.x[0] == pytest.approx(3.0)

    def test_sum_bound(self):
        lp = LinearProgram(2, [1.0, 1.0])
        lp.add({0: 1.0, 1: 1.0}, ">=", 1.0)
        assert solve_lp(lp).value == pytest.approx(1.0)

    def test_unbounded(self):
        with pytest.raises(Unbounded):
            solve_lp(LinearProgram(1, [-1.0]))

    def test_infeasible(self):
        lp = LinearProgram(1, [1.0])
        lp.add({0: 1.0}, "<=", 1.0)
        lp.add({0: 1.0}, ">=", 2.0)
        with pytest.raises(Infeasible):
            solve_lp(lp)

    def test_equality_and_lower_bounds(self):
        lp = LinearProgram(2, [1.0, 2.0], lower=[1.0, -1.0])
        lp.add({0: 1.0, 1: 1.0}, "=", 1.0)
        sol = solve_lp(lp)
        assert sol.x == pytest.approx([2.0, -1.0])
        assert sol.value == pytest.approx(0.0)

    def test_rejects_bad_variable(self):
        lp = LinearProgram(1, [1.0])
        with pytest.raises(InvalidInput):
            lp.add({3: 1.0}, "<=", 1.0)
        with pytest.raises(InvalidInput):
            lp.add({0: 1.0}, "<", 1.0)

    def test_random_programs_agree_with_vertex_enumeration(self, rng):
        # min c x, A x <= b, x >= 0 in two variables: optimum sits at a vertex
        for _ in range(40):
            A = rng.uniform(0.1, 1.0, size=(3, 2))
            b = rng.uniform(1.0, 2.0, size=3)
            c = rng.uniform(-1.0, 1.0, size=2)
            lp = LinearProgram(2, c)
            for row, rhs in zip(A, b):
                lp.add({0: row[0], 1: row[1]}, "<=", rhs)
            lines = [(row, rhs) for row, rhs in zip(A, b)] + [((1.0, 0.0), 0.0), ((0.0, 1.0), 0.0)]
            best = np.inf
            for (r1, b1), (r2, b2) in itertools.combinations(lines, 2):
                M = np.array([r1, r2])
                if abs(np.linalg.det(M)) < 1e-12:
                    continue
                v = np.linalg.solve(M, [b1, b2])
                if (v >= -1e-9).all() and (A @ v <= b + 1e-9).all():
                    best = min(best, c @ v)
            sol = solve_lp(lp)
            assert sol.value == pytest.approx(best, abs=1e-7)
            assert lp.max_violation(sol.x) <= 1e-7


class TestBuildLPCCC:
    def test_two_states(self):
        P = np.array([[0.7, 0.3], [0.3, 0.7]])
        lp = build_lpccc(P)
        assert lp.num_vars == 1
        sol = solve_lp(lp)
        assert sol.x[0] == pytest.approx(0.5)
        assert sol.value == pytest.approx(0.3)

    def test_component_rows(self):
        P = np.full((3, 3), 1 / 3)
        lp = build_lpccc(P, T=[0, 1])
        sol = solve_lp(lp)
        x = sol.x  # (0,1), (0,2), (1,2)
        assert x[0] == pytest.approx(0.0, abs=1e-9)
        assert x[1] == pytest.approx(x[2])
        assert lp.max_violation(x) <= 1e-7

    def test_rejects_full_T(self):
        with pytest.raises(InvalidInput):
            build_lpccc(UNIFORM4, T=[0, 1, 2, 3])


class TestSolveMetric:
    def test_block(self):
        d, value = solve_metric(BLOCK)
        assert value == pytest.approx(0.01, abs=1e-9)
        assert d.d[0, 1] == pytest.approx(0.0, abs=1e-9)
        assert d.d[0, 2] > 0

    def test_lower_bounds_sparsest_cut(self, rng):
        for n in range(2, 8):
            for _ in range(3):
                P = random_symmetric_stochastic(n, rng, density=0.7)
                _, value = solve_metric(P)
                _, exact = oracle.sparsest_cut_exact(P)
                assert value <= exact + 1e-9

    def test_with_T_lower_bounds_restricted_cut(self, rng):
        for n in range(3, 8):
            P = random_symmetric_stochastic(n, rng)
            T = StateSubset.of([0, 1], n)
            metric, value = solve_metric(P, T)
            _, exact = oracle.sparsest_cut_exact(P, None, T)
            assert value <= exact + 1e-9
            assert np.allclose(metric.d[0, 1], 0.0)
            assert np.allclose(metric.d[0, 2:], metric.d[1, 2:])

    def test_metric_is_normalized_and_triangle_closed(self, rng):
        P = random_symmetric_stochastic(9, rng)
        metric, value = solve_metric(P)
        d = metric.d
        assert d.sum() == pytest.approx(1.0)
        assert triangle_violation(d) <= 1e-9
        assert (d * P.array).sum() == pytest.approx(value)

    def test_deterministic(self, rng):
        P = random_symmetric_stochastic(8, rng)
        a, va = solve_metric(P)
        b, vb = solve_metric(P)
        assert va == vb
        assert np.array_equal(a.d, b.d)

    def test_colgen_matches_direct(self, rng):
        for n in (3, 5, 7):
            P = random_symmetric_stochastic(n, rng, density=0.6)
            _, v1 = solve_metric(P, method="colgen")
            _, v2 = solve_metric(P, method="direct")
            assert v1 == pytest.approx(v2, abs=1e-8)

    def test_cut_metric_is_feasible(self):
        # the scaled indicator of the optimal cut attains the cut value
        S = StateSubset.of([0, 1], 4)
        assert cut_value(BLOCK, S) == pytest.approx(solve_metric(BLOCK)[1])

    def test_rejects(self):
        with pytest.raises(InvalidInput):
            solve_metric(UNIFORM4, T=[0, 1, 2, 3])
        with pytest.raises(InvalidInput):
            solve_metric(UNIFORM4, method="magic")


class TestMetric:
    def test_rejects_triangle_violation(self):
        with pytest.raises(InvalidInput):
            Metric(np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], float))

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInput):
            Metric(np.array([[0, 1], [2, 0]], float))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_relaxation_is_a_lower_bound(n, seed):
    g = np.random.default_rng(seed)
    P = random_symmetric_stochastic(n, g, density=0.6)
    metric, value = solve_metric(P)
    assert triangle_violation(metric.d) <= 1e-9
    assert value <= oracle.sparsest_cut_exact(P)[1] + 1e-9
