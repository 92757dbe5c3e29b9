import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcidtest import oracle
from mcidtest.bench import audit_partition
from mcidtest.errors import InvalidInput
from mcidtest.instances import leaky_hub, three_region
from mcidtest.linalg import StateSubset, expansion, internal_mass_ratio, random_symmetric_stochastic
from mcidtest.partition import (
    ClaimViolation, Partition, denser_side, extract_component, extract_component_detail,
    internal_floor, leak_floor, low_info_floor, partition_graph,
)

from conftest import TIGHT_BLOCK, UNIFORM4


def members(sets):
    return sorted(list(S.members) for S in sets)


def submatrix_counterexample():
    """Five states: {1,2,3} uniform, 0 and 4 loosely paired, 0 touching 1."""
    a = np.zeros((5, 5))
    a[1:4, 1:4] = 1 / 3
    a[0, 4] = a[4, 0] = 0.055
    a[0, 1] = a[1, 0] = 0.01
    a[1, 1] -= 0.01
    for i in range(5):
        a[i, i] += 1 - a[i].sum()
    return a


class TestExtractComponent:
    def test_tight_block(self):
        ex = extract_component_detail(TIGHT_BLOCK, (), 0.05, seed=0)
        assert ex.component.members in ((0, 1), (2, 3))
        assert ex.first_expansion == pytest.approx(0.0002)
        assert len(ex.steps) == 1 and ex.steps[0].kept is None
        assert ex.steps[0].expansion == pytest.approx(0.4999)

    def test_uniform_returns_everything(self):
        ex = extract_component_detail(UNIFORM4, (), 0.05, seed=0)
        # the tie-broken first cut is {0}; every cut of the uniform chain exceeds beta/8
        assert ex.first_cut.members == (0,)
        assert ex.first_expansion == pytest.approx(0.75)
        assert ex.first_expansion >= 0.05 / 8
        assert ex.component == StateSubset.full(4)

    def test_leaky_remainder(self):
        P, blocks, hub = leaky_hub(3, 2, escape=0.05)
        T = [s for B in blocks for s in B]
        beta = 0.1
        ex = extract_component_detail(P, T, beta, seed=0)
        assert ex.component is None
        assert ex.leak_floor == leak_floor(beta, P.n)
        rest = StateSubset.of(hub, P.n)
        assert internal_mass_ratio(P, rest) <= 1 - beta / 8
        assert expansion(P, rest) >= ex.leak_floor

    def test_leaky_expander_remainder(self):
        P = np.full((8, 8), 1 / 8)
        T = [0, 1, 2, 3]
        beta = 0.1
        assert extract_component(P, T, beta, seed=2) is None
        # every subset outside T expands beyond the recorded floor
        _, worst = oracle.sparsest_cut_exact(P, None, T)
        assert worst > 0
        assert oracle.min_low_info_ratio(P, StateSubset.of([4, 5, 6, 7], 8)) >= low_info_floor(beta, 8)

    def test_full_T_guard(self):
        assert extract_component(UNIFORM4, [0, 1, 2, 3], 0.05, seed=0) is None

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.1])
    def test_invalid_beta(self, beta):
        with pytest.raises(InvalidInput):
            extract_component(UNIFORM4, (), beta, seed=0)

    def test_inner_loop_measures_submatrix(self):
        a = submatrix_counterexample()
        beta = 0.8
        threshold = beta / (8 * math.log(5))
        ex = extract_component_detail(a, (), beta, seed=0)
        assert ex.first_cut.members == (0, 4)
        step = ex.steps[0]
        assert step.cut.members == (0,)
        sub = a[np.ix_([0, 4], [0, 4])]
        assert step.expansion == pytest.approx(expansion(sub, StateSubset.of([0], 2)))
        assert step.expansion < threshold
        # measured against the full chain the same cut would stop the loop
        assert expansion(a, StateSubset.of([0], 5)) >= threshold
        assert ex.component.members == (4,)

    def test_result_avoids_T(self, rng):
        for n in range(3, 9):
            P = random_symmetric_stochastic(n, rng, density=0.5)
            T = StateSubset.of([0], n)
            S = extract_component(P, T, 0.2, seed=n)
            assert S is None or S.isdisjoint(T)


class TestDenserSide:
    def test_keeps_denser(self):
        a = submatrix_counterexample()
        S = StateSubset.of([1, 2, 3], 5)
        R = StateSubset.of([0, 4], 5)
        assert denser_side(a, S, R) == S
        assert denser_side(a, R, S) == S

    def test_tie_keeps_cut(self):
        A, B = StateSubset.of([0, 1], 4), StateSubset.of([2, 3], 4)
        assert denser_side(UNIFORM4, A, B) == A
        assert denser_side(UNIFORM4, B, A) == B


class TestFloors:
    def test_values(self):
        assert leak_floor(0.16, 100) == pytest.approx(0.16 / (8 * 20 * math.log(100)))
        assert internal_floor(0.16, 100, 2) == leak_floor(0.16, 100)
        assert internal_floor(0.16, 100, 10) == pytest.approx(leak_floor(0.16, 100) / math.log(10))
        assert low_info_floor(0.16, 100) == pytest.approx(leak_floor(0.16, 100) / 9)

    def test_log_floor_at_small_n(self):
        assert leak_floor(0.16, 2) == pytest.approx(0.16 / 160)


class TestPartitionGraph:
    def test_tight_block(self):
        part = partition_graph(TIGHT_BLOCK, 0.05, seed=0)
        assert members(part.high_info) == [[0, 1], [2, 3]]
        assert not part.low_info
        assert part.extractions[-1].component is None

    def test_uniform(self):
        part = partition_graph(UNIFORM4, 0.05, seed=0)
        assert members(part.high_info) == [[0, 1, 2, 3]]
        assert not part.low_info

    def test_leaky_hub(self):
        P, blocks, hub = leaky_hub(4, 2, escape=0.05 / 4)
        part = partition_graph(P, 0.05, seed=1)
        assert members(part.high_info) == sorted(blocks)
        assert list(part.low_info.members) == hub
        audit = audit_partition(P, part)
        assert audit["claim1"] and audit["claim2"] and audit["claim3"]

    def test_three_region_claims(self):
        g = np.random.default_rng(7)
        for L in (0, 2, 3):
            P, blocks, low = three_region([4, 5], L, 1e-3, 0.025, g)
            part = partition_graph(P, 0.1, seed=L)
            audit = audit_partition(P, part)
            assert audit["claim1"] and audit["claim2"] and audit["claim3"]

    def test_json_round_trip(self):
        part = partition_graph(TIGHT_BLOCK, 0.05, seed=0)
        doc = json.loads(part.to_json())
        assert doc == {"beta": 0.05, "high_info": [[0, 1], [2, 3]], "low_info": []}
        back = Partition.from_json(part.to_json(), 4)
        assert back.high_info == part.high_info and back.low_info == part.low_info

    def test_seed_reproducible(self, rng):
        P = random_symmetric_stochastic(9, rng, density=0.4)
        assert partition_graph(P, 0.2, 5) == partition_graph(P, 0.2, 5)

    def test_rejects_bad_partition(self):
        with pytest.raises(InvalidInput):
            Partition((StateSubset.of([0, 1], 3),), StateSubset.of([1], 3), 0.1)
        with pytest.raises(InvalidInput):
            Partition((StateSubset.of([0], 3),), StateSubset.of([1], 3), 0.1)

    def test_claim_violation_is_assertion(self):
        assert issubclass(ClaimViolation, AssertionError)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.floats(0.01, 0.5),
       st.floats(0.2, 1.0), st.floats(0.0, 1.0))
def test_partition_structure_and_mass(n, seed, beta, density, laziness):
    g = np.random.default_rng(seed)
    P = random_symmetric_stochastic(n, g, density=density, laziness=laziness)
    part = partition_graph(P, beta, seed)
    covered = sorted(sum((list(S.members) for S in part.high_info), list(part.low_info.members)))
    assert covered == list(range(n))
    assert len(part.extractions) <= n + 1
    for S in part.high_info:
        assert internal_mass_ratio(P, S) >= 1 - beta - 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 9), st.integers(0, 2**32 - 1), st.floats(0.02, 0.4))
def test_recorded_floors_hold(n, seed, beta):
    g = np.random.default_rng(seed)
    P = random_symmetric_stochastic(n, g, density=0.5, laziness=1.0)
    audit = audit_partition(P, partition_graph(P, beta, seed))
    assert audit["claim1"] and audit["claim2"] and audit["claim3"]
