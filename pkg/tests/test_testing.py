import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcidtest import oracle
from mcidtest.bench import HAND_TRACES, hand_traces_pass, histogram_rate, sample_until_success
from mcidtest.chain import Trajectory, simulate
from mcidtest.errors import InsufficientSamples, InvalidInput
from mcidtest.instances import far_pair, two_block_chain
from mcidtest.kernels import scan_samples
from mcidtest.linalg import StateSubset, StochasticMatrix, hellinger_sq, random_symmetric_stochastic, total_variation
from mcidtest.partition import partition_graph
from mcidtest.testing import (
    ALL_GENERATION_FAILED, DIFFERENT, ETA, SAME, EdgeDistribution, GenerationFailed, SampleSet,
    Verdict, chi_statistic, component_sample_count, draw_quotas, edge_distribution,
    generate_iid_samples, identity_test_chain, identity_test_iid, null_threshold,
    required_samples, trajectory_length,
)

HALF = StochasticMatrix([[0.5, 0.5], [0.5, 0.5]])
STICKY = StochasticMatrix([[0.9, 0.1], [0.1, 0.9]])


class TestEdgeDistribution:
    def test_full_set_has_no_escape(self, rng):
        P = random_symmetric_stochastic(5, rng)
        assert edge_distribution(P, range(5)).eta == pytest.approx(0.0, abs=1e-12)

    def test_single_state(self):
        assert edge_distribution(HALF, [0]).as_dict() == {(0, 0): 0.5, ETA: 0.5}

    def test_two_states(self):
        d = edge_distribution(STICKY, [0, 1]).as_dict()
        assert d == pytest.approx({(0, 0): 0.45, (0, 1): 0.05, (1, 0): 0.05, (1, 1): 0.45, ETA: 0.0})

    def test_global_labels(self, rng):
        P = random_symmetric_stochastic(6, rng)
        D = edge_distribution(P, [1, 4])
        assert D.mass(4, 1) == pytest.approx(P[4, 1] / 2)
        assert D.outcome(4) == ETA
        assert D.support_size == 5

    def test_empty(self):
        with pytest.raises(InvalidInput):
            edge_distribution(HALF, [])

    def test_matches_independent_construction(self, rng):
        P, Q = random_symmetric_stochastic(6, rng), random_symmetric_stochastic(6, rng)
        R = StateSubset.of([0, 2, 5], 6)
        p, q = edge_distribution(P, R).probs, edge_distribution(Q, R).probs
        tv, h2 = oracle.edge_distribution_distance_exact(P, Q, R)
        assert total_variation(p, q) == pytest.approx(tv)
        assert hellinger_sq(p, q) == pytest.approx(h2)

    def test_rejects_bad_probs(self):
        with pytest.raises(InvalidInput):
            EdgeDistribution(StateSubset.of([0], 2), [0.5, 0.6])


class TestGenerateSamples:
    @pytest.mark.parametrize("trace", HAND_TRACES)
    def test_hand_traces(self, trace):
        word, n, T, quotas, expected = trace
        got = generate_iid_samples(Trajectory(word, n), T, sum(quotas), 0, counts=quotas)
        if expected is None:
            assert isinstance(got, GenerationFailed) and not got
        else:
            assert isinstance(got, SampleSet)
            assert got.outcomes() == expected
        assert hand_traces_pass()

    def test_single_position_fails(self):
        for l in (1, 2, 5):
            assert not generate_iid_samples(Trajectory([0], 2), [0, 1], l, seed=l)

    def test_quota_goes_negative(self):
        states = np.array([0, 1, 1, 1, 0])
        local = np.array([0, 1])
        codes, consumed, rest = scan_samples(states, local, np.array([1, 0]), 2)
        assert codes.tolist() == [1]
        assert rest.tolist() == [0, -3]
        got = generate_iid_samples(Trajectory(states, 2), [0, 1], 1, 0, counts=[1, 0])
        assert got.outcomes() == [(0, 1)]

    def test_sampler_fidelity(self):
        g = np.random.default_rng(21)
        P = random_symmetric_stochastic(4, g)
        T = StateSubset.of([1, 3], 4)
        got = sample_until_success(P, T, 10_000, seed=21)
        assert got and len(got) == 10_000
        emp = got.counts() / len(got)
        assert total_variation(emp, edge_distribution(P, T).probs) <= 0.05

    def test_quotas(self):
        r = draw_quotas(5, 100, seed=3)
        assert r.sum() == 100 and r.shape == (5,)
        assert np.array_equal(r, draw_quotas(5, 100, seed=3))

    def test_histogram_bound(self):
        assert histogram_rate(seed=1, trials=1000) >= 0.99

    @pytest.mark.parametrize("l, counts", [(0, None), (2, [1, 0]), (1, [1])])
    def test_rejects(self, l, counts):
        with pytest.raises(InvalidInput):
            generate_iid_samples(Trajectory([0, 1], 2), [0, 1], l, 0, counts=counts)


class TestIIDTester:
    def test_impossible_outcome(self):
        p = EdgeDistribution(StateSubset.of([0], 1), [1.0, 0.0])
        v = identity_test_iid(p, np.ones(200, dtype=int), 0.5, 0.05)
        assert v.value == DIFFERENT and v.reason == "impossible outcome"

    def test_calibration(self):
        g = np.random.default_rng(0)
        P = random_symmetric_stochastic(5, g)
        p = edge_distribution(P, [0, 1, 2])
        m = max(required_samples(p.support_size, 0.1, 0.05), 500)
        same = 0
        for _ in range(100):
            codes = g.choice(p.support_size, size=m, p=p.probs)
            same += identity_test_iid(p, codes, 0.1, 0.05).same
        assert same >= 95

    def test_detects_far_pair(self):
        eps = 0.3
        P = two_block_chain(24)
        Q = far_pair(P, [list(range(12)), list(range(12, 24))], eps)
        S = StateSubset.of(range(12), 24)
        p, q = edge_distribution(P, S), edge_distribution(Q, S)
        assert hellinger_sq(p.probs, q.probs) >= eps**2 / 32
        m = component_sample_count(12, 24, eps)
        g = np.random.default_rng(1)
        diff = sum(not identity_test_iid(p, g.choice(q.support_size, size=m, p=q.probs),
                                         eps**2 / 32, 1 / 240).same for _ in range(100))
        assert diff >= 95

    def test_insufficient(self):
        p = edge_distribution(HALF, [0, 1])
        with pytest.raises(InsufficientSamples):
            identity_test_iid(p, np.zeros(3, dtype=int), 0.01, 0.01)

    def test_statistic(self):
        assert chi_statistic([5, 5], np.array([0.5, 0.5])) == pytest.approx(-1.0)
        assert chi_statistic([10, 0], np.array([0.5, 0.5])) == pytest.approx(25 / 15 - 10 / 15 + 25 / 5)

    def test_threshold_deterministic(self):
        p = np.array([0.2, 0.3, 0.5])
        assert null_threshold(p, 300, 0.05) == null_threshold(p.copy(), 300, 0.05)


class TestVerdict:
    def test_json(self):
        v = Verdict(SAME, StateSubset.of([0, 1], 4), "accepted")
        assert json.loads(v.to_json()) == {"verdict": "same", "component": [0, 1], "reason": "accepted"}

    def test_failure_maps_to_different(self):
        v = Verdict(DIFFERENT, None, ALL_GENERATION_FAILED)
        assert json.loads(v.to_json()) == {"verdict": "different", "component": None,
                                           "reason": "AllGenerationFailed"}
        with pytest.raises(InvalidInput):
            Verdict(SAME, None, ALL_GENERATION_FAILED)
        with pytest.raises(InvalidInput):
            Verdict("maybe")


class TestChainTester:
    def test_too_short(self):
        P = two_block_chain(8)
        v = identity_test_chain(Trajectory([0, 1, 2], 8), P, 0.3, seed=0)
        assert v.value == DIFFERENT and v.reason == ALL_GENERATION_FAILED and v.component is None

    def test_same_and_different(self):
        eps = 0.3
        P = two_block_chain(8)
        Q = far_pair(P, [list(range(4)), list(range(4, 8))], eps)
        m = trajectory_length(8, eps)
        part = partition_graph(P, eps / 16, 0)
        same = sum(identity_test_chain(simulate(P, 0, m, s), P, eps, s, partition=part).same for s in range(10))
        diff = sum(not identity_test_chain(simulate(Q, 0, m, s), P, eps, s, partition=part).same for s in range(10))
        assert same >= 6 and diff >= 6

    def test_pure_in_seed(self):
        P = two_block_chain(8)
        w = simulate(P, 0, 20_000, 3)
        assert identity_test_chain(w, P, 0.3, 7) == identity_test_chain(w, P, 0.3, 7)

    def test_rejects(self):
        P = two_block_chain(8)
        with pytest.raises(InvalidInput):
            identity_test_chain(Trajectory([0], 4), P, 0.3, 0)
        with pytest.raises(InvalidInput):
            identity_test_chain(Trajectory([0], 8), P, 1.5, 0)
        with pytest.raises(InvalidInput):
            identity_test_chain(Trajectory([0], 8), P, 0.3, 0, partition=partition_graph(HALF, 0.1, 0))

    def test_sizes(self):
        assert component_sample_count(12, 24, 0.3) == math.ceil(4 * 12 * math.log(24) / 0.09)
        assert trajectory_length(24, 0.3) == math.ceil(8 * 24 * math.log(24) ** 2 / 0.3**4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=60), st.integers(1, 20), st.integers(0, 1000))
def test_generation_outcomes_stay_in_support(word, l, seed):
    w = Trajectory(word, 5)
    T = StateSubset.of([0, 1, 2], 5)
    got = generate_iid_samples(w, T, l, seed)
    if got:
        assert len(got) == l
        for o in got.outcomes():
            assert o == ETA or (o[0] in T.members and o[1] in T.members)
