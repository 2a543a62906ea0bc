import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from epcluster.exceptions import ConfigError, DomainError
from epcluster.sampling import (
    SyntheticUniverse,
    UniverseOracle,
    cluster_sampled,
    estimate_once,
    refine_accumulate,
    refine_neighbor_expansion,
    run_report,
)

PLANTED = {"kind": "planted", "dim": 2, "size": 1000, "seed": 3, "max_sample": 100, "planted": 9, "radius": 0.5}


def small_universe(seed, n=40, m=12):
    rng = np.random.default_rng(seed)
    return SyntheticUniverse(rng.integers(0, 6, size=(n, 2)).astype(float), max_sample=m)


class TestOracle:
    def test_sample_contains_required(self):
        u = small_universe(0)
        rng = np.random.default_rng(0)
        for x in range(u.size):
            z = u.sample(rng, x)
            assert x in z and len(z) == 12 and len(set(z.tolist())) == 12

    def test_sample_capped_by_size(self):
        u = SyntheticUniverse(np.zeros((3, 1)), max_sample=10)
        assert u.sample(np.random.default_rng(0), 1).tolist() == [0, 1, 2]

    def test_custom_sampler_checked(self):
        bad = UniverseOracle(lambda x, ids: np.zeros(len(ids)), 5, 2, sampler=lambda rng, x, m: [0, 1, 2])
        with pytest.raises(DomainError):
            bad.sample(np.random.default_rng(0), 0)

    def test_spec_errors(self):
        with pytest.raises(ConfigError):
            SyntheticUniverse.from_spec({"kind": "torus", "size": 4})
        with pytest.raises(ConfigError):
            SyntheticUniverse.from_spec({"kind": "grid"})

    def test_grid_layout(self):
        u = SyntheticUniverse.from_spec({"kind": "grid", "dim": 2, "size": 5})
        assert u.points.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1]]

    def test_planted_cluster(self):
        u = SyntheticUniverse.from_spec(PLANTED)
        members, radius = u.true_k_complete(0, 10)
        assert members == frozenset(range(10)) and radius <= 0.5


class TestEstimate:
    def test_whole_universe_in_one_sample(self):
        u = small_universe(1, n=12, m=12)
        est = estimate_once(u, 3, 4, p=1, rng=0)
        truth = oracles.k_complete(u.distance_matrix(np.arange(12)), 3, 4)
        assert est.members == truth[0] and est.radius == truth[1]

    def test_sample_bound_below_k(self):
        with pytest.raises(ConfigError):
            estimate_once(small_universe(0, m=3), 0, 4)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 6), st.integers(1, 5))
    def test_equals_direct_answer_on_union(self, seed, k, p):
        u = small_universe(seed)
        x = seed % u.size
        est = estimate_once(u, x, k, p=p, rng=seed, keep_samples=True)
        union = set().union(*est.samples)
        d = u.distance_matrix(np.arange(u.size))
        expect = oracles.k_complete(d, x, k, within=union)
        assert est.members == expect[0] and est.radius == expect[1]
        assert est.support == frozenset(union)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 6))
    def test_refinements_stay_sound_and_shrink(self, seed, k):
        u = small_universe(seed)
        d = u.distance_matrix(np.arange(u.size))
        x = seed % u.size
        est = estimate_once(u, x, k, p=2, rng=seed, keep_samples=True)
        for i in range(3):
            if i % 2:
                est = refine_neighbor_expansion(u, est, k, rng=seed + i)
            else:
                est = refine_accumulate(u, est, 2, k, rng=seed + i)
            expect = oracles.k_complete(d, x, k, within=est.support)
            assert est.members == expect[0]
            assert est.support >= set().union(*est.samples)
        assert all(b <= a for a, b in zip(est.history, est.history[1:]))

    def test_accumulate_zero_is_identity(self):
        u = small_universe(2)
        est = estimate_once(u, 0, 3, rng=0)
        assert refine_accumulate(u, est, 0, 3) is est


class TestReport:
    def test_planted_recall(self):
        u = SyntheticUniverse.from_spec(PLANTED)
        report = run_report(u, 0, 10, p=8, rounds=8, seed=1)
        assert report["truth"]["members"] == list(range(10))
        assert report["rounds"][-1]["recall"] == 1.0
        radii = [r["radius"] for r in report["rounds"]]
        assert radii == sorted(radii, reverse=True)

    def test_deterministic(self):
        u = SyntheticUniverse.from_spec(PLANTED)
        assert run_report(u, 0, 5, seed=7) == run_report(u, 0, 5, seed=7)
        assert run_report(u, 0, 5, strategy="expand", seed=7) == run_report(u, 0, 5, strategy="expand", seed=7)

    def test_bad_arguments(self):
        u = small_universe(0)
        with pytest.raises(ConfigError):
            run_report(u, 0, 2, strategy="greedy")
        with pytest.raises(ConfigError):
            run_report(u, 99, 2)


class TestClusterSampled:
    def test_full_universe(self):
        u = small_universe(4, n=20, m=20)
        result = cluster_sampled(u, [np.arange(20)], 3)
        assert result.ids.tolist() == list(range(20))
        assert result.merge_tree.n == 20

    def test_blobs_separate(self):
        u = SyntheticUniverse.from_spec({"kind": "blobs", "size": 60, "centers": 2, "seed": 0, "max_sample": 30})
        rng = np.random.default_rng(0)
        samples = [u.sample(rng, x) for x in range(0, 60, 6)]
        result = cluster_sampled(u, samples, 4)
        assert result.excision is not None and result.excision.passed
        labels = result.merge_tree.labels_at(5.0)
        truth = u.labels[result.ids]
        for a in range(len(labels)):
            for b in range(len(labels)):
                if labels[a] == labels[b]:
                    assert truth[a] == truth[b]
