import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from epcluster.epspace import INF, EpSpace, coproduct
from epcluster.exceptions import DomainError, EnumerationLimitError, InsufficientPointsError
from epcluster.neighborhoods import (
    Neighborhood,
    NeighborhoodSystem,
    ball,
    complete_k_bounded,
    complete_system,
    fibres,
    is_complete,
    is_nearest_neighbor_set,
    k_bounded_maximal,
    k_complete,
    k_complete_system,
    make_neighborhood,
    merge_k_complete,
    nn_sequence,
    singleton_system,
)
from properties import merge_failures, nn_property_failures


def line(*coords):
    c = np.asarray(coords, dtype=float)
    return EpSpace(np.abs(c[:, None] - c[None, :]))


LINE = line(0, 1, 2, 5)


class TestBall:
    def test_line(self):
        assert ball(LINE, 0, 1) == {0, 1}

    def test_zero_radius_keeps_zero_distance_partners(self):
        space = line(0, 0, 3)
        assert ball(space, 0, 0) == {0, 1}

    def test_infinite_radius(self):
        space = coproduct([LINE, line(0)])
        assert ball(space, 0, INF) == {0, 1, 2, 3, 4}

    def test_tolerance(self):
        assert ball(line(0, 1 + 1e-12), 0, 1) == {0, 1}

    def test_within_must_contain_base(self):
        with pytest.raises(DomainError):
            ball(LINE, 0, 1, within=[1, 2])


class TestCompleteness:
    def test_complete(self):
        assert is_complete(LINE, make_neighborhood(LINE, 0, {1}))

    def test_gap_is_not_complete(self):
        nb = make_neighborhood(LINE, 0, {2})
        assert not is_complete(LINE, nb)
        assert not is_nearest_neighbor_set(LINE, nb)

    def test_singleton(self):
        nb = make_neighborhood(LINE, 2, set())
        assert nb.radius == 0 and is_complete(LINE, nb)

    def test_nearest_neighbor_examples(self):
        assert is_nearest_neighbor_set(LINE, make_neighborhood(LINE, 0, {1}))
        assert is_nearest_neighbor_set(LINE, make_neighborhood(LINE, 0, {1, 2, 3}))

    def test_infinite_member_rejected(self):
        space = coproduct([line(0), line(0)])
        with pytest.raises(DomainError):
            make_neighborhood(space, 0, {1})


class TestKComplete:
    def test_line(self):
        nb = k_complete(LINE, 0, 2)
        assert nb.members == {0, 1} and nb.radius == 1

    def test_ties_overshoot(self):
        nb = k_complete(line(-1, 0, 1, 5), 1, 2)
        assert nb.members == {0, 1, 2} and nb.radius == 1

    def test_k_one(self):
        space = line(0, 0, 4)
        assert k_complete(space, 0, 1).members == {0, 1}
        assert k_complete(space, 2, 1).members == {2}

    def test_insufficient(self):
        with pytest.raises(InsufficientPointsError):
            k_complete(coproduct([LINE, line(0)]), 4, 2)

    def test_fibres_group_ties(self):
        values = [v for v, _ in fibres(line(-1, 0, 1, 5), 1)]
        assert values == [0, 1, 5]

    def test_independent_of_enumeration_order(self):
        rng = np.random.default_rng(3)
        d = oracles.random_space(rng, 12)
        perm = rng.permutation(12)
        inv = np.argsort(perm)
        shuffled = EpSpace(d[np.ix_(perm, perm)])
        for x in range(12):
            for k in (1, 2, 4):
                try:
                    a = k_complete(EpSpace(d), x, k)
                except InsufficientPointsError:
                    continue
                b = k_complete(shuffled, int(inv[x]), k)
                assert {int(perm[m]) for m in b.members} == a.members


class TestNNSequence:
    def test_line(self):
        assert nn_sequence(LINE, 0, 3) == ([1, 2, 3], [1, 2, 5])

    def test_index_tie_break(self):
        assert nn_sequence(line(-1, 0, 1), 1, 2) == ([0, 2], [1, 1])

    def test_all_others(self):
        pts, _ = nn_sequence(LINE, 3, 3)
        assert pts == [2, 1, 0]


class TestKBounded:
    def test_small_ball_is_only_maximal(self):
        out = k_bounded_maximal(LINE, 0, 3, 2)
        assert [nb.members for nb in out] == [{0, 1, 2}]

    def test_subsets_of_size_k_plus_one(self):
        out = k_bounded_maximal(LINE, 0, 2, 5)
        assert [nb.sorted_members() for nb in out] == [[0, 1, 2], [0, 1, 3], [0, 2, 3]]

    def test_isolated_point(self):
        out = k_bounded_maximal(LINE, 3, 2, 1)
        assert [nb.members for nb in out] == [{3}]

    def test_cap(self):
        space = line(*range(12))
        with pytest.raises(EnumerationLimitError) as info:
            k_bounded_maximal(space, 0, 3, 20, cap=10)
        assert len(info.value.partial) == 10

    def test_requires_finite_s_and_positive_k(self):
        with pytest.raises(DomainError):
            k_bounded_maximal(LINE, 0, 0, 1)
        with pytest.raises(DomainError):
            k_bounded_maximal(LINE, 0, 1, INF)


class TestCompleteKBounded:
    SPACE = line(0, 0.1, 0.2, 9, 10)

    def test_dense_point(self):
        assert complete_k_bounded(self.SPACE, 0, 3, 1).members == {0, 1, 2}

    def test_outlier(self):
        nb = complete_k_bounded(self.SPACE, 3, 3, 1)
        assert nb.members == {3, 4}
        assert is_complete(self.SPACE, nb)

    def test_radius_inside_bound(self):
        assert complete_k_bounded(LINE, 0, 2, 10) == k_complete(LINE, 0, 2)

    def test_needs_k_above_one(self):
        with pytest.raises(DomainError):
            complete_k_bounded(LINE, 0, 1, 1)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.floats(0, 6))
    def test_is_intersection(self, seed, k, S):
        d = oracles.random_space(np.random.default_rng(seed), 8)
        space = EpSpace(d)
        for x in range(8):
            nb = complete_k_bounded(space, x, k, S)
            kc = oracles.k_complete(d, x, k)
            s_ball = oracles.ball(d, x, S)
            expect = s_ball if kc is None else kc[0] & s_ball
            assert nb.members == expect
            assert is_complete(space, nb)


class TestMerge:
    def test_two_samples_on_line(self):
        assert merge_k_complete(LINE, 0, [{0, 1, 3}, {0, 2, 3}], 3).members == {0, 1, 2}

    def test_single_sample(self):
        assert merge_k_complete(LINE, 0, [{0, 2, 3}], 2) == k_complete(LINE, 0, 2, within={0, 2, 3})

    def test_union_of_exactly_k(self):
        assert merge_k_complete(LINE, 0, [{0, 1}, {0, 3}], 3).members == {0, 1, 3}

    def test_too_few(self):
        with pytest.raises(InsufficientPointsError):
            merge_k_complete(LINE, 0, [{0, 1}], 3)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 40))
    def test_equals_direct_on_union(self, seed, n):
        rng = np.random.default_rng(seed)
        assert merge_failures(oracles.random_space(rng, n), rng) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_nearest_neighbor_properties(seed, n):
    rng = np.random.default_rng(seed)
    assert nn_property_failures(oracles.random_space(rng, n), rng) == []


class TestSystems:
    def test_k_complete_system_is_knn(self):
        system = k_complete_system(LINE, 2)
        assert [nb.sorted_members() for nb in system] == [[0, 1], [0, 1, 2], [1, 2], [2, 3]]

    def test_complete_system_radii(self):
        system = complete_system(LINE, [1, 0, 0, 3])
        assert [nb.sorted_members() for nb in system] == [[0, 1], [1], [2], [2, 3]]

    def test_singletons_have_no_rays(self):
        assert list(singleton_system(LINE).rays()) == []

    def test_every_point_needs_a_neighborhood(self):
        with pytest.raises(DomainError):
            NeighborhoodSystem(LINE, [[Neighborhood(0, {0}, 0.0)]])

    def test_json_round_trip(self):
        system = k_complete_system(LINE, 2)
        back = NeighborhoodSystem.from_json(LINE, system.to_json())
        assert [nb.members for nb in back] == [nb.members for nb in system]
        assert system.to_json()[0] == {"base": 0, "members": [0, 1], "radius": 1.0}
