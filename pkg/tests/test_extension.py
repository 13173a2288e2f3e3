import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envyfree import extension as ext
from envyfree.core import ContractError, RandomizedAssignment, Sample

import oracles


def test_nearest_neighbor_simple():
    S = Sample.from_features([[0.0], [1.0]])
    assert ext.nearest_neighbor(S, [0.4]) == 0


def test_nearest_neighbor_tie_goes_to_smallest_index():
    S = Sample.from_features([[0.0], [1.0]])
    assert ext.nearest_neighbor(S, [0.5]) == 0


def test_extension_agrees_on_sample():
    S = Sample.from_features([[0.0, 0.0], [1.0, 1.0], [0.2, 0.9]])
    base = RandomizedAssignment(S, [[1, 0], [0.5, 0.5], [0, 1]])
    h = ext.extend(base)
    assert np.array_equal(h.distributions(S), base.rows)


def test_extension_outside_sample_copies_neighbor():
    S = Sample.from_features([[0.0], [1.0]])
    base = RandomizedAssignment(S, [[1, 0], [0, 1]])
    h = ext.extend(base)
    q = Sample([10, 11], [[0.1], [0.95]])
    assert h.distributions(q).tolist() == [[1, 0], [0, 1]]


def test_unknown_metric():
    with pytest.raises(ContractError):
        ext.Metric("cosine")


def test_linf_metric():
    assert ext.LINF([0, 0], [0.3, -0.5]) == 0.5
    assert ext.EUCLIDEAN([0, 0], [3, 4]) == 5.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_net_radius_matches_double_loop(n, t, q, seed):
    rng = np.random.default_rng(seed)
    S, T = rng.random((n, q)), rng.random((t, q))
    got = ext.net_radius(Sample.from_features(S), Sample.from_features(T))
    assert got == pytest.approx(oracles.net_radius_loops(S, T), abs=1e-12)
    got_inf = ext.net_radius(Sample.from_features(S), Sample.from_features(T), ext.LINF)
    assert got_inf == pytest.approx(oracles.net_radius_loops(S, T, np.inf), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_nearest_indices_match_loops(n, seed):
    rng = np.random.default_rng(seed)
    S = rng.random((n, 2))
    Q = rng.random((15, 2))
    idx = ext.nearest_indices(Sample.from_features(S), Sample.from_features(Q))
    assert idx.tolist() == [oracles.nn_index_loops(S, x) for x in Q]


def test_net_radius_requires_points():
    with pytest.raises(ContractError):
        ext.net_radius(Sample.from_features(np.zeros((0, 2))), Sample.from_features([[0.0, 0.0]]))


def test_sample_size_examples():
    assert ext.covering_sample_size(0.5, 1, 1, 1, 1, 0.1) == 12
    assert ext.covering_sample_size(0.1, 0.5, 1, 1, 2, 0.1) == 2119


def test_sample_size_hand_computed():
    # s = 1/(2*1*1) = 0.5 -> 2 cells; ceil((2/0.5) ln(2/0.1)) = ceil(11.98...) = 12
    assert ext.covering_sample_size(0.5, 1, 1, 1, 1, 0.1) == int(np.ceil(4 * np.log(20)))


def test_sample_size_monotone_in_alpha():
    a = ext.covering_sample_size(0.2, 0.5, 1, 1, 2, 0.1)
    b = ext.covering_sample_size(0.1, 0.5, 1, 1, 2, 0.1)
    assert b > a


def test_sample_size_overflow():
    with pytest.raises(ext.SampleSizeTooLarge):
        ext.covering_sample_size(0.1, 1e-3, 1, 1, 10, 0.1)


@pytest.mark.parametrize("bad", [(0, 1, 1, 1, 1, 0.1), (0.5, 1, 1, 1, 1, 1.0), (0.5, 1, 1, 1, 0, 0.1)])
def test_sample_size_rejects_bad_arguments(bad):
    with pytest.raises(ContractError):
        ext.covering_sample_size(*bad)
