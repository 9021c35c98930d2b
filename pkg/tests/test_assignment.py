import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from cutin_coverage.assignment import (NeighborSet, assign_targets, assignment_from_positions, assignment_matrix,
                                       nearest_target, neighbor_matrix, neighbor_set)
from cutin_coverage.core import TargetSet, pairwise_distances

from conftest import idle_agent_world


def points(min_size=1, max_size=8, lo=-20, hi=20):
    return st.lists(st.tuples(st.integers(lo, hi), st.integers(lo, hi)), min_size=min_size, max_size=max_size,
                    unique=True).map(lambda p: np.array(p, dtype=float))


def test_neighbor_set_examples():
    pos = np.array([[0, 0], [3, 0], [20, 0]], dtype=float)
    assert neighbor_set(0, pos, 10).members == (0, 1)
    assert neighbor_set(1, pos, 10).members == (0, 1)
    assert neighbor_set(2, pos, 10).members == (2,)
    assert neighbor_set(0, [[5.0, 5.0]], 1e-3).members == (0,)


def test_neighbor_set_idle_agent_geometry():
    pos, _, cfg = idle_agent_world()
    assert set(neighbor_set(0, pos, cfg.d_c).members) == {0, 1, 2}


def test_neighbor_boundary_is_closed():
    assert neighbor_set(0, [[0.0, 0.0], [10.0, 0.0]], 10.0).members == (0, 1)


def test_assign_targets_examples():
    pos = np.array([[0, 0], [4, 0]], dtype=float)
    ts = TargetSet([[1, 0], [3, 0]])
    nb = [neighbor_set(i, pos, 10) for i in range(2)]
    assert assign_targets(0, pos, ts, nb[0]).targets == (0,)
    assert assign_targets(1, pos, ts, nb[1]).targets == (1,)
    on_bisector = TargetSet([[2, 0]])
    assert assign_targets(0, pos, on_bisector, nb[0]).targets == (0,)
    assert assign_targets(1, pos, on_bisector, nb[1]).targets == (0,)


def test_assign_targets_idle_agent_empty():
    pos, ts, cfg = idle_agent_world()
    got = assign_targets(0, pos, ts, neighbor_set(0, pos, cfg.d_c))
    assert got.targets == ()
    assert not got


def test_nearest_target_examples():
    ts = TargetSet([[0, 9], [5, 0], [1, 0]])
    assert nearest_target({1, 2}, ts, (0, 0)) == 2
    tie = TargetSet([[9, 9], [1, 0], [-1, 0]])
    assert nearest_target({2, 1}, tie, (0, 0)) == 1
    many = TargetSet(np.arange(16).reshape(8, 2))
    assert nearest_target({7}, many, (100, -3)) == 7
    with pytest.raises(ValueError):
        nearest_target(set(), ts, (0, 0))


def brute_force_owners(agents, targets):
    """Owners of each target by exact integer squared distance."""
    a = agents.astype(np.int64)
    t = targets.astype(np.int64)
    d2 = ((a[:, None, :] - t[None, :, :]) ** 2).sum(axis=2)
    return d2 == d2.min(axis=0, keepdims=True)


@given(points(1, 8), points(1, 10))
def test_oracle_equivalence_full_communication(agents, targets):
    ts = TargetSet(targets)
    expected = brute_force_owners(agents, targets)
    nb, mat = assignment_from_positions(agents, targets, d_c=1e3)
    assert np.array_equal(mat, expected)
    for i in range(len(agents)):
        got = assign_targets(i, agents, ts, neighbor_set(i, agents, 1e3)).targets
        assert got == tuple(np.flatnonzero(expected[i]).tolist())


@given(points(1, 8), points(1, 10), st.integers(1, 30))
def test_matrix_matches_per_agent(agents, targets, d_c):
    ts = TargetSet(targets)
    nb, mat = assignment_from_positions(agents, targets, float(d_c))
    for i in range(len(agents)):
        ns = neighbor_set(i, agents, d_c)
        assert tuple(np.flatnonzero(nb[i]).tolist()) == ns.members
        assert tuple(np.flatnonzero(mat[i]).tolist()) == assign_targets(i, agents, ts, ns).targets


@given(points(1, 8), st.integers(1, 30))
def test_neighbor_symmetry(agents, d_c):
    nb = neighbor_matrix(pairwise_distances(agents, agents), d_c)
    assert np.array_equal(nb, nb.T)
    assert nb.diagonal().all()


@given(points(1, 8), points(1, 10), st.integers(1, 30))
def test_target_near_its_nearest_agent_is_owned(agents, targets, d_c):
    _, mat = assignment_from_positions(agents, targets, float(d_c))
    d = pairwise_distances(agents, targets)
    for l in range(len(targets)):
        if d[:, l].min() <= d_c:
            assert mat[:, l].any()
        owner = int(d[:, l].argmin())
        assert mat[owner, l]


@given(points(1, 8), points(1, 10))
def test_partition_when_distances_distinct(agents, targets):
    d = pairwise_distances(agents, targets)
    for l in range(len(targets)):
        assume(len(np.unique(d[:, l])) == len(agents))
    _, mat = assignment_from_positions(agents, targets, 1e3)
    assert np.all(mat.sum(axis=0) == 1)


def test_assignment_matrix_accepts_non_contiguous():
    d = np.array([[1.0, 2.0], [2.0, 1.0]]).T
    nb = np.ones((2, 2), dtype=bool)
    assert assignment_matrix(d, nb).tolist() == [[True, False], [False, True]]
    assert isinstance(NeighborSet(0, (0,)).members, tuple)
