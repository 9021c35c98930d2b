"""Communication neighbourhoods and Voronoi target assignment.

The per-agent functions operate on one agent and return sorted tuples of ids.
``neighbor_matrix`` / ``assignment_matrix`` compute the same sets for every
agent at once and are what the engine uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np

from .core import TargetSet, distance, pairwise_distances


@dataclass(frozen=True)
class NeighborSet:
    owner: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class AssignedTargets:
    owner: int
    targets: tuple[int, ...]

    def __bool__(self) -> bool:
        return bool(self.targets)


def neighbor_set(i: int, positions, d_c: float) -> NeighborSet:
    positions = np.asarray(positions, dtype=float)
    members = tuple(j for j in range(len(positions)) if distance(positions[j], positions[i]) <= d_c)
    return NeighborSet(i, members)


def assign_targets(i: int, positions, targets: TargetSet, neighbors: NeighborSet) -> AssignedTargets:
    """Targets at least as close to agent ``i`` as to any of its neighbours.

    Equidistant targets are kept (non-strict comparison), so one target may be
    assigned to several agents.
    """
    positions = np.asarray(positions, dtype=float)
    owned = []
    for l, mu in enumerate(targets.positions):
        d_i = distance(mu, positions[i])
        if all(d_i <= distance(mu, positions[j]) for j in neighbors.members):
            owned.append(l)
    return AssignedTargets(i, tuple(owned))


def nearest_target(candidates: Iterable[int], targets: TargetSet, x) -> int:
    """Closest candidate to ``x``; ties go to the lowest target id."""
    cands = sorted(candidates)
    if not cands:
        raise ValueError("nearest_target needs at least one candidate")
    best, best_d = cands[0], distance(targets.positions[cands[0]], x)
    for l in cands[1:]:
        d = distance(targets.positions[l], x)
        if d < best_d:
            best, best_d = l, d
    return best


def neighbor_matrix(agent_dist: np.ndarray, d_c: float) -> np.ndarray:
    """``out[i, j]`` is True iff j is in agent i's neighbourhood (self included)."""
    return agent_dist <= d_c


@numba.njit(cache=True)
def _assign_kernel(target_dist, neighbors):
    n, n_t = target_dist.shape
    out = np.zeros((n, n_t), dtype=np.bool_)
    for i in range(n):
        for l in range(n_t):
            d_i = target_dist[i, l]
            ok = True
            for j in range(n):
                if neighbors[i, j] and target_dist[j, l] < d_i:
                    ok = False
                    break
            out[i, l] = ok
    return out


def assignment_matrix(target_dist: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    """``out[i, l]`` is True iff target l is in agent i's assigned set.

    ``target_dist[i, l]`` is the agent-to-target distance, ``neighbors`` the
    boolean matrix from :func:`neighbor_matrix`.
    """
    return _assign_kernel(np.ascontiguousarray(target_dist, dtype=np.float64),
                          np.ascontiguousarray(neighbors, dtype=np.bool_))


def assignment_from_positions(positions: np.ndarray, targets: np.ndarray, d_c: float):
    """Convenience wrapper returning ``(neighbors, assigned)`` matrices."""
    nb = neighbor_matrix(pairwise_distances(positions, positions), d_c)
    return nb, assignment_matrix(pairwise_distances(positions, targets), nb)
