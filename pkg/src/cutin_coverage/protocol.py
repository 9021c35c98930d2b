"""Cut-in coverage protocol and the Lloyd baseline.

Each round an agent hears coverage reports from its neighbours about the
targets those neighbours own, folds them into a tri-valued memory, and picks a
reference target in three tiers: nearest owned target, else nearest target
remembered as uncovered, else nearest target it has never heard about.
Lloyd stops after the first tier.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Optional, Sequence

import numpy as np

from .assignment import AssignedTargets, nearest_target
from .core import CoverageMark, SensorFootprint, TargetSet, coverage_matrix, covers

LLOYD = "lloyd"
PROPOSED = "proposed"
ALGORITHMS = (LLOYD, PROPOSED)


class Tier(IntEnum):
    ASSIGNED = 0
    UNCOVERED_MEMORY = 1
    UNKNOWN = 2
    HOLD = 3

    @property
    def label(self) -> str:
        return _TIER_LABELS[self]


_TIER_LABELS = {
    Tier.ASSIGNED: "assigned",
    Tier.UNCOVERED_MEMORY: "uncovered",
    Tier.UNKNOWN: "unknown",
    Tier.HOLD: "hold",
}


@dataclass(frozen=True)
class CoverageReport:
    """Coverage bits a sender publishes for the targets it owns.

    Targets absent from ``entries`` are null for the receiver.
    """

    sender: int
    entries: Mapping[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ReferenceChoice:
    tier: Tier
    target: Optional[int] = None

    def __post_init__(self):
        if (self.tier == Tier.HOLD) != (self.target is None):
            raise ValueError("HOLD carries no target; every other tier needs one")


HOLD = ReferenceChoice(Tier.HOLD)


def evaluate_coverage(sender: int, assigned: AssignedTargets, neighbor_positions: Mapping[int, np.ndarray],
                      targets: TargetSet, footprint: SensorFootprint) -> CoverageReport:
    """Report for each owned target whether any agent the sender knows covers it."""
    entries = {}
    for l in assigned.targets:
        mu = targets.positions[l]
        entries[l] = int(any(covers(x, mu, footprint) for x in neighbor_positions.values()))
    return CoverageReport(sender, entries)


def update_memory(memory: np.ndarray, reports: Sequence[CoverageReport]) -> np.ndarray:
    new = np.array(memory, dtype=np.int8, copy=True)
    heard: dict[int, int] = {}
    for rep in reports:
        for l, v in rep.entries.items():
            # conflicting same-round reports: covered wins
            heard[l] = max(heard.get(l, 0), int(v))
    for l, v in heard.items():
        new[l] = CoverageMark.COVERED if v else CoverageMark.UNCOVERED
    return new


def uncovered_sets(memory: np.ndarray) -> tuple[frozenset, frozenset]:
    """``(V, W)``: targets remembered as uncovered, and targets never heard of."""
    memory = np.asarray(memory)
    V = frozenset(np.flatnonzero(memory == CoverageMark.UNCOVERED).tolist())
    W = frozenset(np.flatnonzero(memory == CoverageMark.NULL).tolist())
    return V, W


def select_reference_proposed(assigned: AssignedTargets, V, W, targets: TargetSet, x) -> ReferenceChoice:
    if assigned.targets:
        return ReferenceChoice(Tier.ASSIGNED, nearest_target(assigned.targets, targets, x))
    if V:
        return ReferenceChoice(Tier.UNCOVERED_MEMORY, nearest_target(V, targets, x))
    if W:
        return ReferenceChoice(Tier.UNKNOWN, nearest_target(W, targets, x))
    return HOLD


def select_reference_lloyd(assigned: AssignedTargets, targets: TargetSet, x) -> ReferenceChoice:
    if assigned.targets:
        return ReferenceChoice(Tier.ASSIGNED, nearest_target(assigned.targets, targets, x))
    return HOLD


def global_coverage(positions, targets: TargetSet, footprint: SensorFootprint,
                    assignments: Sequence[AssignedTargets]) -> tuple[float, float]:
    """Centralised ``(P_cov, P_cov_lower)``. Measurement only."""
    positions = np.asarray([getattr(a, "pos", a) for a in positions], dtype=float).reshape(-1, 2)
    covered = coverage_matrix(positions, targets.positions, footprint).any(axis=0)
    owned = np.zeros(len(targets), dtype=bool)
    for a in assignments:
        owned[list(a.targets)] = True
    n_t = len(targets)
    return covered.sum() / n_t, (covered & owned).sum() / n_t


# -- whole-swarm versions used by the engine -------------------------------

def report_matrix(neighbors: np.ndarray, covered_by: np.ndarray) -> np.ndarray:
    """``out[j, l]``: does any agent in j's neighbourhood cover target l.

    Only entries where j owns l are ever read.
    """
    return (neighbors.astype(np.float64) @ covered_by.astype(np.float64)) > 0


def update_memory_matrix(memory: np.ndarray, neighbors: np.ndarray, assigned: np.ndarray,
                         reports: np.ndarray) -> np.ndarray:
    nb = neighbors.astype(np.float64)
    heard_cov = (nb @ (assigned & reports).astype(np.float64)) > 0
    heard_unc = (nb @ (assigned & ~reports).astype(np.float64)) > 0
    out = np.where(heard_unc, np.int8(CoverageMark.UNCOVERED), memory)
    out = np.where(heard_cov, np.int8(CoverageMark.COVERED), out)
    return out.astype(np.int8)


def _masked_argmin(dist: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, i.e. the lowest target id on ties
    return np.where(mask, dist, np.inf).argmin(axis=1)


def select_references(assigned: np.ndarray, memory: np.ndarray, target_dist: np.ndarray,
                      algorithm: str) -> tuple[np.ndarray, np.ndarray]:
    """Reference target per agent (-1 on hold) and the tier that produced it."""
    n = assigned.shape[0]
    ref = np.full(n, -1, dtype=np.int64)
    tier = np.full(n, Tier.HOLD, dtype=np.int8)
    tiers = [(Tier.ASSIGNED, assigned)]
    if algorithm == PROPOSED:
        tiers += [(Tier.UNCOVERED_MEMORY, memory == CoverageMark.UNCOVERED),
                  (Tier.UNKNOWN, memory == CoverageMark.NULL)]
    elif algorithm != LLOYD:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    pending = np.ones(n, dtype=bool)
    for t, mask in tiers:
        rows = pending & mask.any(axis=1)
        if rows.any():
            ref[rows] = _masked_argmin(target_dist[rows], mask[rows])
            tier[rows] = t
        pending &= ~rows
    return ref, tier


def coverage_rates(covered_by: np.ndarray, assigned: np.ndarray) -> tuple[float, float]:
    n_t = covered_by.shape[1]
    covered = covered_by.any(axis=0)
    owned = assigned.any(axis=0)
    return covered.sum() / n_t, (covered & owned).sum() / n_t
