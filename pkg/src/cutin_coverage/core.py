"""Shared domain types and geometric primitives.

Positions are plain numpy arrays: a single point is shape ``(2,)``, a set of
points is ``(n, 2)``. Agent and target ids are 0-based row indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import IntEnum
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration value. ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CoverageMark(IntEnum):
    """Per-target coverage memory entry. NULL means "never reported"."""

    NULL = -1
    UNCOVERED = 0
    COVERED = 1

    @classmethod
    def parse(cls, text: str) -> "CoverageMark":
        return cls[text.upper()]


def _finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ConfigError(name, f"must be finite, got {v!r}")


@dataclass(frozen=True)
class Region:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        _finite("region", self.x_min, self.x_max, self.y_min, self.y_max)
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError("region", "requires x_min < x_max and y_min < y_max")

    @classmethod
    def centered(cls, width: float, height: float) -> "Region":
        return cls(-width / 2, width / 2, -height / 2, height / 2)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return (
            (p[..., 0] >= self.x_min) & (p[..., 0] <= self.x_max)
            & (p[..., 1] >= self.y_min) & (p[..., 1] <= self.y_max)
        )

    def clamp(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        lo = np.array([self.x_min, self.y_min])
        hi = np.array([self.x_max, self.y_max])
        return np.minimum(np.maximum(p, lo), hi)


@dataclass(frozen=True)
class SensorFootprint:
    """Axis-aligned rectangle centred on the agent."""

    width: float = 1.0
    height: float = 1.0

    def __post_init__(self):
        _finite("footprint", self.width, self.height)
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("footprint", "width and height must be > 0")

    @property
    def half_extent(self) -> float:
        return max(self.width, self.height) / 2


@dataclass(frozen=True)
class WorldConfig:
    """Physics and protocol parameters for one world.

    ``k_gain`` defaults to ``v_max`` (1/s), so an agent moves at full speed
    until it is within 1 m of its reference.
    """

    region: Region
    n_agents: int
    n_targets: int
    dt: float = 0.02
    v_max: float = 5.0
    k_gain: Optional[float] = None
    footprint: SensorFootprint = field(default_factory=SensorFootprint)
    d_c: float = 10.0
    d_k: float = 0.55
    K_d: float = 800.0
    K_s: float = 0.35
    collision_distance: float = 0.3
    t_last: float = 10.0

    def __post_init__(self):
        if self.k_gain is None:
            object.__setattr__(self, "k_gain", self.v_max)
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                _finite(f.name, v)
        if self.n_agents < 1:
            raise ConfigError("n_agents", "must be >= 1")
        if self.n_targets < 1:
            raise ConfigError("n_targets", "must be >= 1")
        for name in ("dt", "v_max", "k_gain", "d_c", "d_k", "t_last"):
            if getattr(self, name) <= 0:
                raise ConfigError(name, "must be > 0")
        if self.K_d < 0:
            raise ConfigError("K_d", "must be >= 0")
        if not (0 < self.K_s <= 1):
            raise ConfigError("K_s", "must lie in (0, 1]")
        if self.collision_distance < 0:
            raise ConfigError("collision_distance", "must be >= 0")
        if not self.collision_distance < self.d_k:
            raise ConfigError("collision_distance", "must be smaller than d_k")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_last / self.dt))


@dataclass
class AgentState:
    id: int
    pos: np.ndarray
    memory: np.ndarray
    reference: Optional[int] = None

    @classmethod
    def fresh(cls, id: int, pos, n_targets: int) -> "AgentState":
        return cls(id, np.asarray(pos, dtype=float).copy(),
                   np.full(n_targets, CoverageMark.NULL, dtype=np.int8))


@dataclass(frozen=True, eq=False)
class TargetSet:
    """Target positions; every target carries unit importance."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float).reshape(-1, 2)
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)
        if not np.all(np.isfinite(p)):
            raise ConfigError("targets", "positions must be finite")
        if len(np.unique(p, axis=0)) != len(p):
            raise ConfigError("targets", "positions must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.positions)

    def __eq__(self, other) -> bool:
        return isinstance(other, TargetSet) and np.array_equal(self.positions, other.positions)

    def check_in(self, region: Region) -> None:
        bad = np.flatnonzero(~region.contains(self.positions))
        if bad.size:
            raise ConfigError("targets", f"target {int(bad[0])} lies outside the region")


def distance(a, b) -> float:
    dx = float(a[0]) - float(b[0])
    dy = float(a[1]) - float(b[1])
    return math.sqrt(dx * dx + dy * dy)


def covers(agent_pos, target_pos, footprint: SensorFootprint) -> bool:
    # closed boundary: a target exactly on the edge counts
    return (abs(float(target_pos[0]) - float(agent_pos[0])) <= footprint.width / 2
            and abs(float(target_pos[1]) - float(agent_pos[1])) <= footprint.height / 2)


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j] = distance(a[i], b[j])``, same rounding as :func:`distance`."""
    dx = a[:, None, 0] - b[None, :, 0]
    dy = a[:, None, 1] - b[None, :, 1]
    return np.sqrt(dx * dx + dy * dy)


def coverage_matrix(agents: np.ndarray, targets: np.ndarray, footprint: SensorFootprint) -> np.ndarray:
    """``out[i, l]`` is True iff agent i's footprint contains target l."""
    dx = np.abs(targets[None, :, 0] - agents[:, None, 0])
    dy = np.abs(targets[None, :, 1] - agents[:, None, 1])
    return (dx <= footprint.width / 2) & (dy <= footprint.height / 2)
