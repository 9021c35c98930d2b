"""Scenario definitions, random grid targets and the switching-pattern layouts."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .core import ConfigError, Region, SensorFootprint, TargetSet, WorldConfig, pairwise_distances


@dataclass(frozen=True)
class FixedDuration:
    seconds: float

    def __post_init__(self):
        if not self.seconds > 0:
            raise ConfigError("phase_trigger.duration", "must be > 0")


@dataclass(frozen=True)
class OnFullCoverage:
    """Advance once full coverage has held for ``settle`` seconds.

    A phase that never settles ends after ``WorldConfig.t_last``.
    """

    settle: float = 2.0

    def __post_init__(self):
        if self.settle < 0:
            raise ConfigError("phase_trigger.settle", "must be >= 0")


PhaseTrigger = Union[FixedDuration, OnFullCoverage]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A world plus its targets and initial deployment.

    ``target_phases`` / ``initial_agent_positions`` may be ``None``, meaning
    they are drawn per seed (random grid targets, uniform agents); see
    :meth:`realize`.
    """

    config: WorldConfig
    initial_agent_positions: Optional[np.ndarray] = None
    target_phases: Optional[tuple[TargetSet, ...]] = None
    phase_trigger: PhaseTrigger = None
    grid: tuple[int, int] = (20, 20)
    name: str = ""

    def __post_init__(self):
        cfg = self.config
        if self.phase_trigger is None:
            object.__setattr__(self, "phase_trigger", FixedDuration(cfg.t_last))
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise ConfigError("targets.grid", "needs at least one cell per axis")
        if self.initial_agent_positions is not None:
            p = np.array(self.initial_agent_positions, dtype=float).reshape(-1, 2)
            p.setflags(write=False)
            object.__setattr__(self, "initial_agent_positions", p)
            if len(p) != cfg.n_agents:
                raise ConfigError("agents.positions", f"expected {cfg.n_agents} positions, got {len(p)}")
            if not np.all(np.isfinite(p)) or not np.all(cfg.region.contains(p)):
                raise ConfigError("agents.positions", "every agent must start inside the region")
        if self.target_phases is not None:
            phases = tuple(t if isinstance(t, TargetSet) else TargetSet(t) for t in self.target_phases)
            object.__setattr__(self, "target_phases", phases)
            if not phases:
                raise ConfigError("targets.phases", "needs at least one phase")
            for k, ts in enumerate(phases):
                if len(ts) != cfg.n_targets:
                    raise ConfigError("targets.phases", f"phase {k} has {len(ts)} targets, expected {cfg.n_targets}")
                try:
                    ts.check_in(cfg.region)
                except ConfigError as e:
                    raise ConfigError("targets.phases", f"phase {k}: {e}") from None
        elif cfg.n_targets > self.grid[0] * self.grid[1]:
            raise ConfigError("n_targets", f"{cfg.n_targets} targets do not fit a {self.grid[0]}x{self.grid[1]} grid")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is b
            return np.array_equal(a, b)

        return (self.config == other.config and same(self.initial_agent_positions, other.initial_agent_positions)
                and self.target_phases == other.target_phases and self.phase_trigger == other.phase_trigger
                and self.grid == other.grid and self.name == other.name)

    @property
    def n_phases(self) -> int:
        return 1 if self.target_phases is None else len(self.target_phases)

    @property
    def is_realized(self) -> bool:
        return self.target_phases is not None and self.initial_agent_positions is not None

    def realize(self, seed: int) -> "Scenario":
        """Fill any per-seed parts. Targets are drawn before agents."""
        if self.is_realized:
            return self
        rng = np.random.default_rng(seed)
        phases = self.target_phases
        if phases is None:
            phases = (random_grid_targets(self.config.region, self.config.n_targets, rng, self.grid),)
        agents = self.initial_agent_positions
        if agents is None:
            agents = random_agent_positions(self.config.region, self.config.n_agents,
                                            self.config.collision_distance, rng)
        return replace(self, target_phases=phases, initial_agent_positions=agents)

    def with_duration(self, seconds: float) -> "Scenario":
        cfg = replace(self.config, t_last=seconds)
        trig = self.phase_trigger
        if isinstance(trig, FixedDuration):
            trig = FixedDuration(seconds)
        return replace(self, config=cfg, phase_trigger=trig)


def grid_cell_centers(region: Region, grid: tuple[int, int] = (20, 20)) -> np.ndarray:
    """Centres of a ``nx x ny`` grid; cell ``k`` is column ``k % nx``, row ``k // nx``."""
    nx, ny = grid
    cw, ch = region.width / nx, region.height / ny
    k = np.arange(nx * ny)
    return np.column_stack([region.x_min + (k % nx + 0.5) * cw, region.y_min + (k // nx + 0.5) * ch])


def random_grid_targets(region: Region, n_targets: int, rng: np.random.Generator,
                        grid: tuple[int, int] = (20, 20)) -> TargetSet:
    cells = grid[0] * grid[1]
    if n_targets > cells:
        raise ConfigError("n_targets", f"{n_targets} targets do not fit {cells} grid cells")
    chosen = rng.choice(cells, size=n_targets, replace=False)
    return TargetSet(grid_cell_centers(region, grid)[chosen])


def random_agent_positions(region: Region, n_agents: int, min_separation: float,
                           rng: np.random.Generator, max_draws: int = 1_000_000) -> np.ndarray:
    """Uniform positions with pairwise distance >= ``min_separation`` (rejection sampling)."""
    pts = np.empty((n_agents, 2))
    k = draws = 0
    lo = np.array([region.x_min, region.y_min])
    hi = np.array([region.x_max, region.y_max])
    while k < n_agents:
        draws += 1
        if draws > max_draws:
            raise RuntimeError("could not place agents with the requested separation")
        p = rng.uniform(lo, hi)
        if k and pairwise_distances(p[None], pts[:k]).min() < min_separation:
            continue
        pts[k] = p
        k += 1
    return pts


def generate_random_scenario(config: WorldConfig, seed: int, grid: tuple[int, int] = (20, 20)) -> Scenario:
    return Scenario(config, grid=grid, name="random_grid").realize(seed)


def make_switching_scenario(config: WorldConfig, phase_patterns: Sequence, initial_positions=None,
                            settle: float = 2.0, name: str = "switching") -> Scenario:
    """Sequential target patterns, each advanced after full coverage settles."""
    if initial_positions is None:
        initial_positions = parked_line(config.region, config.n_agents)
    return Scenario(config, initial_agent_positions=initial_positions,
                    target_phases=tuple(TargetSet(p) for p in phase_patterns),
                    phase_trigger=OnFullCoverage(settle), name=name)


# -- configurations and layouts ---------------------------------------------

def table1_config(**overrides) -> WorldConfig:
    kw = dict(region=Region(-10.0, 10.0, -10.0, 10.0), n_agents=100, n_targets=100, dt=0.02, v_max=5.0,
              footprint=SensorFootprint(1.0, 1.0), d_c=10.0, d_k=0.55, K_d=800.0, K_s=0.35,
              collision_distance=0.3, t_last=10.0)
    kw.update(overrides)
    return WorldConfig(**kw)


def table2_config(**overrides) -> WorldConfig:
    kw = dict(region=Region(-5.0, 5.0, -2.5, 2.5), n_agents=8, n_targets=8, dt=0.02, v_max=1.5,
              footprint=SensorFootprint(1.0, 1.0), d_c=5.0, d_k=1.0, K_d=50.0, K_s=0.35,
              collision_distance=0.3, t_last=30.0)
    kw.update(overrides)
    return WorldConfig(**kw)


def parked_line(region: Region, n: int, margin: float = 0.5) -> np.ndarray:
    """Agents evenly spaced along the bottom edge of the region."""
    xs = np.linspace(region.x_min + margin, region.x_max - margin, n)
    return np.column_stack([xs, np.full(n, region.y_min + margin)])


def switching_patterns(n: int = 8) -> dict[str, np.ndarray]:
    """Dot, cross, triangle and square layouts for the 10 x 5 m arena.

    Neighbouring targets are at least 1.2 m apart so agents parked on them sit
    outside each other's 1.0 m repulsion radius, and agents parked on one layout
    never fully cover another.
    """
    if n != 8:
        raise ValueError("layouts are defined for 8 targets")
    # ring turned by 10 deg: no mirror axis, so agents leaving it never tie on a target
    ang = 2 * math.pi * np.arange(n) / n + math.radians(10.0)
    dot = np.round(np.column_stack([1.6 * np.cos(ang), 1.6 * np.sin(ang)]), 6)
    cross = np.array([[-3.75, 0.0], [-2.5, 0.0], [-1.25, 0.0], [1.25, 0.0], [2.5, 0.0], [3.75, 0.0],
                      [0.0, 1.25], [0.0, -1.25]])
    # vertices, slant midpoints and three base points
    triangle = np.array([[0.0, 2.0], [-1.6, 0.0], [-3.2, -2.0], [-1.6, -2.0], [0.0, -2.0], [1.6, -2.0],
                         [3.2, -2.0], [1.6, 0.0]])
    # corners and edge midpoints
    square = np.array([[-1.8, 1.8], [-1.8, 0.0], [-1.8, -1.8], [0.0, -1.8], [1.8, -1.8], [1.8, 0.0],
                       [1.8, 1.8], [0.0, 1.8]])
    return {"dot": dot, "cross": cross, "triangle": triangle, "square": square}


def switching_scenario(cycles: int = 3, config: Optional[WorldConfig] = None) -> Scenario:
    """Dot -> cross -> triangle -> square, repeated ``cycles`` times."""
    config = config or table2_config()
    pats = switching_patterns(config.n_targets)
    order = ["dot", "cross", "triangle", "square"] * cycles
    return make_switching_scenario(config, [pats[k] for k in order], name="table2_switching")
