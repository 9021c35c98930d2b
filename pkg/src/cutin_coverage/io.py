"""Scenario files (TOML) and plot-ready CSV/JSON export.

A scenario file looks like::

    format = "cutin-coverage-scenario/1"
    name = "table1"

    [world]
    n = 100
    n_t = 100
    region = { x_min = -10.0, x_max = 10.0, y_min = -10.0, y_max = 10.0 }
    dt = 0.02
    v_max = 5.0
    k_i = 5.0
    D = [1.0, 1.0]          # sensor footprint width x height
    d_c = 10.0
    d_k = 0.55
    K_d = 800.0
    K_s = 0.35
    collision_distance = 0.3
    t_L = 10.0

    [targets]
    generator = "random_grid"   # or: phases = [[[x, y], ...], ...]
    grid = [20, 20]

    [agents]
    placement = "random"        # or: positions = [[x, y], ...]

    [phase_trigger]
    kind = "fixed_duration"     # or "on_full_coverage" with settle = <s>
    duration = 10.0
"""
from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .core import ConfigError, Region, SensorFootprint, WorldConfig
from .engine import CampaignResult, TrialResult
from .protocol import Tier
from .scenarios import FixedDuration, OnFullCoverage, Scenario

FORMAT = "cutin-coverage-scenario/1"
CSV_SCHEMA_VERSION = 1
TRAJECTORY_COLUMNS = ("t", "agent_id", "x", "y", "ref_target", "tier")
METRICS_COLUMNS = ("t", "p_cov", "p_cov_lower", "min_pairwise_dist")
EMIT_KINDS = ("trajectories", "metrics", "summary")

# file key -> WorldConfig attribute
_WORLD_KEYS = {
    "n": "n_agents", "n_t": "n_targets", "dt": "dt", "v_max": "v_max", "k_i": "k_gain",
    "d_c": "d_c", "d_k": "d_k", "K_d": "K_d", "K_s": "K_s",
    "collision_distance": "collision_distance", "t_L": "t_last",
}


class ScenarioError(ValueError):
    """Malformed or invalid scenario file; ``where`` locates the problem."""

    def __init__(self, path, where: str, message: str):
        self.path = str(path)
        self.where = where
        super().__init__(f"{path}: {where}: {message}")


# -- scenario files ---------------------------------------------------------

def scenario_to_dict(sc: Scenario) -> dict:
    cfg = sc.config
    world = {"n": cfg.n_agents, "n_t": cfg.n_targets,
             "region": {"x_min": cfg.region.x_min, "x_max": cfg.region.x_max,
                        "y_min": cfg.region.y_min, "y_max": cfg.region.y_max}}
    for key, attr in _WORLD_KEYS.items():
        if key not in ("n", "n_t"):
            world[key] = float(getattr(cfg, attr))
    world["D"] = [cfg.footprint.width, cfg.footprint.height]
    if sc.target_phases is None:
        targets = {"generator": "random_grid", "grid": list(sc.grid)}
    else:
        targets = {"phases": [ts.positions.tolist() for ts in sc.target_phases]}
    if sc.initial_agent_positions is None:
        agents = {"placement": "random"}
    else:
        agents = {"positions": sc.initial_agent_positions.tolist()}
    trig = sc.phase_trigger
    if isinstance(trig, FixedDuration):
        trigger = {"kind": "fixed_duration", "duration": float(trig.seconds)}
    else:
        trigger = {"kind": "on_full_coverage", "settle": float(trig.settle)}
    return {"format": FORMAT, "name": sc.name, "world": world, "targets": targets,
            "agents": agents, "phase_trigger": trigger}


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} to a scenario file")


def _toml_table(name: str, table: dict) -> list[str]:
    lines = [f"[{name}]"]
    for k, v in table.items():
        if isinstance(v, dict):
            lines.append(f"{k} = {{ " + ", ".join(f"{a} = {_toml_value(b)}" for a, b in v.items()) + " }")
        elif isinstance(v, list) and v and isinstance(v[0], list):
            # one point (or one phase) per line
            lines.append(f"{k} = [")
            lines += [f"    {_toml_value(x)}," for x in v]
            lines.append("]")
        else:
            lines.append(f"{k} = {_toml_value(v)}")
    return lines


def dumps_scenario(sc: Scenario) -> str:
    d = scenario_to_dict(sc)
    lines = [f"format = {_toml_value(d['format'])}", f"name = {_toml_value(d['name'])}"]
    for section in ("world", "targets", "agents", "phase_trigger"):
        lines += [""] + _toml_table(section, d[section])
    return "\n".join(lines) + "\n"


def write_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(sc))


def _take(table: dict, key: str, where: str, path, kind=float):
    if key not in table:
        raise ScenarioError(path, f"{where}.{key}", "missing")
    v = table.pop(key)
    if kind is float and isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if kind is int and isinstance(v, int) and not isinstance(v, bool):
        return v
    if kind not in (float, int) and isinstance(v, kind):
        return v
    raise ScenarioError(path, f"{where}.{key}", f"expected {kind.__name__}, got {v!r}")


def _no_extra(table: dict, where: str, path) -> None:
    if table:
        key = sorted(table)[0]
        raise ScenarioError(path, f"{where}.{key}" if where else key, "unknown key")


def _points(v, where: str, path) -> np.ndarray:
    try:
        arr = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(path, where, "expected a list of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ScenarioError(path, where, "expected a list of [x, y] pairs")
    return arr


def scenario_from_dict(data: dict, path="<scenario>") -> Scenario:
    data = json.loads(json.dumps(data))  # private deep copy
    fmt = data.pop("format", None)
    if fmt != FORMAT:
        raise ScenarioError(path, "format", f"expected {FORMAT!r}, got {fmt!r}")
    name = data.pop("name", "")
    world = data.pop("world", None)
    if not isinstance(world, dict):
        raise ScenarioError(path, "world", "missing section")
    kw = {}
    for key, attr in _WORLD_KEYS.items():
        if key == "k_i" and key not in world:
            continue
        kw[attr] = _take(world, key, "world", path, int if key in ("n", "n_t") else float)
    reg = world.pop("region", None)
    if not isinstance(reg, dict):
        raise ScenarioError(path, "world.region", "missing table {x_min, x_max, y_min, y_max}")
    fp = world.pop("D", [1.0, 1.0])
    try:
        region = Region(*(_take(reg, k, "world.region", path) for k in ("x_min", "x_max", "y_min", "y_max")))
        _no_extra(reg, "world.region", path)
        if not (isinstance(fp, list) and len(fp) == 2):
            raise ScenarioError(path, "world.D", "expected [width, height]")
        footprint = SensorFootprint(float(fp[0]), float(fp[1]))
        _no_extra(world, "world", path)
        cfg = WorldConfig(region=region, footprint=footprint, **kw)
    except ConfigError as e:
        raise ScenarioError(path, _config_location(e.field), str(e)) from None

    targets = data.pop("targets", {})
    agents = data.pop("agents", {})
    trig = data.pop("phase_trigger", {"kind": "fixed_duration", "duration": cfg.t_last})
    _no_extra(data, "", path)
    for where, section in (("targets", targets), ("agents", agents), ("phase_trigger", trig)):
        if not isinstance(section, dict):
            raise ScenarioError(path, where, "expected a table")

    phases, grid = None, (20, 20)
    if "phases" in targets:
        phases = tuple(_points(p, f"targets.phases[{k}]", path) for k, p in enumerate(targets.pop("phases")))
    else:
        gen = targets.pop("generator", "random_grid")
        if gen != "random_grid":
            raise ScenarioError(path, "targets.generator", f"unknown generator {gen!r}")
        g = targets.pop("grid", [20, 20])
        if not (isinstance(g, list) and len(g) == 2 and all(isinstance(x, int) for x in g)):
            raise ScenarioError(path, "targets.grid", "expected [nx, ny] integers")
        grid = (g[0], g[1])
    _no_extra(targets, "targets", path)

    positions = None
    if "positions" in agents:
        positions = _points(agents.pop("positions"), "agents.positions", path)
    elif agents.pop("placement", "random") != "random":
        raise ScenarioError(path, "agents.placement", "only 'random' is supported")
    _no_extra(agents, "agents", path)

    kind = trig.pop("kind", None)
    try:
        if kind == "fixed_duration":
            trigger = FixedDuration(_take(trig, "duration", "phase_trigger", path))
        elif kind == "on_full_coverage":
            trigger = OnFullCoverage(_take(trig, "settle", "phase_trigger", path))
        else:
            raise ScenarioError(path, "phase_trigger.kind", f"unknown kind {kind!r}")
        _no_extra(trig, "phase_trigger", path)
        return Scenario(cfg, initial_agent_positions=positions, target_phases=phases,
                        phase_trigger=trigger, grid=grid, name=name)
    except ConfigError as e:
        raise ScenarioError(path, _config_location(e.field), str(e)) from None


def _config_location(attr: str) -> str:
    inverse = {v: k for k, v in _WORLD_KEYS.items()}
    if attr in inverse:
        return f"world.{inverse[attr]}"
    if attr in ("region", "footprint"):
        return "world.region" if attr == "region" else "world.D"
    return attr


def parse_scenario_file(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(path, "file", e.strerror or str(e)) from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        # message carries "(at line L, column C)"
        raise ScenarioError(path, "syntax", str(e)) from None
    return scenario_from_dict(data, path)


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- outputs ----------------------------------------------------------------

_TIER_NAMES = [Tier(k).label for k in range(4)]


def _fmt(x: float) -> str:
    return f"{x:.9f}"


def trajectory_csv(trial: TrialResult) -> str:
    steps, n = trial.references.shape
    if steps == 0:
        return ",".join(TRAJECTORY_COLUMNS) + "\n"
    row = "%.9f,%d,%.9f,%.9f,%d,%s\n"
    t = np.repeat(trial.t, n)
    ids = np.tile(np.arange(n), steps)
    xy = trial.positions.reshape(-1, 2)
    names = np.array(_TIER_NAMES, dtype=object)[trial.tiers.reshape(-1)]
    flat = [v for rec in zip(t.tolist(), ids.tolist(), xy[:, 0].tolist(), xy[:, 1].tolist(),
                             trial.references.reshape(-1).tolist(), names.tolist()) for v in rec]
    return ",".join(TRAJECTORY_COLUMNS) + "\n" + (row * (steps * n)) % tuple(flat)


def metrics_csv(trial: TrialResult) -> str:
    row = "%.9f,%.9f,%.9f,%.9f\n"
    flat = [v for rec in zip(trial.t.tolist(), trial.p_cov.tolist(), trial.p_cov_lower.tolist(),
                             trial.min_distance.tolist()) for v in rec]
    return ",".join(METRICS_COLUMNS) + "\n" + (row * len(trial.t)) % tuple(flat)


@dataclass
class RunManifest:
    """Everything needed to repeat a run bit-exactly."""

    algorithm: str
    base_seed: int
    n_trials: int
    seeds: list
    scenario: dict
    scenario_path: str = ""
    scenario_sha256: str = ""
    duration_override: float = None
    workers: int = 1
    emit: list = field(default_factory=lambda: list(EMIT_KINDS))
    software_version: str = __version__
    csv_schema_version: int = CSV_SCHEMA_VERSION
    runtime_seconds: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)


def export_outputs(result: CampaignResult, out_dir, emit: Iterable[str] = EMIT_KINDS,
                   manifest: RunManifest = None) -> list[Path]:
    emit = set(emit)
    unknown = emit - set(EMIT_KINDS)
    if unknown:
        raise ValueError(f"unknown output kinds {sorted(unknown)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"{out} is not writable")
    written = []
    for trial in result.trials:
        tag = f"{result.algorithm}_seed{trial.seed}"
        if "trajectories" in emit:
            p = out / "trajectories" / f"{tag}.csv"
            p.parent.mkdir(exist_ok=True)
            p.write_text(trajectory_csv(trial))
            written.append(p)
        if "metrics" in emit:
            p = out / "metrics" / f"{tag}.csv"
            p.parent.mkdir(exist_ok=True)
            p.write_text(metrics_csv(trial))
            written.append(p)
    if "summary" in emit:
        doc = {"summary": result.summary(),
               "phases": {str(t.seed): [p.__dict__ for p in t.phases] for t in result.trials}}
        if manifest is not None:
            doc["manifest"] = manifest.to_dict()
        p = out / "summary.json"
        p.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
        written.append(p)
    return written


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")
