"""Proportional attraction, Gaussian repulsion and Euler integration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .core import Region


@dataclass(frozen=True)
class ControlInput:
    u: np.ndarray
    du: np.ndarray
    applied: np.ndarray


def attraction(x, reference: Optional[np.ndarray], k_gain: float) -> np.ndarray:
    if reference is None:
        return np.zeros(2)
    return k_gain * (np.asarray(reference, dtype=float) - np.asarray(x, dtype=float))


def repulsion_gain(has_assigned: bool, K_d: float, K_s: float) -> float:
    """Agents that own no target push with the reduced gain ``K_s * K_d``."""
    return K_d if has_assigned else K_s * K_d


def repulsion(i: int, positions: Mapping[int, np.ndarray], has_assigned: bool,
              K_d: float, K_s: float, d_k: float) -> np.ndarray:
    k_d = repulsion_gain(has_assigned, K_d, K_s)
    xi = np.asarray(positions[i], dtype=float)
    out = np.zeros(2)
    for j in sorted(positions):
        if j == i:
            continue
        diff = xi - np.asarray(positions[j], dtype=float)
        d = math.sqrt(diff[0] * diff[0] + diff[1] * diff[1])
        if d > d_k:
            continue
        if d == 0.0:
            # coincident agents: fixed split direction, lower id goes +x
            out = out + k_d * np.array([1.0 if i < j else -1.0, 0.0])
        else:
            out = out + k_d * math.exp(-d * d) * diff / d
    return out


def saturate(v: np.ndarray, v_max: float) -> np.ndarray:
    speed = math.sqrt(float(v[0]) * float(v[0]) + float(v[1]) * float(v[1]))
    if speed > v_max:
        return v * (v_max / speed)
    return v


def integrate(x, u, du, dt: float, v_max: float, region: Region) -> np.ndarray:
    v = saturate(np.asarray(u, dtype=float) + np.asarray(du, dtype=float), v_max)
    return region.clamp(np.asarray(x, dtype=float) + dt * v)


# -- whole-swarm versions ---------------------------------------------------

def attraction_all(positions: np.ndarray, ref_points: np.ndarray, holding: np.ndarray,
                   k_gain: float) -> np.ndarray:
    u = k_gain * (ref_points - positions)
    u[holding] = 0.0
    return u


def repulsion_all(positions: np.ndarray, agent_dist: np.ndarray, has_assigned: np.ndarray,
                  K_d: float, K_s: float, d_k: float) -> np.ndarray:
    n = len(positions)
    k_d = np.where(has_assigned, K_d, K_s * K_d)
    near = agent_dist <= d_k
    np.fill_diagonal(near, False)
    out = np.zeros((n, 2))
    rows, cols = np.nonzero(near)
    if rows.size == 0:
        return out
    d = agent_dist[rows, cols]
    diff = positions[rows] - positions[cols]
    unit = np.empty_like(diff)
    apart = d > 0
    unit[apart] = diff[apart] / d[apart, None]
    unit[~apart] = np.where((rows[~apart] < cols[~apart])[:, None], [1.0, 0.0], [-1.0, 0.0])
    contrib = (k_d[rows] * np.exp(-d * d))[:, None] * unit
    # np.add.at accumulates in row-major pair order, matching the scalar loop
    np.add.at(out, rows, contrib)
    return out


def integrate_all(positions: np.ndarray, u: np.ndarray, du: np.ndarray, dt: float, v_max: float,
                  region: Region) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(new_positions, applied_velocity)``."""
    v = u + du
    speed = np.sqrt(v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1])
    scale = np.where(speed > v_max, v_max / np.where(speed > 0, speed, 1.0), 1.0)
    v = v * scale[:, None]
    return region.clamp(positions + dt * v), v
