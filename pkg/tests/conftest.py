import numpy as np
import pytest
from hypothesis import settings

from cutin_coverage.core import Region, SensorFootprint, TargetSet, WorldConfig

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def unit_footprint():
    return SensorFootprint(1.0, 1.0)


def idle_agent_world():
    """Agent 0 owns nothing; its neighbours 1 and 2 own targets 0 and 1, both uncovered.

    Agents 3 and 4 own targets 2 and 3 and are out of agent 0's range.
    """
    positions = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [7.0, 0.0], [0.0, 7.0]])
    targets = TargetSet([[4.0, 0.0], [0.0, 3.8], [7.8, 0.0], [0.0, 7.8]])
    cfg = WorldConfig(region=Region(-25.0, 25.0, -25.0, 25.0), n_agents=5, n_targets=4, d_c=5.0)
    return positions, targets, cfg
