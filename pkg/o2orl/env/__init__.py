# pylint: disable = missing-module-docstring
from enum import Enum
from typing import Any

from o2orl.env.base import (
    ActionSpace,
    EnvSpec,
    Environment,
    StepResult,
    compute_reference_returns,
    episode_return,
)
from o2orl.env.grid_cliff import GridCliff, GridCliffConfig
from o2orl.env.point_reach import PointReach, PointReachConfig
from o2orl.env.tabular import (
    ChainConfig,
    ChainMDP,
    TabularMDP,
    build_chain_mdp,
    exact_policy_value,
    iterative_policy_value,
)


class EnvName(Enum):
    """Enum of supported environments."""

    GRID_CLIFF = "grid_cliff"
    POINT_REACH = "point_reach"
    CHAIN = "chain"


def make_env(name: EnvName, config: Any) -> Environment:
    """Build an environment from its name and parameter block.

    Args:
        name: Environment name.
        config: Object exposing the env parameter blocks `grid_cliff`,
            `point_reach` and `chain`.

    Returns:
        Fresh environment instance.
    """
    if name == EnvName.GRID_CLIFF:
        return GridCliff(config.grid_cliff)
    if name == EnvName.POINT_REACH:
        return PointReach(config.point_reach)
    return ChainMDP(config.chain)
