# pylint: disable = missing-module-docstring
from enum import Enum
from typing import Any, Optional

import torch

from o2orl.algos import algorithm
from o2orl.algos.algorithm import CQL, IQL, PEX, PROTO, SAC, InAC
from o2orl.algos.base_agent import (
    Agent,
    AgentSpec,
    BaseAlgorithm,
    Temperature,
    UpdateReport,
)
from o2orl.algos.ensemble import ReduceMode, ensemble_reduce


class Algorithms(Enum):
    """Enum of supported update algorithms."""

    SAC: str = SAC.__name__
    CQL: str = CQL.__name__
    INAC: str = InAC.__name__
    IQL: str = IQL.__name__
    PROTO: str = PROTO.__name__
    PEX: str = PEX.__name__


def build_algorithm(
    name: Algorithms,
    agent: Agent,
    generator: Optional[torch.Generator] = None,
    **kwargs: Any,
) -> BaseAlgorithm:
    """Instantiate the update algorithm registered under `name`.

    Args:
        name: Algorithm enum member.
        agent: Agent the algorithm updates.
        generator: Torch generator for sampling noise.
        kwargs: Algorithm hyperparameters.

    Returns:
        Algorithm instance.
    """
    return getattr(algorithm, name.value)(agent=agent, generator=generator, **kwargs)
