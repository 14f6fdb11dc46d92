"""SAC with an annealed trust-region penalty toward a slowly moving actor copy."""
from typing import Optional

import torch

from o2orl.algos.algorithm.sac import SAC
from o2orl.algos.base_agent import Agent
from o2orl.approx.heads import Policy
from o2orl.approx.optim import polyak_update

PRIOR_RATE: float = 0.005


class PROTO(SAC):
    """SAC whose soft value subtracts alpha * log(pi / pi_prior).

    Alpha decays linearly from `initial_weight` to 0 as the anneal fraction
    goes from 0 to 1. The prior actor trails the actor at `prior_rate`.
    """

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
        initial_weight: float = 1.0,
        prior_rate: float = PRIOR_RATE,
    ) -> None:
        super().__init__(agent, generator, polyak_rate)
        if initial_weight < 0:
            raise ValueError(f"Trust-region weight must be >= 0, got {initial_weight}")
        self.initial_weight: float = initial_weight
        self.prior_rate: float = prior_rate
        self.anneal_fraction: float = 0.0
        self._prior: Policy = agent.ensure_prior()

    def set_anneal_fraction(self, fraction: float) -> None:
        """Set progress through the fine-tuning budget, clipped to [0, 1]."""
        self.anneal_fraction = min(max(float(fraction), 0.0), 1.0)

    @property
    def prior(self) -> Optional[Policy]:
        return self._prior

    @property
    def kl_weight(self) -> float:
        return self.initial_weight * (1.0 - self.anneal_fraction)

    def after_update(self) -> None:
        polyak_update(self._prior, self.agent.actor, self.prior_rate)
