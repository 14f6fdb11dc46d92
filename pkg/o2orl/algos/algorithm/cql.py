"""SAC-based conservative Q-learning."""
import math
from typing import Optional

import torch

from o2orl.algos.algorithm.sac import SAC
from o2orl.algos.base_agent import Agent
from o2orl.data.types import TransitionBatch


def cql_penalty(
    agent: Agent,
    batch: TransitionBatch,
    n_samples: int = 10,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """Per-member logsumexp_a Q(s, a) - Q(s, a_dataset), averaged over the batch.

    Discrete actions use the exact logsumexp. Continuous actions estimate
    it from `n_samples` uniform and `n_samples` policy actions with
    importance correction.

    Args:
        agent: Agent whose online critics are penalized.
        batch: Minibatch of transitions.
        n_samples: Samples per source for continuous actions.
        generator: Torch generator of the samples.

    Returns:
        Tensor (K,) of unweighted penalties.
    """
    if n_samples < 1:
        raise ValueError(f"CQL needs n_samples >= 1, got {n_samples}")
    critics = agent.critics
    data_q: torch.Tensor = critics(batch.states, batch.actions)
    if agent.discrete:
        return (torch.logsumexp(critics.all_actions(batch.states), dim=-1) - data_q).mean(
            dim=1
        )

    space = agent.spec.action_space
    size: int = len(batch)
    dtype: torch.dtype = batch.states.dtype
    repeated: torch.Tensor = batch.states.repeat_interleave(n_samples, dim=0)
    uniform: torch.Tensor = (
        torch.rand(size * n_samples, space.dim, generator=generator, dtype=dtype)
        * (space.high - space.low)
        + space.low
    )
    uniform_log_density: float = -space.dim * math.log(space.high - space.low)
    with torch.no_grad():
        noise: torch.Tensor = agent.actor.draw_noise(size * n_samples, generator, dtype)
        policy_actions, policy_log_prob = agent.actor.sample(repeated, noise)
    members: int = len(critics)
    uniform_q: torch.Tensor = critics(repeated, uniform).reshape(members, size, n_samples)
    policy_q: torch.Tensor = critics(repeated, policy_actions).reshape(
        members, size, n_samples
    )
    weighted: torch.Tensor = torch.cat(
        [
            uniform_q - uniform_log_density,
            policy_q - policy_log_prob.reshape(1, size, n_samples),
        ],
        dim=-1,
    )
    logsumexp: torch.Tensor = torch.logsumexp(weighted, dim=-1) - math.log(2 * n_samples)
    return (logsumexp - data_q).mean(dim=1)


class CQL(SAC):
    """SAC whose critic loss adds a weighted conservative penalty for every
    ensemble member."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
        cql_weight: float = 1.0,
        n_samples: int = 10,
    ) -> None:
        super().__init__(agent, generator, polyak_rate)
        if cql_weight < 0:
            raise ValueError(f"CQL weight must be >= 0, got {cql_weight}")
        self.cql_weight: float = cql_weight
        self.n_samples: int = n_samples

    def critic_penalty(self, batch: TransitionBatch) -> Optional[torch.Tensor]:
        if self.cql_weight == 0.0:
            return None
        return self.cql_weight * cql_penalty(
            self.agent, batch, self.n_samples, self.generator
        ).sum()
