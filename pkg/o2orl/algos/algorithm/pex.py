"""Policy expansion: a frozen offline actor next to a newly trained one."""
import copy
import math
from typing import Optional, Tuple

import numpy as np
import torch

from o2orl.algos.algorithm.sac import SAC
from o2orl.algos.base_agent import Agent
from o2orl.algos.ensemble import ReduceMode, ensemble_reduce
from o2orl.approx.heads import Policy, make_policy
from o2orl.approx.networks import CriticEnsemble
from o2orl.array_utils import to_tensor


def offline_probability(q_offline: float, q_online: float, temperature: float) -> float:
    """First entry of softmax([q_offline, q_online] / temperature).

    A temperature of 0 selects the argmax, preferring offline on ties.
    """
    if temperature < 0:
        raise ValueError(f"PEX temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 1.0 if q_offline >= q_online else 0.0
    scaled: float = (q_offline - q_online) / temperature
    if scaled >= 0:
        return 1.0 / (1.0 + math.exp(-scaled))
    exp_scaled: float = math.exp(scaled)
    return exp_scaled / (1.0 + exp_scaled)


def pex_select_action(  # pylint: disable = (too-many-arguments, too-many-locals)
    offline_actor: Policy,
    online_actor: Policy,
    critics: CriticEnsemble,
    state: np.ndarray,
    temperature: float,
    reduce: ReduceMode = ReduceMode.MIN,
    generator: Optional[torch.Generator] = None,
    deterministic: bool = False,
) -> Tuple[np.ndarray, bool]:
    """Propose one action from each actor and pick one by its Q value.

    Args:
        offline_actor: Frozen offline actor.
        online_actor: Actor trained online.
        critics: Critic ensemble scoring both proposals.
        state: Current state.
        temperature: Selection softmax temperature.
        reduce: Ensemble reduce mode.
        generator: Torch generator of the proposals and the choice.
        deterministic: Propose the actor modes and pick the argmax.

    Returns:
        Tuple of chosen action and whether it came from the offline actor.
    """
    param: torch.Tensor = next(online_actor.parameters())
    states: torch.Tensor = to_tensor(state, param.dtype).reshape(1, -1)
    with torch.no_grad():
        if deterministic:
            offline_action = offline_actor.mode(states)
            online_action = online_actor.mode(states)
            temperature = 0.0
        else:
            offline_action, _ = offline_actor.sample(
                states, offline_actor.draw_noise(1, generator, param.dtype)
            )
            online_action, _ = online_actor.sample(
                states, online_actor.draw_noise(1, generator, param.dtype)
            )
        q_offline = float(ensemble_reduce(critics(states, offline_action), reduce)[0])
        q_online = float(ensemble_reduce(critics(states, online_action), reduce)[0])
        choice: float = float(torch.rand(1, generator=generator)[0])
    use_offline: bool = choice < offline_probability(q_offline, q_online, temperature)
    action: torch.Tensor = offline_action if use_offline else online_action
    return action[0].cpu().numpy().astype(np.float64), use_offline


class PEX(SAC):
    """SAC training a fresh online actor while the offline actor stays frozen."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
        temperature: float = 1.0,
    ) -> None:
        super().__init__(agent, generator, polyak_rate)
        self.temperature: float = temperature
        self.offline_actor: Policy = copy.deepcopy(agent.actor)
        self.offline_actor.requires_grad_(False)
        dtype: torch.dtype = next(agent.actor.parameters()).dtype
        agent.actor = make_policy(
            agent.spec.state_dim, agent.spec.action_space, agent.spec.hidden, generator
        ).to(dtype)
        agent.reset_optimizers()

    def select_action(
        self, state: np.ndarray, deterministic: bool = False
    ) -> Tuple[np.ndarray, bool]:
        return pex_select_action(
            self.offline_actor,
            self.agent.actor,
            self.agent.critics,
            state,
            self.temperature,
            self.agent.reduce,
            self.generator,
            deterministic,
        )
