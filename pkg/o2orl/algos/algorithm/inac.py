"""In-sample actor-critic, used offline and for fine-tuning."""
from enum import Enum
from typing import Optional

import torch

from o2orl.algos.base_agent import Agent, BaseAlgorithm, UpdateReport
from o2orl.algos.common import (
    bootstrap_target,
    critic_regression_loss,
    soft_value,
    weighted_log_likelihood,
)
from o2orl.algos.ensemble import ensemble_reduce
from o2orl.approx.optim import minimize
from o2orl.data.types import TransitionBatch

W_MAX_LOG: float = 5.0


class UpdateMode(Enum):
    """Data source of an update. Both modes run the identical update."""

    OFFLINE = "offline"
    FINETUNE = "finetune"


class InAC(BaseAlgorithm):
    """Behavior cloning, value regression, soft critic regression and an
    actor step weighted by exp((Q(s,a) - V(s)) / tau - log pi_beta(a|s)).
    """

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
        w_max_log: float = W_MAX_LOG,
        mode: UpdateMode = UpdateMode.OFFLINE,
    ) -> None:
        super().__init__(agent, generator, polyak_rate)
        if agent.value is None or agent.behavior is None:
            raise ValueError("InAC needs an agent with value and behavior networks.")
        if agent.temperature.auto or agent.temperature.value <= 0:
            raise ValueError(
                f"InAC needs a fixed temperature > 0, got {agent.temperature.value}"
            )
        self.w_max_log: float = w_max_log
        self.mode: UpdateMode = mode

    @property
    def tau(self) -> torch.Tensor:
        return self.agent.temperature()

    def behavior_loss(self, batch: TransitionBatch) -> torch.Tensor:
        """-log pi_beta(a|s)."""
        return -self.agent.behavior.log_prob(batch.states, batch.actions).mean()  # type: ignore

    def value_loss(
        self, batch: TransitionBatch, noise: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        """Regress V(s) toward E[Q(s, a) - tau log pi(a|s)]."""
        agent: Agent = self.agent
        with torch.no_grad():
            target: torch.Tensor = soft_value(
                agent.critics, agent.actor, batch.states, self.tau, agent.reduce, noise
            )
        return (agent.value(batch.states) - target).pow(2).mean()  # type: ignore

    def critic_target(
        self, batch: TransitionBatch, noise: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        agent: Agent = self.agent
        with torch.no_grad():
            next_values: torch.Tensor = soft_value(
                agent.target_critics,
                agent.actor,
                batch.next_states,
                self.tau,
                agent.reduce,
                noise,
            )
            return bootstrap_target(batch.rewards, batch.discounts, next_values)

    def actor_weights(self, batch: TransitionBatch) -> torch.Tensor:
        """Clamped in-sample weights of the dataset actions."""
        agent: Agent = self.agent
        with torch.no_grad():
            q_values: torch.Tensor = ensemble_reduce(
                agent.critics(batch.states, batch.actions), agent.reduce
            )
            values: torch.Tensor = agent.value(batch.states)  # type: ignore
            behavior_log_prob: torch.Tensor = agent.behavior.log_prob(  # type: ignore
                batch.states, batch.actions
            )
            exponent: torch.Tensor = (q_values - values) / self.tau - behavior_log_prob
            return exponent.clamp(max=self.w_max_log).exp()

    def actor_loss(self, batch: TransitionBatch) -> torch.Tensor:
        return weighted_log_likelihood(
            self.agent.actor, batch.states, batch.actions, self.actor_weights(batch)
        )

    def update(self, batch: TransitionBatch) -> UpdateReport:
        agent: Agent = self.agent
        report = UpdateReport()
        noise: Optional[torch.Tensor] = None if agent.discrete else self.draw_noise(batch)

        report.behavior = minimize(
            self.behavior_loss(batch), agent.behavior, agent.optimizers["behavior"]  # type: ignore
        )
        report.value = minimize(
            self.value_loss(batch, noise), agent.value, agent.optimizers["value"]  # type: ignore
        )
        next_noise: Optional[torch.Tensor] = (
            None if agent.discrete else self.draw_noise(batch)
        )
        report.critic = minimize(
            critic_regression_loss(
                agent.critics,
                batch.states,
                batch.actions,
                self.critic_target(batch, next_noise),
            ),
            agent.critics,
            agent.optimizers["critic"],
        )
        if agent.optimism is not None:
            agent.optimism.mark_trained(batch.states)
        report.actor = minimize(self.actor_loss(batch), agent.actor, agent.optimizers["actor"])
        with torch.no_grad():
            report.mean_q = float(
                ensemble_reduce(
                    agent.critics(batch.states, batch.actions), agent.reduce
                ).mean()
            )
        report.alpha = agent.temperature.value
        agent.update_targets(self.polyak_rate)
        self.updates += 1
        return report.validate()
