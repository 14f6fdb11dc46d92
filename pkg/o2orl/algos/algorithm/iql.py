"""Implicit Q-learning, used offline and for fine-tuning."""
from typing import Optional

import torch

from o2orl.algos.algorithm.inac import UpdateMode
from o2orl.algos.base_agent import Agent, BaseAlgorithm, UpdateReport
from o2orl.algos.common import (
    bootstrap_target,
    critic_regression_loss,
    weighted_log_likelihood,
)
from o2orl.algos.ensemble import ensemble_reduce
from o2orl.approx.optim import minimize
from o2orl.data.types import TransitionBatch

EXP_ADV_MAX: float = 100.0


def _check_expectile(expectile: float) -> None:
    if not 0.0 < expectile < 1.0:
        raise ValueError(f"Expectile must lie in (0, 1), got {expectile}")


def expectile_loss(diff: torch.Tensor, expectile: float) -> torch.Tensor:
    """Elementwise asymmetric squared error |rho - 1(u < 0)| * u^2.

    Raises:
        ValueError: if expectile is outside (0, 1).
    """
    _check_expectile(expectile)
    weight: torch.Tensor = torch.where(
        diff < 0,
        torch.full_like(diff, 1.0 - expectile),
        torch.full_like(diff, expectile),
    )
    return weight * diff.pow(2)


class IQL(BaseAlgorithm):
    """Expectile value regression against dataset actions, critic regression
    to r + discount * V(s') and advantage-weighted actor updates."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
        tau: float = 1.0 / 3.0,
        expectile: float = 0.7,
        exp_adv_max: float = EXP_ADV_MAX,
        mode: UpdateMode = UpdateMode.OFFLINE,
    ) -> None:
        super().__init__(agent, generator, polyak_rate)
        _check_expectile(expectile)
        if tau <= 0:
            raise ValueError(f"IQL temperature must be > 0, got {tau}")
        if agent.value is None:
            raise ValueError("IQL needs an agent with a value network.")
        self.tau: float = tau
        self.expectile: float = expectile
        self.exp_adv_max: float = exp_adv_max
        self.mode: UpdateMode = mode

    def target_q(self, batch: TransitionBatch) -> torch.Tensor:
        with torch.no_grad():
            return ensemble_reduce(
                self.agent.target_critics(batch.states, batch.actions), self.agent.reduce
            )

    def value_loss(self, batch: TransitionBatch) -> torch.Tensor:
        diff: torch.Tensor = self.target_q(batch) - self.agent.value(batch.states)  # type: ignore
        return expectile_loss(diff, self.expectile).mean()

    def critic_target(self, batch: TransitionBatch) -> torch.Tensor:
        with torch.no_grad():
            next_values: torch.Tensor = self.agent.value(batch.next_states)  # type: ignore
            return bootstrap_target(batch.rewards, batch.discounts, next_values)

    def actor_weights(self, batch: TransitionBatch) -> torch.Tensor:
        with torch.no_grad():
            advantage: torch.Tensor = self.target_q(batch) - self.agent.value(  # type: ignore
                batch.states
            )
            return (advantage / self.tau).exp().clamp(max=self.exp_adv_max)

    def actor_loss(self, batch: TransitionBatch) -> torch.Tensor:
        return weighted_log_likelihood(
            self.agent.actor, batch.states, batch.actions, self.actor_weights(batch)
        )

    def update(self, batch: TransitionBatch) -> UpdateReport:
        agent: Agent = self.agent
        report = UpdateReport()
        report.value = minimize(
            self.value_loss(batch), agent.value, agent.optimizers["value"]  # type: ignore
        )
        report.critic = minimize(
            critic_regression_loss(
                agent.critics, batch.states, batch.actions, self.critic_target(batch)
            ),
            agent.critics,
            agent.optimizers["critic"],
        )
        if agent.optimism is not None:
            agent.optimism.mark_trained(batch.states)
        report.actor = minimize(self.actor_loss(batch), agent.actor, agent.optimizers["actor"])
        report.mean_q = float(self.target_q(batch).mean())
        agent.update_targets(self.polyak_rate)
        self.updates += 1
        return report.validate()
