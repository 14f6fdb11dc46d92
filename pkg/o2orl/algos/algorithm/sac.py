"""Soft actor-critic with ensemble critics and optional automatic entropy."""
from typing import Optional

import torch

from o2orl.algos.base_agent import Agent, BaseAlgorithm, UpdateReport
from o2orl.algos.common import (
    alpha_loss,
    bootstrap_target,
    critic_regression_loss,
    expected_log_prob,
    soft_value,
)
from o2orl.algos.ensemble import ensemble_reduce
from o2orl.approx.heads import Policy
from o2orl.approx.optim import minimize
from o2orl.data.types import TransitionBatch


class SAC(BaseAlgorithm):
    """Soft actor-critic update.

    Subclasses hook in a critic penalty and a trust-region term through
    `critic_penalty`, `prior` and `kl_weight`.
    """

    @property
    def prior(self) -> Optional[Policy]:
        return None

    @property
    def kl_weight(self) -> float:
        return 0.0

    def critic_target(
        self, batch: TransitionBatch, noise: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        """Bootstrap target r + discount * soft V_target(s')."""
        agent: Agent = self.agent
        with torch.no_grad():
            next_values: torch.Tensor = soft_value(
                agent.target_critics,
                agent.actor,
                batch.next_states,
                agent.temperature(),
                agent.reduce,
                noise,
                self.prior,
                self.kl_weight,
            )
            return bootstrap_target(batch.rewards, batch.discounts, next_values)

    def critic_penalty(  # pylint: disable = (unused-argument)
        self, batch: TransitionBatch
    ) -> Optional[torch.Tensor]:
        """Extra critic loss term; SAC has none."""
        return None

    def critic_loss(self, batch: TransitionBatch, targets: torch.Tensor) -> torch.Tensor:
        loss: torch.Tensor = critic_regression_loss(
            self.agent.critics, batch.states, batch.actions, targets
        )
        penalty: Optional[torch.Tensor] = self.critic_penalty(batch)
        return loss if penalty is None else loss + penalty

    def actor_loss(
        self, states: torch.Tensor, noise: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        """E[tau log pi(a|s) - Q(s, a)] (plus the trust-region term)."""
        agent: Agent = self.agent
        return -soft_value(
            agent.critics,
            agent.actor,
            states,
            agent.temperature(),
            agent.reduce,
            noise,
            self.prior,
            self.kl_weight,
        ).mean()

    def alpha_update(
        self, batch: TransitionBatch, noise: Optional[torch.Tensor] = None
    ) -> float:
        """One dual step on log-alpha toward the target entropy.

        Returns:
            New alpha.
        """
        agent: Agent = self.agent
        if not agent.temperature.auto:
            raise ValueError("Alpha update needs automatic entropy enabled.")
        with torch.no_grad():
            log_pi: torch.Tensor = expected_log_prob(agent.actor, batch.states, noise)
        loss: torch.Tensor = alpha_loss(
            agent.temperature.log_alpha, log_pi, float(agent.spec.target_entropy)
        )
        minimize(loss, [agent.temperature.log_alpha], agent.optimizers["alpha"])
        return agent.temperature.value

    def update(self, batch: TransitionBatch) -> UpdateReport:
        agent: Agent = self.agent
        report = UpdateReport()

        targets: torch.Tensor = self.critic_target(batch, self._noise(batch))
        critic_loss: torch.Tensor = self.critic_loss(batch, targets)
        report.critic = minimize(critic_loss, agent.critics, agent.optimizers["critic"])
        with torch.no_grad():
            report.mean_q = float(
                ensemble_reduce(
                    agent.critics(batch.states, batch.actions), agent.reduce
                ).mean()
            )
        if agent.optimism is not None:
            agent.optimism.mark_trained(batch.states)

        report.actor = minimize(
            self.actor_loss(batch.states, self._noise(batch)),
            agent.actor,
            agent.optimizers["actor"],
        )
        if agent.temperature.auto:
            report.alpha = self.alpha_update(batch, self._noise(batch))
        else:
            report.alpha = agent.temperature.value

        agent.update_targets(self.polyak_rate)
        self.after_update()
        self.updates += 1
        return report.validate()

    def after_update(self) -> None:
        """Hook run after the target update."""

    def _noise(self, batch: TransitionBatch) -> Optional[torch.Tensor]:
        return None if self.agent.discrete else self.draw_noise(batch)
