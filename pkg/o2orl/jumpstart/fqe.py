"""Fitted Q evaluation of the composite jump-start policy."""
import copy
import logging
from typing import Any, Dict, Optional, Protocol, Sequence

import numpy as np
import torch

from o2orl.approx.networks import QNetwork
from o2orl.approx.optim import make_optimizer, minimize, polyak_update
from o2orl.array_utils import to_tensor, validate_finite
from o2orl.data.types import TransitionBatch
from o2orl.env.base import ActionSpace
from o2orl.jumpstart.policy import CompositePolicy
from o2orl.logger import create_logger

_LOGGER: Optional[logging.Logger] = None


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


class TransitionSource(Protocol):  # pylint: disable = (too-few-public-methods)
    """Anything that samples minibatches, e.g. a ReplayBuffer."""

    def sample(
        self, batch_size: int, rng: np.random.Generator, dtype: torch.dtype = ...
    ) -> TransitionBatch:
        ...


class FQE:  # pylint: disable = (too-many-instance-attributes)
    """Estimator F(s, a) regressed toward r + discount * F_target(s', a').

    Next actions a' come from the composite policy at time index
    episode_step + 1 and the current guide step. The target network is
    hard-synced every `sync_period` iterations.
    """

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        state_dim: int,
        action_space: ActionSpace,
        hidden: Sequence[int] = (64, 64),
        sync_period: int = 100,
        learning_rate: float = 3e-4,
        batch_size: int = 256,
        estimate_samples: int = 8,
        generator: Optional[torch.Generator] = None,
    ) -> None:
        if sync_period < 1:
            raise ValueError(f"Sync period must be >= 1, got {sync_period}")
        self.action_space: ActionSpace = action_space
        size: int = action_space.n if action_space.discrete else action_space.dim
        self.network = QNetwork(state_dim, size, action_space.discrete, hidden, generator)
        self.target: QNetwork = copy.deepcopy(self.network)
        self.target.requires_grad_(False)
        self.optimizer = make_optimizer(self.network, learning_rate)
        self.sync_period: int = sync_period
        self.batch_size: int = batch_size
        self.estimate_samples: int = estimate_samples
        self.generator: Optional[torch.Generator] = generator
        self.iterations: int = 0

    @property
    def dtype(self) -> torch.dtype:
        return next(self.network.parameters()).dtype

    def _expected(
        self,
        network: QNetwork,
        states: torch.Tensor,
        policy: CompositePolicy,
        t: torch.Tensor,
        h: float,
        samples: int = 1,
    ) -> torch.Tensor:
        if self.action_space.discrete:
            probs: torch.Tensor = policy.action_probs(states, t, h)
            return (probs * network.all_actions(states)).sum(dim=-1)
        total: torch.Tensor = torch.zeros(len(states), dtype=states.dtype)
        for _ in range(samples):
            actions: torch.Tensor = policy.sample(states, t, h, self.generator)
            total = total + network(states, actions)
        return total / samples

    def regression_target(
        self, batch: TransitionBatch, policy: CompositePolicy, h: float
    ) -> torch.Tensor:
        """r + discount * E_{a' ~ pi_js(s', episode_step + 1, h)} F_target(s', a').

        Raises:
            RuntimeError: if a target is not finite.
        """
        with torch.no_grad():
            next_t: torch.Tensor = batch.episode_steps + 1
            next_values: torch.Tensor = self._expected(
                self.target, batch.next_states, policy, next_t, h
            )
            target: torch.Tensor = batch.rewards + batch.discounts * next_values
        return validate_finite(target, "FQE target")

    def loss(self, batch: TransitionBatch, target: torch.Tensor) -> torch.Tensor:
        return (self.network(batch.states, batch.actions) - target).pow(2).mean()

    def step(self, batch: TransitionBatch, policy: CompositePolicy, h: float) -> float:
        """One regression step followed by the periodic target sync."""
        value: float = minimize(
            self.loss(batch, self.regression_target(batch, policy, h)),
            self.network,
            self.optimizer,
        )
        self.iterations += 1
        if self.iterations % self.sync_period == 0:
            polyak_update(self.target, self.network, 1.0)
        return value

    def train(
        self,
        source: TransitionSource,
        policy: CompositePolicy,
        h: float,
        iterations: int,
        rng: np.random.Generator,
    ) -> "FQE":
        """Run `iterations` minibatch regressions on samples from `source`."""
        last: float = float("nan")
        for _ in range(iterations):
            last = self.step(source.sample(self.batch_size, rng, self.dtype), policy, h)
        if iterations:
            log().debug("FQE ran %d iterations, last loss %.5f.", iterations, last)
        return self

    def estimate(
        self, start_states: np.ndarray, policy: CompositePolicy, t: int, h: float
    ) -> float:
        """Mean over start states of F(s0, a) with a ~ pi_js(s0, t, h).

        Raises:
            ValueError: if there are no start states.
        """
        states: torch.Tensor = to_tensor(np.asarray(start_states), self.dtype)
        if states.dim() != 2 or len(states) == 0:
            raise ValueError("FQE estimate needs at least one start state.")
        times: torch.Tensor = torch.full((len(states),), int(t), dtype=torch.long)
        with torch.no_grad():
            values: torch.Tensor = self._expected(
                self.network, states, policy, times, h, self.estimate_samples
            )
        return float(values.mean())

    def state_dict(self) -> Dict[str, Any]:
        return {
            "network": self.network.state_dict(),
            "target": self.target.state_dict(),
            "optimizer": self.optimizer.state_dict(),
            "iterations": self.iterations,
            "sync_period": self.sync_period,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.network.load_state_dict(state["network"])
        self.target.load_state_dict(state["target"])
        self.optimizer.load_state_dict(state["optimizer"])
        self.iterations = int(state["iterations"])
        self.sync_period = int(state["sync_period"])


def fqe_train(
    fqe: FQE,
    source: TransitionSource,
    policy: CompositePolicy,
    h: float,
    iterations: int,
    rng: np.random.Generator,
) -> FQE:
    """Train `fqe` on `source` for `iterations` minibatch steps."""
    return fqe.train(source, policy, h, iterations, rng)


def fqe_estimate(
    fqe: FQE, start_states: np.ndarray, policy: CompositePolicy, t: int, h: float
) -> float:
    """Start-state average of the estimator under the composite policy."""
    return fqe.estimate(start_states, policy, t, h)
