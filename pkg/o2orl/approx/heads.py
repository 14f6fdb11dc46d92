"""Policy heads: squashed Gaussian for continuous actions, categorical for discrete.

Every head samples from injected noise, so identical noise gives identical
actions and tests can pin the sampling path.
"""
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn
from torch.distributions import Normal

from o2orl.approx.networks import MLP
from o2orl.array_utils import to_tensor
from o2orl.env.base import ActionSpace

LOG_STD_MIN: float = -20.0
LOG_STD_MAX: float = 2.0
TANH_EPSILON: float = 1e-6
ATANH_CLIP: float = 1.0 - 1e-6


class Policy(nn.Module, ABC):
    """Abstract stochastic policy head."""

    discrete: bool = False

    @abstractmethod
    def draw_noise(
        self,
        batch_size: int,
        generator: Optional[torch.Generator] = None,
        dtype: torch.dtype = torch.float32,
    ) -> torch.Tensor:
        """Draw the noise consumed by `sample`."""

    @abstractmethod
    def sample(
        self, states: torch.Tensor, noise: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Sample actions with injected noise.

        Args:
            states: Batch of states (B x state_dim).
            noise: Noise drawn by `draw_noise`.

        Returns:
            Tuple of actions (B x action width) and log-probabilities (B,).
        """

    @abstractmethod
    def log_prob(self, states: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        """Log-probability (density) of given actions, shape (B,)."""

    @abstractmethod
    def mode(self, states: torch.Tensor) -> torch.Tensor:
        """Most likely action per state."""

    def act(
        self,
        state: np.ndarray,
        generator: Optional[torch.Generator] = None,
        deterministic: bool = False,
    ) -> np.ndarray:
        """Select one environment action for a numpy state.

        Args:
            state: Single state vector.
            generator: Torch generator used for the noise.
            deterministic: If True return the mode.

        Returns:
            Action as numpy array.
        """
        param: torch.Tensor = next(self.parameters())
        states: torch.Tensor = to_tensor(state, param.dtype).reshape(1, -1)
        with torch.no_grad():
            if deterministic:
                action: torch.Tensor = self.mode(states)
            else:
                noise = self.draw_noise(1, generator, param.dtype)
                action, _ = self.sample(states, noise)
        return action[0].cpu().numpy().astype(np.float64)

    @property
    def algorithm_name(self) -> str:
        return type(self).__name__


class GaussianPolicyHead(Policy):
    """Tanh-squashed Gaussian policy scaled to the action bounds."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        state_dim: int,
        action_space: ActionSpace,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        if action_space.discrete:
            raise ValueError("Gaussian head needs a continuous action space.")
        self.action_dim: int = action_space.dim
        self.scale: float = (action_space.high - action_space.low) / 2.0
        self.bias: float = (action_space.high + action_space.low) / 2.0
        self.body = MLP(state_dim, 2 * self.action_dim, hidden, generator)

    def distribution_params(
        self, states: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Return mean and clamped log-std of the pre-squash Gaussian."""
        mean, log_std = self.body(states).chunk(2, dim=-1)
        return mean, log_std.clamp(LOG_STD_MIN, LOG_STD_MAX)

    def draw_noise(
        self,
        batch_size: int,
        generator: Optional[torch.Generator] = None,
        dtype: torch.dtype = torch.float32,
    ) -> torch.Tensor:
        return torch.randn(batch_size, self.action_dim, generator=generator, dtype=dtype)

    def _squashed_log_prob(
        self, mean: torch.Tensor, log_std: torch.Tensor, pre_squash: torch.Tensor
    ) -> torch.Tensor:
        gaussian = Normal(mean, log_std.exp())
        squashed: torch.Tensor = torch.tanh(pre_squash)
        correction: torch.Tensor = torch.log(
            self.scale * (1.0 - squashed.pow(2) + TANH_EPSILON)
        )
        return (gaussian.log_prob(pre_squash) - correction).sum(dim=-1)

    def sample(
        self, states: torch.Tensor, noise: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        mean, log_std = self.distribution_params(states)
        pre_squash: torch.Tensor = mean + log_std.exp() * noise
        actions: torch.Tensor = torch.tanh(pre_squash) * self.scale + self.bias
        return actions, self._squashed_log_prob(mean, log_std, pre_squash)

    def log_prob(self, states: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        mean, log_std = self.distribution_params(states)
        unit: torch.Tensor = ((actions - self.bias) / self.scale).clamp(
            -ATANH_CLIP, ATANH_CLIP
        )
        return self._squashed_log_prob(mean, log_std, torch.atanh(unit))

    def mode(self, states: torch.Tensor) -> torch.Tensor:
        mean, _ = self.distribution_params(states)
        return torch.tanh(mean) * self.scale + self.bias


class CategoricalPolicyHead(Policy):
    """Softmax policy over n discrete actions sampled by inverse CDF."""

    discrete = True

    def __init__(
        self,
        state_dim: int,
        n_actions: int,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        self.n_actions: int = n_actions
        self.body = MLP(state_dim, n_actions, hidden, generator)

    def log_probs(self, states: torch.Tensor) -> torch.Tensor:
        """Log-probabilities of every action, shape (B x n)."""
        return torch.log_softmax(self.body(states), dim=-1)

    def probs(self, states: torch.Tensor) -> torch.Tensor:
        """Probabilities of every action, shape (B x n)."""
        return torch.softmax(self.body(states), dim=-1)

    def draw_noise(
        self,
        batch_size: int,
        generator: Optional[torch.Generator] = None,
        dtype: torch.dtype = torch.float32,
    ) -> torch.Tensor:
        return torch.rand(batch_size, generator=generator, dtype=dtype)

    def sample(
        self, states: torch.Tensor, noise: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        log_probs: torch.Tensor = self.log_probs(states)
        cdf: torch.Tensor = log_probs.exp().cumsum(dim=-1)
        index: torch.Tensor = (
            (cdf < noise.reshape(-1, 1)).sum(dim=-1).clamp(max=self.n_actions - 1)
        )
        chosen: torch.Tensor = log_probs.gather(1, index.unsqueeze(1)).squeeze(1)
        return index.unsqueeze(1).to(states.dtype), chosen

    def log_prob(self, states: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        index: torch.Tensor = actions.reshape(-1, 1).long()
        return self.log_probs(states).gather(1, index).squeeze(1)

    def mode(self, states: torch.Tensor) -> torch.Tensor:
        return self.body(states).argmax(dim=-1, keepdim=True).to(states.dtype)


def make_policy(
    state_dim: int,
    action_space: ActionSpace,
    hidden: Sequence[int] = (64, 64),
    generator: Optional[torch.Generator] = None,
) -> Policy:
    """Build the policy head matching the action space."""
    if action_space.discrete:
        return CategoricalPolicyHead(state_dim, action_space.n, hidden, generator)
    return GaussianPolicyHead(state_dim, action_space, hidden, generator)
