"""Multilayer perceptrons, critics, critic ensembles and state-value networks."""
import math
from typing import List, Optional, Sequence

import numpy as np
import torch
from torch import nn

from o2orl.array_utils import validate_width

FINAL_CRITIC_INIT: float = 3e-3


def init_linear(
    layer: nn.Linear,
    generator: Optional[torch.Generator] = None,
    bound: Optional[float] = None,
) -> None:
    """Initialize linear layer uniformly.

    Args:
        layer: Layer to initialize in place.
        generator: Torch generator. Defaults to the global one.
        bound: Symmetric bound. Defaults to fan-in scaling 1/sqrt(in).
    """
    limit: float = bound if bound is not None else 1.0 / math.sqrt(layer.in_features)
    with torch.no_grad():
        layer.weight.uniform_(-limit, limit, generator=generator)
        layer.bias.uniform_(-limit, limit, generator=generator)


class MLP(nn.Module):
    """Perceptron with ReLU hidden layers and a linear output layer."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        in_dim: int,
        out_dim: int,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
        final_bound: Optional[float] = None,
    ) -> None:
        super().__init__()
        widths: List[int] = [in_dim, *hidden, out_dim]
        self.in_dim: int = in_dim
        self.out_dim: int = out_dim
        self.layers = nn.ModuleList(
            nn.Linear(fan_in, fan_out) for fan_in, fan_out in zip(widths, widths[1:])
        )
        for layer in self.layers[:-1]:
            init_linear(layer, generator)
        init_linear(self.layers[-1], generator, final_bound)

    @property
    def layer_shapes(self) -> List[tuple]:
        return [(layer.in_features, layer.out_features) for layer in self.layers]

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        validate_width(inputs, self.in_dim, type(self).__name__)
        hidden: torch.Tensor = inputs
        for layer in self.layers[:-1]:
            hidden = torch.relu(layer(hidden))
        return self.layers[-1](hidden)


def parameter_count(layer_shapes: Sequence[tuple]) -> int:
    """Number of parameters of an MLP with the given layer shapes."""
    return sum(fan_in * fan_out + fan_out for fan_in, fan_out in layer_shapes)


def flat_parameters(module: nn.Module) -> torch.Tensor:
    """Detached flat copy of all module parameters."""
    return nn.utils.parameters_to_vector(module.parameters()).detach().clone()


def load_flat_parameters(module: nn.Module, vector: torch.Tensor) -> None:
    """Write flat parameter vector into module.

    Raises:
        ValueError: if vector length differs from the parameter count.
    """
    expected: int = sum(param.numel() for param in module.parameters())
    if vector.dim() != 1 or vector.numel() != expected:
        raise ValueError(
            f"Parameter vector of length {vector.numel()} does not match {expected}"
        )
    with torch.no_grad():
        nn.utils.vector_to_parameters(vector.to(next(module.parameters())), module.parameters())


class QNetwork(nn.Module):
    """Action-value network.

    Discrete critics map a state to one value per action, continuous critics
    map a concatenated (state, action) pair to one value.
    """

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        state_dim: int,
        action_dim: int,
        discrete: bool,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        self.discrete: bool = discrete
        self.state_dim: int = state_dim
        self.action_dim: int = action_dim
        in_dim: int = state_dim if discrete else state_dim + action_dim
        out_dim: int = action_dim if discrete else 1
        self.body = MLP(in_dim, out_dim, hidden, generator, FINAL_CRITIC_INIT)

    def all_actions(self, states: torch.Tensor) -> torch.Tensor:
        """Values of every action, shape (B x n). Discrete critics only."""
        if not self.discrete:
            raise ValueError("Continuous critic cannot enumerate actions.")
        return self.body(states)

    def forward(self, states: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        """Values of the given actions, shape (B,).

        Args:
            states: Batch of states (B x state_dim).
            actions: Batch of actions (B x 1) holding indices for discrete
                critics, (B x action_dim) otherwise.
        """
        if self.discrete:
            index: torch.Tensor = actions.reshape(-1, 1).long()
            return self.body(states).gather(1, index).squeeze(1)
        return self.body(torch.cat([states, actions], dim=-1)).squeeze(-1)


class OptimisticRegion:
    """Optimistic offset on critic values that lead into an unlearned region.

    States are one-hot and `successors[i, a]` is the state index reached from
    state i with action a. Q(s, a) receives `boost` while the state it leads
    to lies in the region; the offset of a region state fades linearly to
    zero once critic updates have used it `clear_visits` times.
    """

    def __init__(
        self,
        region_mask: np.ndarray,
        successors: np.ndarray,
        boost: float = 30.0,
        clear_visits: int = 1000,
    ) -> None:
        self.region: torch.Tensor = torch.as_tensor(np.asarray(region_mask, dtype=bool))
        self.successors: torch.Tensor = torch.as_tensor(np.asarray(successors, dtype=np.int64))
        if self.successors.ndim != 2 or self.successors.shape[0] != self.region.shape[0]:
            raise ValueError(
                f"Successor table of shape {tuple(self.successors.shape)} does not "
                f"cover {self.region.shape[0]} states."
            )
        if self.successors.numel() > 0 and bool(
            (self.successors < 0).any() or (self.successors >= self.region.shape[0]).any()
        ):
            raise ValueError("Successor table points outside the state space.")
        if clear_visits < 1:
            raise ValueError(f"clear_visits must be >= 1, got {clear_visits}")
        self.visits: torch.Tensor = torch.zeros(self.region.shape[0], dtype=torch.float64)
        self.boost: float = float(boost)
        self.clear_visits: int = int(clear_visits)

    @property
    def pending(self) -> torch.Tensor:
        """Region states whose offset has not fully faded."""
        return self.region & (self.visits < self.clear_visits)

    def remaining(self) -> torch.Tensor:
        """Current offset per state, zero outside the region."""
        fade: torch.Tensor = (1.0 - self.visits / self.clear_visits).clamp(min=0.0)
        return self.boost * fade * self.region.to(fade.dtype)

    def offset(self, states: torch.Tensor) -> torch.Tensor:
        """Per-action offset, shape (B x n)."""
        table: torch.Tensor = self.remaining()[self.successors]
        return states @ table.to(states.dtype)

    def mark_trained(self, states: torch.Tensor) -> None:
        """Count every region state present in the batch as one more visit."""
        counts: torch.Tensor = states.detach().abs().sum(dim=0).cpu().to(self.visits.dtype)
        self.visits += counts * self.region.to(counts.dtype)

    def state_dict(self) -> dict:
        return {
            "region": self.region.clone(),
            "successors": self.successors.clone(),
            "visits": self.visits.clone(),
            "boost": self.boost,
            "clear_visits": self.clear_visits,
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "OptimisticRegion":
        region = cls(
            state["region"].numpy(),
            state["successors"].numpy(),
            state["boost"],
            state["clear_visits"],
        )
        region.visits = state["visits"].clone().to(torch.float64)
        return region


class CriticEnsemble(nn.Module):
    """Ensemble of K critics evaluated together."""

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        state_dim: int,
        action_dim: int,
        discrete: bool,
        size: int = 2,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        if size < 1:
            raise ValueError(f"Ensemble size must be >= 1, got {size}")
        self.discrete: bool = discrete
        self.members = nn.ModuleList(
            QNetwork(state_dim, action_dim, discrete, hidden, generator)
            for _ in range(size)
        )
        self.optimism: Optional[OptimisticRegion] = None

    def __len__(self) -> int:
        return len(self.members)

    def all_actions(self, states: torch.Tensor) -> torch.Tensor:
        """Values of every action per member, shape (K x B x n)."""
        values: torch.Tensor = torch.stack(
            [member.all_actions(states) for member in self.members]
        )
        if self.optimism is not None:
            values = values + self.optimism.offset(states)[None]
        return values

    def forward(self, states: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        """Values of the given actions per member, shape (K x B)."""
        values: torch.Tensor = torch.stack(
            [member(states, actions) for member in self.members]
        )
        if self.optimism is not None:
            if not self.discrete:
                raise ValueError("Optimistic region needs a discrete critic.")
            index: torch.Tensor = actions.reshape(-1, 1).long()
            values = values + self.optimism.offset(states).gather(1, index).squeeze(1)[None]
        return values


class ValueNetwork(nn.Module):
    """State-value network V(s)."""

    def __init__(
        self,
        state_dim: int,
        hidden: Sequence[int] = (64, 64),
        generator: Optional[torch.Generator] = None,
    ) -> None:
        super().__init__()
        self.body = MLP(state_dim, 1, hidden, generator, FINAL_CRITIC_INIT)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        return self.body(states).squeeze(-1)
