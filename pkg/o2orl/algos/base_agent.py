"""Agent state shared by every algorithm and the abstract algorithm class."""
import copy
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

import numpy as np
import torch
from torch import nn

from o2orl.algos.ensemble import ReduceMode
from o2orl.approx.heads import Policy, make_policy
from o2orl.approx.networks import CriticEnsemble, OptimisticRegion, ValueNetwork
from o2orl.approx.optim import make_optimizer, polyak_update
from o2orl.data.types import TransitionBatch
from o2orl.env.base import ActionSpace


@dataclass
class AgentSpec:  # pylint: disable = (too-many-instance-attributes)
    """Everything needed to rebuild an agent from a checkpoint."""

    state_dim: int
    action_space: ActionSpace
    hidden: Tuple[int, ...] = (64, 64)
    ensemble_size: int = 2
    reduce: ReduceMode = ReduceMode.MIN
    with_value: bool = False
    with_behavior: bool = False
    with_prior: bool = False
    learning_rate: float = 3e-4
    temperature: float = 0.2
    auto_entropy: bool = False
    target_entropy: Optional[float] = None

    def __post_init__(self) -> None:
        if self.ensemble_size < 1:
            raise ValueError(f"Ensemble size must be >= 1, got {self.ensemble_size}")
        if self.temperature < 0 or (self.auto_entropy and self.temperature <= 0):
            raise ValueError(f"Invalid temperature {self.temperature}")
        self.hidden = tuple(int(width) for width in self.hidden)
        if self.target_entropy is None:
            self.target_entropy = default_target_entropy(self.action_space)

    @property
    def action_width(self) -> int:
        return self.action_space.width

    @property
    def action_size(self) -> int:
        """Number of actions (discrete) or action dimensions (continuous)."""
        return self.action_space.n if self.action_space.discrete else self.action_space.dim

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {item.name: getattr(self, item.name) for item in fields(self)}
        result["action_space"] = asdict(self.action_space)
        result["hidden"] = list(self.hidden)
        result["reduce"] = self.reduce.value
        return result

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "AgentSpec":
        data: Dict[str, Any] = dict(values)
        data["action_space"] = ActionSpace(**data["action_space"])
        data["hidden"] = tuple(data["hidden"])
        data["reduce"] = ReduceMode(data["reduce"])
        return cls(**data)


def default_target_entropy(action_space: ActionSpace) -> float:
    """-dim for continuous spaces, 0.5 * log|A| for discrete ones."""
    if action_space.discrete:
        return 0.5 * math.log(action_space.n)
    return -float(action_space.dim)


class Temperature(nn.Module):
    """Entropy temperature, fixed or learned through log-alpha."""

    def __init__(self, initial: float, auto: bool) -> None:
        super().__init__()
        self.auto: bool = auto
        self.fixed: float = float(initial)
        self.log_alpha = nn.Parameter(
            torch.tensor(math.log(max(initial, 1e-8))), requires_grad=auto
        )

    def forward(self) -> torch.Tensor:
        if self.auto:
            return self.log_alpha.exp()
        return torch.tensor(self.fixed, dtype=self.log_alpha.dtype)

    @property
    def value(self) -> float:
        return float(self().detach())


@dataclass
class UpdateReport:
    """Scalar diagnostics of one algorithm update."""

    critic: Optional[float] = None
    actor: Optional[float] = None
    value: Optional[float] = None
    behavior: Optional[float] = None
    penalty: Optional[float] = None
    alpha_loss: Optional[float] = None
    alpha: Optional[float] = None
    mean_q: Optional[float] = None
    extra: Dict[str, float] = field(default_factory=dict)

    def validate(self) -> "UpdateReport":
        """Raise RuntimeError when any reported scalar is not finite."""
        for name, value in self.as_dict().items():
            if not np.isfinite(value):
                raise RuntimeError(f"Non-finite {name} in update report: {value}")
        return self

    def as_dict(self) -> Dict[str, float]:
        result: Dict[str, float] = {
            item.name: getattr(self, item.name)
            for item in fields(self)
            if item.name != "extra" and getattr(self, item.name) is not None
        }
        result.update(self.extra)
        return result


class Agent(nn.Module):  # pylint: disable = (too-many-instance-attributes)
    """Actor, critic ensemble with targets and optional value, behavior-clone
    and trust-region networks, each with its own Adam optimizer.
    """

    def __init__(self, spec: AgentSpec, generator: Optional[torch.Generator] = None) -> None:
        super().__init__()
        self.spec: AgentSpec = spec
        space: ActionSpace = spec.action_space
        self.actor: Policy = make_policy(spec.state_dim, space, spec.hidden, generator)
        self.critics = CriticEnsemble(
            spec.state_dim,
            spec.action_size,
            space.discrete,
            spec.ensemble_size,
            spec.hidden,
            generator,
        )
        self.target_critics: CriticEnsemble = copy.deepcopy(self.critics)
        self.target_critics.requires_grad_(False)
        self.value: Optional[ValueNetwork] = (
            ValueNetwork(spec.state_dim, spec.hidden, generator) if spec.with_value else None
        )
        self.behavior: Optional[Policy] = (
            make_policy(spec.state_dim, space, spec.hidden, generator)
            if spec.with_behavior
            else None
        )
        self.prior_actor: Optional[Policy] = None
        if spec.with_prior:
            self.prior_actor = copy.deepcopy(self.actor)
            self.prior_actor.requires_grad_(False)
        self.temperature = Temperature(spec.temperature, spec.auto_entropy)
        self.optimizers: Dict[str, torch.optim.Optimizer] = {}
        self.reset_optimizers()

    def reset_optimizers(self) -> None:
        """(Re)create one Adam optimizer per trained network."""
        rate: float = self.spec.learning_rate
        self.optimizers = {
            "actor": make_optimizer(self.actor, rate),
            "critic": make_optimizer(self.critics, rate),
        }
        if self.value is not None:
            self.optimizers["value"] = make_optimizer(self.value, rate)
        if self.behavior is not None:
            self.optimizers["behavior"] = make_optimizer(self.behavior, rate)
        if self.spec.auto_entropy:
            self.optimizers["alpha"] = make_optimizer([self.temperature.log_alpha], rate)

    @property
    def discrete(self) -> bool:
        return self.spec.action_space.discrete

    @property
    def reduce(self) -> ReduceMode:
        return self.spec.reduce

    @property
    def optimism(self) -> Optional[OptimisticRegion]:
        return self.critics.optimism

    def attach_optimism(self, region: Optional[OptimisticRegion]) -> None:
        """Share one optimistic region between online and target critics."""
        self.critics.optimism = region
        self.target_critics.optimism = region

    def update_targets(self, rate: float) -> None:
        polyak_update(self.target_critics, self.critics, rate)

    def ensure_prior(self) -> Policy:
        """Create the trust-region actor copy if missing."""
        if self.prior_actor is None:
            self.prior_actor = copy.deepcopy(self.actor)
            self.prior_actor.requires_grad_(False)
            self.spec.with_prior = True
        return self.prior_actor

    def set_temperature(self, value: float, auto: bool) -> None:
        """Replace the entropy temperature; the other optimizers keep their state."""
        if value < 0 or (auto and value <= 0):
            raise ValueError(f"Invalid temperature {value}")
        self.spec.temperature = float(value)
        self.spec.auto_entropy = auto
        self.temperature = Temperature(value, auto)
        self.optimizers.pop("alpha", None)
        if auto:
            self.optimizers["alpha"] = make_optimizer(
                [self.temperature.log_alpha], self.spec.learning_rate
            )

    def optimizer_states(self) -> Dict[str, Any]:
        return {name: opt.state_dict() for name, opt in self.optimizers.items()}

    def load_optimizer_states(self, states: Dict[str, Any]) -> None:
        for name, state in states.items():
            if name in self.optimizers:
                self.optimizers[name].load_state_dict(state)


class BaseAlgorithm(ABC):
    """Abstract update rule operating on an Agent."""

    def __init__(
        self,
        agent: Agent,
        generator: Optional[torch.Generator] = None,
        polyak_rate: float = 0.005,
    ) -> None:
        self.agent: Agent = agent
        self.generator: Optional[torch.Generator] = generator
        self.polyak_rate: float = polyak_rate
        self.updates: int = 0

    @abstractmethod
    def update(self, batch: TransitionBatch) -> UpdateReport:
        """Run one update on a minibatch.

        Args:
            batch: Minibatch of transitions.

        Returns:
            Scalar diagnostics of the update.
        """

    def draw_noise(self, batch: TransitionBatch, samples: int = 1) -> torch.Tensor:
        """Noise for `samples` actor draws per batch row."""
        dtype: torch.dtype = next(self.agent.actor.parameters()).dtype
        return self.agent.actor.draw_noise(len(batch) * samples, self.generator, dtype)

    @property
    def algorithm_name(self) -> str:
        """Get algorithm name.

        Returns:
            str: Name of algorithm.
        """
        return type(self).__name__
