"""Transition containers shared by datasets, buffers and learners."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import torch


class DatasetQuality(Enum):
    """Enum of offline dataset qualities."""

    EXPERT = "expert"
    MEDIUM = "medium"
    MEDIUM_EXPERT = "medium-expert"
    RANDOM = "random"

    @property
    def tag(self) -> int:
        """Byte tag used by the binary dataset format."""
        return list(DatasetQuality).index(self)

    @classmethod
    def from_tag(cls, tag: int) -> "DatasetQuality":
        members: List[DatasetQuality] = list(cls)
        if not 0 <= tag < len(members):
            raise ValueError(f"Unknown quality tag {tag}")
        return members[tag]


@dataclass
class Transition:
    """Single (s, a, r, s', discount, timeout, episode_step) tuple."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    discount: float
    timeout: bool
    episode_step: int


@dataclass
class TransitionBatch:
    """Minibatch of transitions as tensors."""

    states: torch.Tensor
    actions: torch.Tensor
    rewards: torch.Tensor
    next_states: torch.Tensor
    discounts: torch.Tensor
    timeouts: torch.Tensor
    episode_steps: torch.Tensor

    def __len__(self) -> int:
        return int(self.states.shape[0])

    def to(self, dtype: torch.dtype) -> "TransitionBatch":
        """Cast the floating point fields."""
        return TransitionBatch(
            states=self.states.to(dtype),
            actions=self.actions.to(dtype),
            rewards=self.rewards.to(dtype),
            next_states=self.next_states.to(dtype),
            discounts=self.discounts.to(dtype),
            timeouts=self.timeouts,
            episode_steps=self.episode_steps,
        )


_COLUMNS: Tuple[str, ...] = (
    "states",
    "actions",
    "rewards",
    "next_states",
    "discounts",
    "timeouts",
    "episode_steps",
)


@dataclass
class TransitionDataset:
    """Columnar store of transitions."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    discounts: np.ndarray
    timeouts: np.ndarray
    episode_steps: np.ndarray

    def __post_init__(self) -> None:
        sizes = {len(getattr(self, name)) for name in _COLUMNS}
        if len(sizes) != 1:
            raise ValueError(f"Dataset columns differ in length: {sizes}")

    @classmethod
    def empty(cls, state_dim: int, action_width: int) -> "TransitionDataset":
        return cls(
            states=np.zeros((0, state_dim)),
            actions=np.zeros((0, action_width)),
            rewards=np.zeros(0),
            next_states=np.zeros((0, state_dim)),
            discounts=np.zeros(0),
            timeouts=np.zeros(0, dtype=bool),
            episode_steps=np.zeros(0, dtype=np.int64),
        )

    @classmethod
    def from_transitions(
        cls, transitions: Iterable[Transition], state_dim: int, action_width: int
    ) -> "TransitionDataset":
        """Stack transitions into columns."""
        items: List[Transition] = list(transitions)
        if not items:
            return cls.empty(state_dim, action_width)
        return cls(
            states=np.stack([item.state for item in items]).astype(np.float64),
            actions=np.stack([item.action for item in items]).astype(np.float64),
            rewards=np.array([item.reward for item in items], dtype=np.float64),
            next_states=np.stack([item.next_state for item in items]).astype(np.float64),
            discounts=np.array([item.discount for item in items], dtype=np.float64),
            timeouts=np.array([item.timeout for item in items], dtype=bool),
            episode_steps=np.array([item.episode_step for item in items], dtype=np.int64),
        )

    @classmethod
    def concatenate(cls, parts: List["TransitionDataset"]) -> "TransitionDataset":
        return cls(
            **{name: np.concatenate([getattr(p, name) for p in parts]) for name in _COLUMNS}
        )

    def __len__(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def state_dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def action_width(self) -> int:
        return int(self.actions.shape[1])

    def columns(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _COLUMNS}

    def transition(self, index: int) -> Transition:
        return Transition(
            state=self.states[index],
            action=self.actions[index],
            reward=float(self.rewards[index]),
            next_state=self.next_states[index],
            discount=float(self.discounts[index]),
            timeout=bool(self.timeouts[index]),
            episode_step=int(self.episode_steps[index]),
        )

    def start_states(self) -> np.ndarray:
        """States of rows with episode_step 0."""
        return self.states[self.episode_steps == 0]

    def episode_returns(self) -> np.ndarray:
        """Undiscounted reward sums of the stored episodes, split at episode_step 0."""
        if len(self) == 0:
            return np.zeros(0)
        starts: np.ndarray = np.flatnonzero(self.episode_steps == 0)
        if starts.size == 0 or starts[0] != 0:
            starts = np.concatenate([[0], starts])
        return np.add.reduceat(self.rewards, starts)

    def batch(
        self, indices: np.ndarray, dtype: torch.dtype = torch.float32
    ) -> TransitionBatch:
        """Gather rows as a tensor batch."""
        return TransitionBatch(
            states=torch.as_tensor(self.states[indices], dtype=dtype),
            actions=torch.as_tensor(self.actions[indices], dtype=dtype),
            rewards=torch.as_tensor(self.rewards[indices], dtype=dtype),
            next_states=torch.as_tensor(self.next_states[indices], dtype=dtype),
            discounts=torch.as_tensor(self.discounts[indices], dtype=dtype),
            timeouts=torch.as_tensor(self.timeouts[indices]),
            episode_steps=torch.as_tensor(self.episode_steps[indices]),
        )


@dataclass
class DatasetMeta:
    """Description of a generated offline dataset."""

    env_name: str
    quality: DatasetQuality
    behavior: str
    size: int
    state_dim: int
    action_discrete: bool
    action_size: int
    action_low: float = -1.0
    action_high: float = 1.0
    reference_returns: Optional[Tuple[float, float]] = None
    seed: Optional[int] = None
    extra: Dict[str, float] = field(default_factory=dict)
