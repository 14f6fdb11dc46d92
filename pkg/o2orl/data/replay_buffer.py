"""Replay buffer preloaded with offline data that never evicts it."""
from typing import Dict, Optional

import numpy as np
import torch

from o2orl.data.types import Transition, TransitionBatch, TransitionDataset


class ReplayBuffer:
    """Fixed-capacity transition store with an offline watermark.

    Rows below the watermark hold the offline dataset and are never
    overwritten; when full, the oldest online row is replaced.
    """

    def __init__(self, capacity: int, state_dim: int, action_width: int) -> None:
        if capacity < 1:
            raise ValueError(f"Capacity must be >= 1, got {capacity}")
        self.capacity: int = capacity
        self._data: TransitionDataset = TransitionDataset(
            states=np.zeros((capacity, state_dim)),
            actions=np.zeros((capacity, action_width)),
            rewards=np.zeros(capacity),
            next_states=np.zeros((capacity, state_dim)),
            discounts=np.zeros(capacity),
            timeouts=np.zeros(capacity, dtype=bool),
            episode_steps=np.zeros(capacity, dtype=np.int64),
        )
        self.size: int = 0
        self.watermark: int = 0
        self._cursor: int = 0

    @classmethod
    def from_dataset(
        cls, dataset: TransitionDataset, online_budget: int
    ) -> "ReplayBuffer":
        """Create buffer of capacity |dataset| + online budget holding the dataset.

        Args:
            dataset: Offline dataset loaded below the watermark.
            online_budget: Number of online transitions that will be pushed.
        """
        buffer = cls(
            max(len(dataset) + online_budget, 1), dataset.state_dim, dataset.action_width
        )
        count: int = len(dataset)
        for name, column in dataset.columns().items():
            getattr(buffer._data, name)[:count] = column
        buffer.size = count
        buffer.watermark = count
        buffer._cursor = count
        return buffer

    def __len__(self) -> int:
        return self.size

    def push(self, transition: Transition) -> None:
        """Store a transition, overwriting the oldest online row when full.

        Raises:
            RuntimeError: if the buffer is full of offline rows.
        """
        if self.watermark >= self.capacity:
            raise RuntimeError("Replay buffer has no room above the offline watermark.")
        index: int = self._cursor
        data = self._data
        data.states[index] = transition.state
        data.actions[index] = transition.action
        data.rewards[index] = transition.reward
        data.next_states[index] = transition.next_state
        data.discounts[index] = transition.discount
        data.timeouts[index] = transition.timeout
        data.episode_steps[index] = transition.episode_step
        self.size = min(self.size + 1, self.capacity)
        self._cursor += 1
        if self._cursor >= self.capacity:
            self._cursor = self.watermark

    def sample(
        self,
        batch_size: int,
        rng: np.random.Generator,
        dtype: torch.dtype = torch.float32,
    ) -> TransitionBatch:
        """Draw `batch_size` rows uniformly with replacement.

        Raises:
            ValueError: if the buffer is empty.
        """
        if self.size == 0:
            raise ValueError("Cannot sample from an empty replay buffer.")
        indices: np.ndarray = rng.integers(0, self.size, size=batch_size)
        return self._data.batch(indices, dtype)

    def contents(self, limit: Optional[int] = None) -> TransitionDataset:
        """Copy of the stored rows."""
        count: int = self.size if limit is None else min(limit, self.size)
        return TransitionDataset(
            **{name: column[:count].copy() for name, column in self._data.columns().items()}
        )

    def offline_start_states(self) -> np.ndarray:
        """Start states (episode_step 0) of the offline rows."""
        steps: np.ndarray = self._data.episode_steps[: self.watermark]
        return self._data.states[: self.watermark][steps == 0]

    def state_dict(self) -> Dict[str, object]:
        return {"size": self.size, "watermark": self.watermark, "cursor": self._cursor}
