"""PointReach: continuous 2-D point mass steered toward a goal."""
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from o2orl.env.base import ActionSpace, ActionT, EnvSpec, Environment


@dataclass
class PointReachConfig:
    """PointReach parameters.

    A `success_radius` of 0 disables success termination.
    """

    goal: List[float] = field(default_factory=lambda: [0.8, 0.8])
    start_spread: float = 0.1
    step_size: float = 0.05
    reward_scale: float = math.sqrt(8.0)
    success_radius: float = 0.05
    horizon: int = 200
    gamma: float = 0.99


class PointReach(Environment):
    """Point mass in [-1, 1]^2 with dynamics x' = clip(x + step_size * a)."""

    has_expert = True

    def __init__(self, config: PointReachConfig) -> None:
        if config.reward_scale <= 0:
            raise ValueError(f"Reward scale must be positive, got {config.reward_scale}")
        self.config: PointReachConfig = config
        self.goal: np.ndarray = np.asarray(config.goal, dtype=np.float64)
        super().__init__(
            EnvSpec(
                name="point_reach",
                state_dim=2,
                action_space=ActionSpace.continuous_space(2, -1.0, 1.0),
                horizon=config.horizon,
                gamma=config.gamma,
            )
        )

    def _start_state(self, rng: np.random.Generator) -> np.ndarray:
        spread: float = self.config.start_spread
        return rng.uniform(-spread, spread, size=2)

    def _transition(
        self, state: np.ndarray, action: np.ndarray
    ) -> Tuple[np.ndarray, float, bool]:
        nxt: np.ndarray = np.clip(state + self.config.step_size * action, -1.0, 1.0)
        distance: float = float(np.linalg.norm(nxt - self.goal))
        reward: float = -distance / self.config.reward_scale
        return nxt, reward, distance < self.config.success_radius

    def expert_action(self, state: np.ndarray) -> ActionT:
        return np.clip((self.goal - state) / self.config.step_size, -1.0, 1.0)
