"""Abstract Environment class and shared environment types."""
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

ActionT = np.ndarray
"""Environment action: a (1,) array holding the index for discrete spaces."""


@dataclass(frozen=True)
class ActionSpace:
    """Action space descriptor.

    Discrete spaces have `n` actions; continuous spaces have `dim`
    dimensions bounded by [`low`, `high`].
    """

    discrete: bool
    n: int = 0
    dim: int = 0
    low: float = -1.0
    high: float = 1.0

    @classmethod
    def discrete_space(cls, n: int) -> "ActionSpace":
        if n < 1:
            raise ValueError(f"Discrete action space needs n >= 1, got {n}")
        return cls(discrete=True, n=n, dim=1)

    @classmethod
    def continuous_space(cls, dim: int, low: float, high: float) -> "ActionSpace":
        if dim < 1 or not high > low:
            raise ValueError(f"Invalid continuous space dim={dim} [{low}, {high}]")
        return cls(discrete=False, dim=dim, low=low, high=high)

    @property
    def width(self) -> int:
        """Width of a stored action vector."""
        return 1 if self.discrete else self.dim

    def sample(self, rng: np.random.Generator) -> ActionT:
        """Sample an action uniformly.

        Args:
            rng: Generator used for sampling.

        Returns:
            Uniformly random action.
        """
        if self.discrete:
            return np.array([rng.integers(self.n)], dtype=np.float64)
        return rng.uniform(self.low, self.high, size=self.dim)


@dataclass(frozen=True)
class EnvSpec:
    """Static description of an environment."""

    name: str
    state_dim: int
    action_space: ActionSpace
    horizon: int
    gamma: float
    reference_returns: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"Horizon must be >= 1, got {self.horizon}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"Discount must lie in [0, 1), got {self.gamma}")
        if self.reference_returns is not None:
            random_return, expert_return = self.reference_returns
            if not expert_return > random_return:
                raise ValueError(
                    "Expert reference return must exceed the random one, got "
                    + f"{self.reference_returns}"
                )

    def with_reference_returns(self, random_return: float, expert_return: float):
        """Return a copy holding normalization bounds."""
        return replace(self, reference_returns=(random_return, expert_return))


@dataclass
class StepResult:
    """Outcome of one environment step."""

    next_state: np.ndarray
    reward: float
    terminal: bool
    timeout: bool


class Environment(ABC):
    """Abstract single-threaded environment state machine."""

    def __init__(self, spec: EnvSpec) -> None:
        self.spec: EnvSpec = spec
        self._rng: np.random.Generator = np.random.default_rng(0)
        self._state: Optional[np.ndarray] = None
        self.step_count: int = 0

    @property
    def state(self) -> np.ndarray:
        if self._state is None:
            raise RuntimeError("Environment has to be reset before stepping.")
        return self._state

    def reset(self, seed: int) -> np.ndarray:
        """Reset environment and draw a start state.

        Args:
            seed: Seed of the episode; identical seeds give identical episodes.

        Returns:
            Start state.
        """
        self._rng = np.random.default_rng(int(seed))
        self.step_count = 0
        self._state = self._start_state(self._rng)
        return self._state.copy()

    def step(self, action: ActionT) -> StepResult:
        """Advance the environment by one step.

        Args:
            action: Discrete index (as (1,) array or int) or continuous vector.

        Returns:
            Step result with terminal and timeout flags.

        Raises:
            ValueError: if action is invalid for the action space.
        """
        checked: np.ndarray = self._check_action(action)
        next_state, reward, terminal = self._transition(self.state, checked)
        self.step_count += 1
        timeout: bool = self.step_count >= self.spec.horizon and not terminal
        self._state = next_state
        return StepResult(
            next_state=next_state.copy(),
            reward=float(reward),
            terminal=bool(terminal),
            timeout=bool(timeout),
        )

    def _check_action(self, action: ActionT) -> np.ndarray:
        space: ActionSpace = self.spec.action_space
        array: np.ndarray = np.atleast_1d(np.asarray(action, dtype=np.float64))
        if space.discrete:
            if array.shape != (1,) or array[0] != int(array[0]):
                raise ValueError(f"Discrete action must be one index, got {action}")
            if not 0 <= int(array[0]) < space.n:
                raise ValueError(f"Action index {int(array[0])} out of [0, {space.n})")
            return array
        if array.shape != (space.dim,):
            raise ValueError(f"Continuous action must have shape ({space.dim},)")
        if not np.all(np.isfinite(array)):
            raise ValueError(f"Non-finite continuous action {array}")
        return np.clip(array, space.low, space.high)

    @abstractmethod
    def _start_state(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a start state."""

    @abstractmethod
    def _transition(
        self, state: np.ndarray, action: np.ndarray
    ) -> Tuple[np.ndarray, float, bool]:
        """Compute (next_state, reward, terminal) for a validated action."""

    has_expert: bool = False

    def excludes(self, state: np.ndarray) -> bool:  # pylint: disable = (unused-argument)
        """Whether offline data must never reach `state`."""
        return False

    def expert_action(self, state: np.ndarray) -> ActionT:
        """Scripted expert controller.

        Raises:
            NotImplementedError: if the environment has no expert.
        """
        raise NotImplementedError(f"{self.spec.name} has no scripted expert.")


EnvFactory = Callable[[], Environment]


def episode_return(
    env: Environment,
    policy: Callable[[np.ndarray], ActionT],
    seed: int,
) -> float:
    """Roll out one undiscounted episode with a numpy policy.

    Args:
        env: Environment to roll out in.
        policy: Maps a state to an action.
        seed: Episode seed.

    Returns:
        Sum of rewards.
    """
    state: np.ndarray = env.reset(seed)
    total: float = 0.0
    while True:
        result: StepResult = env.step(policy(state))
        total += result.reward
        state = result.next_state
        if result.terminal or result.timeout:
            return total


def compute_reference_returns(
    env: Environment, episodes: int = 100, seed: int = 0
) -> Tuple[float, float]:
    """Compute normalization bounds of an environment.

    Random return is the mean return of the uniform policy, expert return the
    mean return of the scripted expert, each over `episodes` episodes.

    Args:
        env: Environment with a scripted expert.
        episodes: Number of episodes per policy. Defaults to 100.
        seed: Base seed of the rollouts.

    Returns:
        Tuple of (random_return, expert_return).

    Raises:
        ValueError: if the environment has no expert.
    """
    if not env.has_expert:
        raise ValueError(f"Environment {env.spec.name} has no scripted expert.")
    rng: np.random.Generator = np.random.default_rng(seed)
    space: ActionSpace = env.spec.action_space

    random_returns = [
        episode_return(env, lambda _: space.sample(rng), seed + index)
        for index in range(episodes)
    ]
    expert_returns = [
        episode_return(env, env.expert_action, seed + index)  # type: ignore
        for index in range(episodes)
    ]
    return float(np.mean(random_returns)), float(np.mean(expert_returns))
