"""Offline dataset generation with graded behavior quality."""
import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from o2orl.data.types import DatasetMeta, DatasetQuality, Transition, TransitionDataset
from o2orl.env.base import ActionSpace, Environment, StepResult
from o2orl.logger import create_logger

_LOGGER: Optional[logging.Logger] = None

EXPERT_NOISE: float = 0.05
MEDIUM_EXPERT_PROBABILITY: float = 0.5
MAX_REJECTED_EPISODES: int = 10000

BehaviorPolicy = Callable[[np.ndarray, np.random.Generator], np.ndarray]


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


def noisy_expert(env: Environment) -> BehaviorPolicy:
    """Scripted expert with small action noise.

    Continuous actions get Gaussian noise with std 0.05 of the action range;
    discrete actions are replaced by a uniform one with probability 0.05.
    """
    space: ActionSpace = env.spec.action_space

    def policy(state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        action: np.ndarray = env.expert_action(state)
        if space.discrete:
            return space.sample(rng) if rng.random() < EXPERT_NOISE else action
        sigma: float = EXPERT_NOISE * (space.high - space.low)
        return np.clip(action + rng.normal(0.0, sigma, size=space.dim), space.low, space.high)

    return policy


def medium(env: Environment) -> BehaviorPolicy:
    """Noisy expert with probability 0.5 per step, uniform action otherwise."""
    expert: BehaviorPolicy = noisy_expert(env)
    space: ActionSpace = env.spec.action_space

    def policy(state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if rng.random() < MEDIUM_EXPERT_PROBABILITY:
            return expert(state, rng)
        return space.sample(rng)

    return policy


def uniform(env: Environment) -> BehaviorPolicy:
    """Uniformly random behavior."""
    space: ActionSpace = env.spec.action_space
    return lambda _, rng: space.sample(rng)


def collect(
    env: Environment,
    behavior: BehaviorPolicy,
    n_transitions: int,
    rng: np.random.Generator,
    max_rejections: int = MAX_REJECTED_EPISODES,
) -> TransitionDataset:
    """Roll out `behavior` until exactly `n_transitions` are stored.

    An episode reaching a state the environment excludes from offline data
    is discarded as a whole. The last episode is cut once the dataset is full.

    Args:
        env: Environment to collect from.
        behavior: Behavior policy.
        n_transitions: Number of transitions.
        rng: Generator driving episode seeds and behavior noise.
        max_rejections: Consecutive discarded episodes tolerated.

    Returns:
        Dataset of exactly `n_transitions` rows.

    Raises:
        ValueError: if `max_rejections` episodes in a row were discarded.
    """
    gamma: float = env.spec.gamma
    rows: List[Transition] = []
    rejected: int = 0
    while len(rows) < n_transitions:
        episode: List[Transition] = []
        state: np.ndarray = env.reset(int(rng.integers(2**31 - 1)))
        while True:
            action: np.ndarray = np.atleast_1d(
                np.asarray(behavior(state, rng), dtype=np.float64)
            )
            result: StepResult = env.step(action)
            if env.excludes(result.next_state):
                episode = []
                break
            episode.append(
                Transition(
                    state=state,
                    action=action,
                    reward=result.reward,
                    next_state=result.next_state,
                    discount=0.0 if result.terminal else gamma,
                    timeout=result.timeout,
                    episode_step=len(episode),
                )
            )
            state = result.next_state
            if result.terminal or result.timeout:
                break
        if not episode:
            rejected += 1
            if rejected >= max_rejections:
                raise ValueError(
                    f"{rejected} episodes in a row entered states excluded from "
                    f"{env.spec.name} data; the behavior policy cannot avoid them."
                )
            continue
        rejected = 0
        rows.extend(episode[: n_transitions - len(rows)])
    return TransitionDataset.from_transitions(
        rows, env.spec.state_dim, env.spec.action_space.width
    )


def generate_dataset(
    env: Environment,
    quality: DatasetQuality,
    n_transitions: int,
    seed: int,
) -> Tuple[TransitionDataset, DatasetMeta]:
    """Generate an offline dataset of the requested quality.

    Medium-expert concatenates an expert half and a medium half.

    Args:
        env: Environment to collect from.
        quality: Dataset quality.
        n_transitions: Exact number of transitions.
        seed: Generation seed.

    Returns:
        Tuple of dataset and its metadata.

    Raises:
        ValueError: if a non-random quality is requested from an environment
            without a scripted expert, `n_transitions` is negative or the
            behavior keeps entering excluded states.
    """
    if n_transitions < 0:
        raise ValueError(f"Dataset size must be >= 0, got {n_transitions}")
    if quality != DatasetQuality.RANDOM and not env.has_expert:
        raise ValueError(
            f"Quality {quality.value} needs a scripted expert, {env.spec.name} has none."
        )
    rng: np.random.Generator = np.random.default_rng(seed)
    behavior: str
    dataset: TransitionDataset
    if quality == DatasetQuality.EXPERT:
        behavior = f"scripted expert, action noise {EXPERT_NOISE}"
        dataset = collect(env, noisy_expert(env), n_transitions, rng)
    elif quality == DatasetQuality.MEDIUM:
        behavior = f"expert with probability {MEDIUM_EXPERT_PROBABILITY}, else uniform"
        dataset = collect(env, medium(env), n_transitions, rng)
    elif quality == DatasetQuality.MEDIUM_EXPERT:
        behavior = "concatenation of expert and medium halves"
        half: int = n_transitions // 2
        dataset = TransitionDataset.concatenate(
            [
                collect(env, noisy_expert(env), half, rng),
                collect(env, medium(env), n_transitions - half, rng),
            ]
        )
    else:
        behavior = "uniform random"
        dataset = collect(env, uniform(env), n_transitions, rng)

    space: ActionSpace = env.spec.action_space
    meta = DatasetMeta(
        env_name=env.spec.name,
        quality=quality,
        behavior=behavior,
        size=len(dataset),
        state_dim=env.spec.state_dim,
        action_discrete=space.discrete,
        action_size=space.n if space.discrete else space.dim,
        action_low=space.low,
        action_high=space.high,
        reference_returns=env.spec.reference_returns,
        seed=seed,
    )
    log().info(
        "Generated %s dataset for %s with %d transitions.",
        quality.value,
        env.spec.name,
        len(dataset),
    )
    return dataset, meta
