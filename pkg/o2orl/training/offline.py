"""Offline training loop with a periodic frozen-policy learning curve."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import torch

from o2orl.algos.base_agent import BaseAlgorithm, UpdateReport
from o2orl.data.normalization import normalized_return
from o2orl.data.replay_buffer import ReplayBuffer
from o2orl.data.types import TransitionDataset
from o2orl.env.base import Environment
from o2orl.logger import create_logger
from o2orl.seeding import SeedStream, derive_seed, make_generators
from o2orl.training.rollout import evaluate_policy, evaluation_mode

_LOGGER: Optional[logging.Logger] = None

OFFLINE_CURVE_COLUMNS: List[str] = [
    "update",
    "return_raw",
    "return_norm",
    "critic_loss",
    "actor_loss",
    "mean_q",
]


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


@dataclass
class OfflineSettings:
    """Number of updates, minibatch size and evaluation cadence."""

    steps: int
    batch_size: int = 256
    eval_period: int = 1000
    eval_episodes: int = 5
    deterministic_eval: bool = True

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError(f"Offline steps must be >= 0, got {self.steps}")
        if self.eval_period < 1:
            raise ValueError(f"Evaluation period must be >= 1, got {self.eval_period}")


def evaluate_actor(
    algorithm: BaseAlgorithm,
    env: Environment,
    seeds: List[int],
    generator: torch.Generator,
    deterministic: bool = True,
) -> float:
    """Mean raw return of the agent's actor over one episode per seed."""
    actor = algorithm.agent.actor
    with evaluation_mode(algorithm.agent):
        returns: np.ndarray = evaluate_policy(
            env, lambda state, _: actor.act(state, generator, deterministic), seeds
        )
    return float(returns.mean())


def train_offline(
    algorithm: BaseAlgorithm,
    dataset: TransitionDataset,
    env: Environment,
    settings: OfflineSettings,
    seed: int,
) -> pd.DataFrame:
    """Train `algorithm` on minibatches of `dataset`.

    The actor is evaluated before the first update, every `eval_period`
    updates and after the last one.

    Args:
        algorithm: Offline algorithm wrapping the agent to train.
        dataset: Offline dataset; never modified.
        env: Environment used only for evaluation rollouts.
        settings: Step count and evaluation cadence.
        seed: Seed of this training run.

    Returns:
        Offline learning curve with columns `OFFLINE_CURVE_COLUMNS`.

    Raises:
        ValueError: if the dataset is empty and updates are requested.
    """
    if settings.steps > 0 and len(dataset) == 0:
        raise ValueError("Cannot train offline on an empty dataset.")
    rng, generator = make_generators(derive_seed(seed, SeedStream.OFFLINE))
    buffer: ReplayBuffer = ReplayBuffer.from_dataset(dataset, online_budget=0)
    dtype: torch.dtype = next(algorithm.agent.actor.parameters()).dtype
    rows: List[Dict[str, float]] = []

    def record(update: int, report: Optional[UpdateReport]) -> None:
        seeds: List[int] = [
            derive_seed(seed, SeedStream.EVALUATION, update, index)
            for index in range(settings.eval_episodes)
        ]
        raw: float = evaluate_actor(
            algorithm, env, seeds, generator, settings.deterministic_eval
        )
        norm: float = (
            normalized_return(raw, env.spec)
            if env.spec.reference_returns is not None
            else float("nan")
        )
        rows.append(
            {
                "update": update,
                "return_raw": raw,
                "return_norm": norm,
                "critic_loss": np.nan if report is None or report.critic is None else report.critic,
                "actor_loss": np.nan if report is None or report.actor is None else report.actor,
                "mean_q": np.nan if report is None or report.mean_q is None else report.mean_q,
            }
        )
        log().info(
            "%s offline update %d: evaluation return %.3f.",
            algorithm.algorithm_name,
            update,
            raw,
        )

    record(0, None)
    report: Optional[UpdateReport] = None
    for update in range(1, settings.steps + 1):
        report = algorithm.update(buffer.sample(settings.batch_size, rng, dtype))
        if update % settings.eval_period == 0 or update == settings.steps:
            record(update, report)
    return pd.DataFrame(rows, columns=OFFLINE_CURVE_COLUMNS)
