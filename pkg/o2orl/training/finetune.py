"""Online fine-tuning loop and the single-agent strategies it drives.

A strategy decides how actions are chosen and which learners update;
the loop owns the environment, the replay buffer, evaluation and the
run record. One update runs per environment step.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch

from o2orl.algos.algorithm import PEX, PROTO
from o2orl.algos.base_agent import Agent, BaseAlgorithm, UpdateReport
from o2orl.callbacks.base import Callback
from o2orl.data.normalization import normalized_return
from o2orl.data.replay_buffer import ReplayBuffer
from o2orl.data.types import Transition, TransitionBatch
from o2orl.env.base import Environment, StepResult
from o2orl.logger import create_logger
from o2orl.seeding import SeedStream, derive_seed, make_generators
from o2orl.training.rollout import evaluate_policy, evaluation_mode
from o2orl.training.run_record import BASE_COLUMNS, RunRecord

_LOGGER: Optional[logging.Logger] = None


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


@dataclass
class FinetuneSettings:
    """Budget, minibatch and evaluation cadence of a fine-tuning run."""

    budget_steps: int
    batch_size: int = 256
    eval_period: int = 10
    eval_episodes: int = 5
    initial_eval_episodes: int = 20
    deterministic_eval: bool = True

    def __post_init__(self) -> None:
        if self.budget_steps < 0:
            raise ValueError(f"Budget must be >= 0, got {self.budget_steps}")
        if self.eval_period < 1 or self.eval_episodes < 1 or self.initial_eval_episodes < 1:
            raise ValueError("Evaluation period and episode counts must be >= 1.")


@dataclass
class FinetuneContext:  # pylint: disable = (too-many-instance-attributes)
    """Mutable state of one run shared with its strategy."""

    env: Environment
    buffer: ReplayBuffer
    settings: FinetuneSettings
    rng: np.random.Generator
    generator: torch.Generator
    start_states: np.ndarray
    total_steps: int = 0
    episode: int = 0

    @property
    def progress(self) -> float:
        """Fraction of the step budget consumed."""
        budget: int = self.settings.budget_steps
        return 1.0 if budget == 0 else min(self.total_steps / budget, 1.0)


class FinetuneStrategy(ABC):
    """Abstract fine-tuning strategy."""

    columns: Sequence[str] = ()

    def start(  # pylint: disable = (unused-argument)
        self, context: FinetuneContext
    ) -> Dict[str, float]:
        """Prepare the run; returns extra columns of the initial row."""
        return {}

    @abstractmethod
    def act(self, state: np.ndarray, t: int, context: FinetuneContext) -> np.ndarray:
        """Behavior action at episode step t (counted from 1)."""

    @abstractmethod
    def evaluation_act(
        self, state: np.ndarray, t: int, context: FinetuneContext
    ) -> np.ndarray:
        """Frozen-policy action used by evaluation rollouts."""

    @abstractmethod
    def update(self, context: FinetuneContext) -> UpdateReport:
        """Run the per-step learner updates."""

    def on_step(self, context: FinetuneContext) -> None:
        """Hook after each environment step and update."""

    def on_episode_end(  # pylint: disable = (unused-argument)
        self, episode_return: float, context: FinetuneContext
    ) -> Dict[str, float]:
        """Hook at episode end; returns extra columns of the episode row."""
        return {}

    @abstractmethod
    def modules(self) -> List[torch.nn.Module]:
        """Networks acting in the environment."""

    @property
    @abstractmethod
    def final_agent(self) -> Agent:
        """Agent stored as the fine-tuned checkpoint."""


def sample_batch(context: FinetuneContext, agent: Agent) -> TransitionBatch:
    """Sample a minibatch in the dtype of the agent networks."""
    dtype: torch.dtype = next(agent.actor.parameters()).dtype
    return context.buffer.sample(context.settings.batch_size, context.rng, dtype)


class AgentStrategy(FinetuneStrategy):
    """One agent acting with its own actor and updated by one algorithm."""

    def __init__(self, algorithm: BaseAlgorithm) -> None:
        self.algorithm: BaseAlgorithm = algorithm

    @property
    def final_agent(self) -> Agent:
        return self.algorithm.agent

    def modules(self) -> List[torch.nn.Module]:
        return [self.algorithm.agent]

    def act(self, state: np.ndarray, t: int, context: FinetuneContext) -> np.ndarray:
        return self.algorithm.agent.actor.act(state, context.generator)

    def evaluation_act(
        self, state: np.ndarray, t: int, context: FinetuneContext
    ) -> np.ndarray:
        return self.algorithm.agent.actor.act(
            state, context.generator, context.settings.deterministic_eval
        )

    def update(self, context: FinetuneContext) -> UpdateReport:
        if isinstance(self.algorithm, PROTO):
            self.algorithm.set_anneal_fraction(context.progress)
        return self.algorithm.update(sample_batch(context, self.algorithm.agent))


class PEXStrategy(AgentStrategy):
    """Acts by choosing between offline and online proposals."""

    def __init__(self, algorithm: PEX) -> None:
        super().__init__(algorithm)
        self.pex: PEX = algorithm
        self.offline_choices: int = 0

    def modules(self) -> List[torch.nn.Module]:
        return [self.pex.agent, self.pex.offline_actor]

    def act(self, state: np.ndarray, t: int, context: FinetuneContext) -> np.ndarray:
        action, from_offline = self.pex.select_action(state)
        self.offline_choices += int(from_offline)
        return action

    def evaluation_act(
        self, state: np.ndarray, t: int, context: FinetuneContext
    ) -> np.ndarray:
        action, _ = self.pex.select_action(state, context.settings.deterministic_eval)
        return action


def _evaluate(
    strategy: FinetuneStrategy,
    context: FinetuneContext,
    seed: int,
    episodes: int,
    round_index: int,
) -> float:
    seeds: List[int] = [
        derive_seed(seed, SeedStream.EVALUATION, round_index, index)
        for index in range(episodes)
    ]
    with evaluation_mode(*strategy.modules()):
        returns: np.ndarray = evaluate_policy(
            context.env,
            lambda state, t: strategy.evaluation_act(state, t, context),
            seeds,
        )
    return float(returns.mean())


def run_finetune(  # pylint: disable = (too-many-arguments, too-many-locals)
    env: Environment,
    strategy: FinetuneStrategy,
    buffer: ReplayBuffer,
    settings: FinetuneSettings,
    seed: int,
    callbacks: Sequence[Callback] = (),
    run_name: str = "finetune",
    config: Optional[Dict[str, Any]] = None,
    config_hash: str = "",
) -> RunRecord:
    """Fine-tune online for `settings.budget_steps` environment steps.

    Args:
        env: Environment with reference returns.
        strategy: Action selection and learner updates.
        buffer: Replay buffer preloaded with the offline dataset.
        settings: Budget and evaluation cadence.
        seed: Seed of this run.
        callbacks: Hooks notified of rows and evaluations.
        run_name: Name reported to callbacks.
        config: Configuration reported to callbacks.
        config_hash: Hash of the resolved configuration stored with the record.

    Returns:
        Run record with the initial evaluation row and one row per episode.
    """
    rng, generator = make_generators(derive_seed(seed, SeedStream.FINETUNE))
    context = FinetuneContext(
        env=env,
        buffer=buffer,
        settings=settings,
        rng=rng,
        generator=generator,
        start_states=buffer.offline_start_states(),
    )
    record = RunRecord(
        BASE_COLUMNS + list(strategy.columns), seed=seed, config_hash=config_hash
    )
    for callback in callbacks:
        callback.on_run_start(run_name, config or {})

    initial_extras: Dict[str, float] = strategy.start(context)
    p0_raw: float = _evaluate(strategy, context, seed, settings.initial_eval_episodes, 0)
    p0: float = normalized_return(p0_raw, env.spec)
    record.append(
        step=0,
        episode=0,
        return_raw=p0_raw,
        return_norm=p0,
        eval_return_norm=p0,
        **initial_extras,
    )
    log().info("Run %s starts from normalized return %.3f.", run_name, p0)

    gamma: float = env.spec.gamma
    while context.total_steps < settings.budget_steps:
        context.episode += 1
        state: np.ndarray = env.reset(derive_seed(seed, SeedStream.FINETUNE, context.episode))
        episode_return: float = 0.0
        t: int = 1
        while True:
            action: np.ndarray = strategy.act(state, t, context)
            result: StepResult = env.step(action)
            buffer.push(
                Transition(
                    state=state,
                    action=np.atleast_1d(action),
                    reward=result.reward,
                    next_state=result.next_state,
                    discount=0.0 if result.terminal else gamma,
                    timeout=result.timeout,
                    episode_step=t - 1,
                )
            )
            context.total_steps += 1
            report: UpdateReport = strategy.update(context)
            strategy.on_step(context)
            episode_return += result.reward
            state = result.next_state
            if result.terminal or result.timeout:
                break
            if context.total_steps >= settings.budget_steps:
                break
            t += 1

        log().debug("Episode %d last update %s", context.episode, report.as_dict())
        extras: Dict[str, float] = strategy.on_episode_end(episode_return, context)
        eval_norm: float = float("nan")
        if context.episode % settings.eval_period == 0:
            eval_norm = normalized_return(
                _evaluate(strategy, context, seed, settings.eval_episodes, context.episode),
                env.spec,
            )
            for callback in callbacks:
                callback.on_evaluation(context.total_steps, context.episode, eval_norm)
            log().info(
                "Episode %d, step %d: evaluation return %.3f.",
                context.episode,
                context.total_steps,
                eval_norm,
            )
        row: Dict[str, Any] = {
            "step": context.total_steps,
            "episode": context.episode,
            "return_raw": episode_return,
            "return_norm": normalized_return(episode_return, env.spec),
            "eval_return_norm": eval_norm,
            **extras,
        }
        record.append(**row)
        for callback in callbacks:
            callback.on_episode_end(row)

    for callback in callbacks:
        callback.on_run_end(record)
    return record
