"""Jump-start fine-tuning: a guide actor hands episodes over to an explorer.

The guide step h moves only at episode boundaries. JSRL shrinks it on
windowed returns or follows a fixed curriculum; Automatic Jump Start
shrinks it whenever the FQE estimate of the composite policy is no worse
than the estimate at full guidance.
"""
import copy
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch

from o2orl.algos.algorithm import IQL, SAC, InAC, UpdateMode
from o2orl.algos.base_agent import Agent, BaseAlgorithm, UpdateReport
from o2orl.algos.checkpoint import Checkpoint
from o2orl.callbacks.base import Callback
from o2orl.data.replay_buffer import ReplayBuffer
from o2orl.env.base import Environment
from o2orl.jumpstart.fqe import FQE, fqe_estimate, fqe_train
from o2orl.jumpstart.policy import CompositePolicy, js_policy
from o2orl.jumpstart.schedule import (
    JumpStartState,
    Schedule,
    ajs_episode_end,
    fixed_schedule_h,
    jsrl_update_h,
    reduction_step,
)
from o2orl.logger import create_logger
from o2orl.training.finetune import (
    FinetuneContext,
    FinetuneSettings,
    FinetuneStrategy,
    run_finetune,
    sample_batch,
)
from o2orl.training.run_record import ESTIMATE_COLUMNS, GUIDE_COLUMNS, RunRecord

_LOGGER: Optional[logging.Logger] = None


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


class GuideRule(Enum):
    """How the guide step moves between episodes."""

    WINDOW = "window"
    FIXED = "fixed"
    AJS = "ajs"


class GuideUpdate(Enum):
    """Whether the guide keeps learning online."""

    FROZEN = "frozen"
    INAC = "inac"


class ExplorerUpdate(Enum):
    """Update rule of the exploration agent."""

    SAC = "sac"
    IQL_FT = "iql_ft"


@dataclass
class JumpStartSettings:  # pylint: disable = (too-many-instance-attributes)
    """Guide-step rule and learner choices of a jump-start run."""

    rule: GuideRule = GuideRule.WINDOW
    tolerance: float = 0.0
    window_size: int = 5
    reductions: Optional[int] = None
    schedule: Schedule = Schedule.SIGMOID
    kappa: float = 0.5
    guide_update: GuideUpdate = GuideUpdate.FROZEN
    explorer: ExplorerUpdate = ExplorerUpdate.SAC
    polyak_rate: float = 0.005
    fqe_warm_start: int = 2000
    fqe_sync_period: int = 100
    fqe_learning_rate: float = 3e-4
    fqe_estimate_samples: int = 8
    fqe_period: Optional[int] = None
    fqe_iterations: Optional[int] = None


class JumpStartStrategy(FinetuneStrategy):  # pylint: disable = (too-many-instance-attributes)
    """Composite guide/explorer strategy with a JSRL guide-step rule."""

    columns: Sequence[str] = GUIDE_COLUMNS

    def __init__(
        self,
        guide: Agent,
        settings: JumpStartSettings,
        horizon: int,
        budget_steps: int,
        generator: Optional[torch.Generator] = None,
    ) -> None:
        """Initialize strategy.

        Args:
            guide: Offline-trained agent; its actor guides the first h steps.
            settings: Guide-step rule and learner choices.
            horizon: Episode horizon T.
            budget_steps: Online step budget.
            generator: Torch generator of both learners.
        """
        self.settings: JumpStartSettings = settings
        self.horizon: int = horizon
        self.total_episodes: int = max(math.ceil(budget_steps / horizon), 1)
        self.guide: Agent = guide
        self.explorer: Agent = copy.deepcopy(guide)
        self.guide_algorithm: Optional[BaseAlgorithm] = None
        if settings.guide_update == GuideUpdate.INAC:
            self.guide_algorithm = InAC(
                guide, generator, settings.polyak_rate, mode=UpdateMode.FINETUNE
            )
        else:
            guide.requires_grad_(False)
        self.explorer_algorithm: BaseAlgorithm = (
            IQL(self.explorer, generator, settings.polyak_rate, mode=UpdateMode.FINETUNE)
            if settings.explorer == ExplorerUpdate.IQL_FT
            else SAC(self.explorer, generator, settings.polyak_rate)
        )
        self.state = JumpStartState(
            horizon=horizon,
            delta=reduction_step(horizon, budget_steps, settings.reductions),
            tolerance=settings.tolerance,
            window_size=settings.window_size,
        )
        self.composite = CompositePolicy(guide.actor, self.explorer.actor, self.h)

    @property
    def h(self) -> float:
        return float(self.state.h)

    def _set_h(self, value: float) -> None:
        self.state.h = value
        self.composite.h = value

    @property
    def final_agent(self) -> Agent:
        return self.explorer

    def modules(self) -> List[torch.nn.Module]:
        return [self.guide, self.explorer]

    def start(self, context: FinetuneContext) -> Dict[str, float]:
        if self.settings.rule == GuideRule.FIXED:
            self._set_h(
                fixed_schedule_h(
                    0,
                    self.total_episodes,
                    self.settings.schedule,
                    self.settings.kappa,
                    self.horizon,
                )
            )
        return {"h": self.h}

    def act(self, state: np.ndarray, t: int, context: FinetuneContext) -> np.ndarray:
        return js_policy(self.composite, state, t, self.h, context.generator)

    def evaluation_act(
        self, state: np.ndarray, t: int, context: FinetuneContext
    ) -> np.ndarray:
        return js_policy(
            self.composite,
            state,
            t,
            self.h,
            context.generator,
            context.settings.deterministic_eval,
        )

    def update(self, context: FinetuneContext) -> UpdateReport:
        report: UpdateReport = self.explorer_algorithm.update(
            sample_batch(context, self.explorer)
        )
        if self.guide_algorithm is not None:
            guide_report: UpdateReport = self.guide_algorithm.update(
                sample_batch(context, self.guide)
            )
            report.extra.update(
                {f"guide_{name}": value for name, value in guide_report.as_dict().items()}
            )
        return report

    def next_h(self, episode_return: float, context: FinetuneContext) -> float:
        """Guide step of the next episode."""
        if self.settings.rule == GuideRule.FIXED:
            return float(
                fixed_schedule_h(
                    min(context.episode, self.total_episodes),
                    self.total_episodes,
                    self.settings.schedule,
                    self.settings.kappa,
                    self.horizon,
                )
            )
        return jsrl_update_h(self.state, episode_return)

    def on_episode_end(
        self, episode_return: float, context: FinetuneContext
    ) -> Dict[str, float]:
        used: float = self.h
        updated: float = self.next_h(episode_return, context)
        self._set_h(updated)
        if updated != used:
            log().info("Episode %d: guide step %.2f -> %.2f.", context.episode, used, updated)
        return {"h": used}


class AJSStrategy(JumpStartStrategy):
    """Jump start whose guide step follows FQE value comparisons."""

    columns: Sequence[str] = GUIDE_COLUMNS + ESTIMATE_COLUMNS

    def __init__(  # pylint: disable = (too-many-arguments)
        self,
        guide: Agent,
        settings: JumpStartSettings,
        horizon: int,
        budget_steps: int,
        generator: Optional[torch.Generator] = None,
        fqe_state: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(guide, settings, horizon, budget_steps, generator)
        self.fqe = FQE(
            guide.spec.state_dim,
            guide.spec.action_space,
            guide.spec.hidden,
            sync_period=settings.fqe_sync_period,
            learning_rate=settings.fqe_learning_rate,
            estimate_samples=settings.fqe_estimate_samples,
            generator=generator,
        )
        if fqe_state is not None:
            self.fqe.load_state_dict(fqe_state)
        self.fqe_period: int = settings.fqe_period or horizon
        self.fqe_iterations: int = (
            horizon if settings.fqe_iterations is None else settings.fqe_iterations
        )
        self.v_init: float = float("nan")
        self.start_states: np.ndarray = np.zeros((0, guide.spec.state_dim))

    def start(self, context: FinetuneContext) -> Dict[str, float]:
        self.start_states = context.start_states
        if len(self.start_states) == 0:
            log().warning("Offline data holds no start states, estimating on all offline states.")
            self.start_states = context.buffer.contents(context.buffer.watermark).states
        if context.settings.budget_steps == 0:
            log().info("No online budget, FQE warm start skipped.")
            return {"h": self.h, "v_init": self.v_init}
        fqe_train(
            self.fqe,
            context.buffer,
            self.composite,
            float(self.horizon),
            self.settings.fqe_warm_start,
            context.rng,
        )
        self.v_init = fqe_estimate(
            self.fqe, self.start_states, self.composite, 0, float(self.horizon)
        )
        log().info("FQE warm start done, v_init %.4f.", self.v_init)
        return {"h": self.h, "v_init": self.v_init}

    def on_step(self, context: FinetuneContext) -> None:
        if context.total_steps % self.fqe_period == 0:
            fqe_train(
                self.fqe,
                context.buffer,
                self.composite,
                self.h,
                self.fqe_iterations,
                context.rng,
            )

    def on_episode_end(
        self, episode_return: float, context: FinetuneContext
    ) -> Dict[str, float]:
        used: float = self.h
        v_ft: float = fqe_estimate(self.fqe, self.start_states, self.composite, 0, used)
        updated: float = ajs_episode_end(self.state, v_ft, self.v_init)
        self._set_h(updated)
        if updated != used:
            log().info(
                "Episode %d: v_ft %.4f >= v_init %.4f, guide step %.2f -> %.2f.",
                context.episode,
                v_ft,
                self.v_init,
                used,
                updated,
            )
        return {"h": used, "v_ft": v_ft, "v_init": self.v_init}


def build_ajs_strategy(
    checkpoint: Checkpoint,
    env: Environment,
    budget_steps: int,
    settings: JumpStartSettings,
    generator: Optional[torch.Generator] = None,
) -> AJSStrategy:
    """AJS strategy guided by an InAC checkpoint.

    Raises:
        ValueError: if the checkpoint agent lacks InAC's value and behavior networks.
    """
    agent: Agent = checkpoint.agent
    if agent.value is None or agent.behavior is None:
        raise ValueError("AJS needs an InAC checkpoint with value and behavior networks.")
    settings = copy.copy(settings)
    settings.rule = GuideRule.AJS
    settings.guide_update = GuideUpdate.INAC
    return AJSStrategy(
        agent, settings, env.spec.horizon, budget_steps, generator, checkpoint.fqe_state
    )


def ajs_run(  # pylint: disable = (too-many-arguments)
    checkpoint: Checkpoint,
    env: Environment,
    budget_steps: int,
    settings: JumpStartSettings,
    buffer: ReplayBuffer,
    seed: int,
    finetune_settings: Optional[FinetuneSettings] = None,
    generator: Optional[torch.Generator] = None,
    callbacks: Sequence[Callback] = (),
) -> RunRecord:
    """Fine-tune an InAC checkpoint with Automatic Jump Start.

    Args:
        checkpoint: Offline InAC checkpoint; its agent is the guide.
        env: Environment with reference returns.
        budget_steps: Online step budget.
        settings: Jump-start settings; rule and guide update are forced to
            AJS and InAC.
        buffer: Replay buffer preloaded with the offline dataset.
        seed: Seed of the run.
        finetune_settings: Evaluation cadence. Defaults to the standard cadence.
        generator: Torch generator of the learners.
        callbacks: Run callbacks.

    Returns:
        Run record with h, v_ft and v_init columns.

    Raises:
        ValueError: if the checkpoint agent lacks InAC's value and behavior networks.
    """
    strategy: AJSStrategy = build_ajs_strategy(checkpoint, env, budget_steps, settings, generator)
    if finetune_settings is None:
        finetune_settings = FinetuneSettings(budget_steps=budget_steps)
    return run_finetune(env, strategy, buffer, finetune_settings, seed, callbacks, "ajs")
