"""Guide-step schedulers: windowed-return JSRL, fixed curricula and the AJS rule."""
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Optional

import numpy as np


class Schedule(Enum):
    """Enum of fixed exploration curricula."""

    SIGMOID = "sigmoid"
    LINEAR = "linear"
    REV_EXP = "rev_exp"


def exploration_fraction(progress: float, schedule: Schedule, kappa: float) -> float:
    """Fraction of the horizon handed to the explorer.

    Args:
        progress: Episode index over total episodes, in [0, 1].
        schedule: Curriculum shape.
        kappa: Stretch; larger values hand over more slowly.

    Returns:
        Fraction in [0, 1].
    """
    if kappa <= 0:
        raise ValueError(f"Schedule stretch must be > 0, got {kappa}")
    scaled: float = progress / kappa
    if schedule == Schedule.LINEAR:
        return min(1.0, scaled)
    if schedule == Schedule.SIGMOID:
        return 1.0 / (1.0 + math.exp(-10.0 * (scaled - 0.5)))
    return min(1.0, 1.0 - math.exp(-5.0 * scaled))


def fixed_schedule_h(
    episode_index: int,
    total_episodes: int,
    schedule: Schedule,
    kappa: float,
    horizon: int,
) -> int:
    """Guide step round(T * (1 - f(episode_index / total_episodes))).

    Raises:
        ValueError: if the episode index lies outside [0, total_episodes].
    """
    if total_episodes < 1 or not 0 <= episode_index <= total_episodes:
        raise ValueError(f"Episode {episode_index} outside [0, {total_episodes}]")
    fraction: float = exploration_fraction(episode_index / total_episodes, schedule, kappa)
    return int(round(horizon * (1.0 - fraction)))


def reduction_step(horizon: int, budget_steps: int, reductions: Optional[int] = None) -> float:
    """Guide-step reduction 2T / j with j = ceil(budget / T) unless given."""
    count: int = reductions if reductions is not None else math.ceil(budget_steps / horizon)
    return 2.0 * horizon / max(count, 1)


@dataclass
class JumpStartState:
    """Guide step with the bookkeeping of its scheduler."""

    horizon: int
    delta: float
    tolerance: float = 0.0
    window_size: int = 5
    best: float = -math.inf
    h: Optional[float] = None
    episodes: int = 0
    window: Deque[float] = field(default_factory=deque)

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError(f"Guide-step reduction must be > 0, got {self.delta}")
        if self.tolerance < 0:
            raise ValueError(f"Tolerance must be >= 0, got {self.tolerance}")
        self.h = (
            float(self.horizon) if self.h is None else min(max(self.h, 0.0), self.horizon)
        )
        self.window = deque(self.window, maxlen=self.window_size)

    def reduce(self, amount: float) -> float:
        self.h = max(0.0, float(self.h) - amount)
        return self.h


def jsrl_update_h(js: JumpStartState, latest_return: float) -> float:
    """Shrink h by delta when the window mean reaches the tolerated best.

    The threshold is best - tolerance * |best| so negative returns behave.

    Returns:
        Updated guide step.
    """
    js.window.append(float(latest_return))
    js.episodes += 1
    mean: float = float(np.mean(js.window))
    improved: bool = (
        math.isinf(js.best) or mean >= js.best - js.tolerance * abs(js.best)
    )
    if improved:
        js.reduce(js.delta)
    js.best = max(js.best, mean)
    return float(js.h)


def ajs_episode_end(js: JumpStartState, v_ft: float, v_init: float) -> float:
    """Shrink h by delta iff v_ft >= v_init.

    Raises:
        ValueError: if an estimate is not finite.
    """
    if not (math.isfinite(v_ft) and math.isfinite(v_init)):
        raise ValueError(f"Value estimates must be finite, got {v_ft}, {v_init}")
    js.episodes += 1
    if v_ft >= v_init:
        js.reduce(js.delta)
    return float(js.h)
