"""Episode rollouts and frozen-policy evaluation."""
from contextlib import contextmanager
from typing import Callable, Iterator, List, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from o2orl.env.base import Environment, StepResult

StepPolicy = Callable[[np.ndarray, int], np.ndarray]
"""Maps (state, t) to an action; t counts episode steps from 1."""


@contextmanager
def evaluation_mode(*modules: nn.Module) -> Iterator[None]:
    """Switch modules to eval mode without gradients, restoring both on exit."""
    previous: List[bool] = [module.training for module in modules]
    previous_grad: bool = torch.is_grad_enabled()
    for module in modules:
        module.eval()
    torch.set_grad_enabled(False)
    try:
        yield
    finally:
        torch.set_grad_enabled(previous_grad)
        for module, training in zip(modules, previous):
            module.train(training)


def run_episode(
    env: Environment, policy: StepPolicy, seed: int, gamma: float = 1.0
) -> Tuple[float, int]:
    """Roll out one episode.

    Args:
        env: Environment.
        policy: Step policy.
        seed: Episode seed.
        gamma: Discount of the returned sum. Defaults to 1 (undiscounted).

    Returns:
        Tuple of (return, number of steps).
    """
    state: np.ndarray = env.reset(seed)
    total: float = 0.0
    weight: float = 1.0
    t: int = 1
    while True:
        result: StepResult = env.step(policy(state, t))
        total += weight * result.reward
        weight *= gamma
        if result.terminal or result.timeout:
            return total, t
        state = result.next_state
        t += 1


def evaluate_policy(
    env: Environment,
    policy: StepPolicy,
    seeds: Sequence[int],
    gamma: float = 1.0,
) -> np.ndarray:
    """Returns of one episode per seed."""
    return np.array([run_episode(env, policy, int(seed), gamma)[0] for seed in seeds])
