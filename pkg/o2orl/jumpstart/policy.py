"""Composite jump-start policy: guide for the first h steps, explorer afterwards."""
import math
from typing import Optional

import numpy as np
import torch

from o2orl.approx.heads import CategoricalPolicyHead, Policy


def uses_guide(t: int, h: float) -> bool:
    """Guide acts unless t > floor(h)."""
    return not t > math.floor(h)


class CompositePolicy:
    """Guide actor and exploration actor switched by the guide step h."""

    def __init__(self, guide: Policy, explorer: Policy, h: float) -> None:
        self.guide: Policy = guide
        self.explorer: Policy = explorer
        self.h: float = h

    @property
    def discrete(self) -> bool:
        return isinstance(self.explorer, CategoricalPolicyHead)

    def select(self, t: int, h: Optional[float] = None) -> Policy:
        return self.guide if uses_guide(t, self.h if h is None else h) else self.explorer

    def act(
        self,
        state: np.ndarray,
        t: int,
        h: Optional[float] = None,
        generator: Optional[torch.Generator] = None,
        deterministic: bool = False,
    ) -> np.ndarray:
        return self.select(t, h).act(state, generator, deterministic)

    def _guide_mask(self, t: torch.Tensor, h: float) -> torch.Tensor:
        return ~(t > math.floor(h))

    def action_probs(self, states: torch.Tensor, t: torch.Tensor, h: float) -> torch.Tensor:
        """Per-row action probabilities (B x n) of a discrete composite."""
        guide_mask: torch.Tensor = self._guide_mask(t, h).reshape(-1, 1)
        return torch.where(
            guide_mask,
            self.guide.probs(states),  # type: ignore
            self.explorer.probs(states),  # type: ignore
        )

    def sample(
        self,
        states: torch.Tensor,
        t: torch.Tensor,
        h: float,
        generator: Optional[torch.Generator] = None,
    ) -> torch.Tensor:
        """Per-row actions of a continuous composite."""
        dtype: torch.dtype = states.dtype
        noise: torch.Tensor = self.guide.draw_noise(len(states), generator, dtype)
        guide_actions, _ = self.guide.sample(states, noise)
        explorer_actions, _ = self.explorer.sample(states, noise)
        guide_mask: torch.Tensor = self._guide_mask(t, h).reshape(-1, 1)
        return torch.where(guide_mask, guide_actions, explorer_actions)


def js_policy(  # pylint: disable = (too-many-arguments)
    composite: CompositePolicy,
    state: np.ndarray,
    t: int,
    h: float,
    generator: Optional[torch.Generator] = None,
    deterministic: bool = False,
) -> np.ndarray:
    """Act with the explorer if t > floor(h), else with the guide.

    Args:
        composite: Guide and exploration actors.
        state: Current state.
        t: Episode step index.
        h: Guide step.
        generator: Torch generator for sampling.
        deterministic: If True act with the selected actor's mode.

    Returns:
        Action.
    """
    return composite.act(state, t, h, generator, deterministic)
