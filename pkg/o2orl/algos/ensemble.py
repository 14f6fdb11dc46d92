"""Reduction of critic-ensemble estimates."""
from enum import Enum
from typing import Sequence, Union

import torch


class ReduceMode(Enum):
    """Enum of ensemble reduce modes."""

    MIN = "min"
    MEDIAN = "median"


def ensemble_reduce(
    values: Union[torch.Tensor, Sequence[float]], mode: ReduceMode
) -> torch.Tensor:
    """Reduce K estimates along the leading dimension.

    Even K uses the lower median.

    Args:
        values: Tensor (K x ...) or sequence of K reals.
        mode: Reduce mode.

    Returns:
        Tensor without the leading dimension.

    Raises:
        ValueError: if there are no estimates.
    """
    tensor: torch.Tensor = (
        values if isinstance(values, torch.Tensor) else torch.as_tensor(values)
    )
    if tensor.dim() == 0 or tensor.shape[0] == 0:
        raise ValueError("Ensemble reduce needs at least one estimate.")
    if mode == ReduceMode.MIN:
        return tensor.min(dim=0).values
    return tensor.median(dim=0).values
