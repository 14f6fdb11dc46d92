"""Score normalization against random and expert reference returns."""
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from o2orl.env.base import EnvSpec

Bounds = Union[EnvSpec, Tuple[float, float], Sequence[float]]


def reference_bounds(bounds: Bounds) -> Tuple[float, float]:
    """Extract (random_return, expert_return).

    Raises:
        ValueError: if bounds are missing or expert does not exceed random.
    """
    pair: Optional[Sequence[float]] = (
        bounds.reference_returns if isinstance(bounds, EnvSpec) else bounds
    )
    if pair is None:
        raise ValueError("Environment has no reference returns for normalization.")
    random_return, expert_return = float(pair[0]), float(pair[1])
    if not np.isfinite([random_return, expert_return]).all():
        raise ValueError(f"Reference returns must be finite, got {pair}")
    if not expert_return > random_return:
        raise ValueError(
            f"Degenerate normalization bounds: random={random_return}, expert={expert_return}"
        )
    return random_return, expert_return


def normalized_return(raw_return, bounds: Bounds):
    """Map raw return(s) affinely so random -> 0 and expert -> 1.

    Args:
        raw_return: Scalar or array of undiscounted returns.
        bounds: EnvSpec or (random_return, expert_return).

    Returns:
        Normalized return(s); values may fall outside [0, 1].
    """
    random_return, expert_return = reference_bounds(bounds)
    scaled = (np.asarray(raw_return, dtype=np.float64) - random_return) / (
        expert_return - random_return
    )
    if np.ndim(scaled) == 0:
        return float(scaled)
    return scaled
