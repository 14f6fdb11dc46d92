"""File contains helpers to validate and convert numpy arrays and tensors."""
from typing import Sequence, Union

import numpy as np
import torch

ArrayLike = Union[np.ndarray, Sequence[float], torch.Tensor]


def to_tensor(
    array: ArrayLike, dtype: torch.dtype = torch.float32
) -> torch.Tensor:
    """Convert array-like value to a tensor without copying tensors.

    Args:
        array: Numpy array, sequence or tensor.
        dtype: Desired tensor type. Defaults to float32.

    Returns:
        Tensor with the requested type.
    """
    if isinstance(array, torch.Tensor):
        return array.to(dtype=dtype)
    return torch.as_tensor(np.asarray(array), dtype=dtype)


def validate_finite(value: torch.Tensor, name: str) -> torch.Tensor:
    """Validate that tensor contains only finite values.

    Args:
        value: Tensor to check.
        name: Human readable name used in the error message.

    Returns:
        The same tensor.

    Raises:
        RuntimeError: if tensor contains NaN or infinity.
    """
    if not bool(torch.isfinite(value).all()):
        raise RuntimeError(
            f"Non-finite {name} encountered: {value.detach().cpu().flatten()[:8]}"
        )
    return value


def validate_width(batch: torch.Tensor, width: int, name: str) -> None:
    """Validate the trailing dimension of a batch.

    Args:
        batch: Tensor of shape (B x width).
        width: Expected width.
        name: Name of the consumer used in the error message.

    Raises:
        ValueError: if shape does not match.
    """
    if batch.dim() < 1 or batch.shape[-1] != width:
        raise ValueError(
            f"{name} expects input width {width}, got shape {tuple(batch.shape)}"
        )


def one_hot(index: int, size: int) -> np.ndarray:
    """Create one-hot float vector.

    Args:
        index: Hot position.
        size: Vector length.

    Returns:
        Array of zeros with 1.0 at `index`.
    """
    vector: np.ndarray = np.zeros(size, dtype=np.float64)
    vector[index] = 1.0
    return vector
