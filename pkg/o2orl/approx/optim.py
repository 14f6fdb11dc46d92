"""Gradient computation, Adam steps, target-network updates and gradient checks."""
from typing import Callable, Iterable, List, Optional, Sequence, Union

import torch
from torch import nn

from o2orl.array_utils import validate_finite

Params = Union[nn.Module, Sequence[torch.Tensor]]


def _as_list(params: Params) -> List[torch.Tensor]:
    if isinstance(params, nn.Module):
        return list(params.parameters())
    return list(params)


def make_optimizer(
    params: Params,
    learning_rate: float = 3e-4,
    betas: Sequence[float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> torch.optim.Adam:
    """Create Adam optimizer with bias correction.

    Args:
        params: Module or parameter list.
        learning_rate: Step size. Defaults to 3e-4.
        betas: First and second moment decay. Defaults to (0.9, 0.999).
        eps: Numerical epsilon. Defaults to 1e-8.

    Returns:
        Adam optimizer.
    """
    return torch.optim.Adam(
        _as_list(params), lr=learning_rate, betas=(betas[0], betas[1]), eps=eps
    )


def flat_grad(
    loss: torch.Tensor, params: Params, retain_graph: bool = False
) -> torch.Tensor:
    """Compute dLoss/dparams as one flat vector.

    Parameters the loss does not depend on receive zero gradient.

    Args:
        loss: Scalar loss.
        params: Module or parameter list.
        retain_graph: Keep the autograd graph for further differentiation.

    Returns:
        Flat gradient with the same length as the flattened parameters.

    Raises:
        ValueError: if loss is not a scalar.
        RuntimeError: if loss is not finite.
    """
    if loss.dim() != 0:
        raise ValueError(f"Loss must be a scalar, got shape {tuple(loss.shape)}")
    validate_finite(loss, "loss")
    tensors: List[torch.Tensor] = _as_list(params)
    grads = torch.autograd.grad(
        loss, tensors, retain_graph=retain_graph, allow_unused=True
    )
    return torch.cat(
        [
            torch.zeros_like(param).flatten() if grad is None else grad.flatten()
            for param, grad in zip(tensors, grads)
        ]
    )


def adam_step(
    optimizer: torch.optim.Optimizer, params: Params, gradient: torch.Tensor
) -> None:
    """Apply one optimizer step with an explicit flat gradient.

    Args:
        optimizer: Adam optimizer owning `params`.
        params: Module or parameter list.
        gradient: Flat gradient vector.

    Raises:
        ValueError: if gradient length does not match.
        RuntimeError: if gradient is not finite.
    """
    tensors: List[torch.Tensor] = _as_list(params)
    total: int = sum(param.numel() for param in tensors)
    if gradient.numel() != total:
        raise ValueError(f"Gradient of length {gradient.numel()} for {total} params")
    validate_finite(gradient, "gradient")
    offset: int = 0
    for param in tensors:
        count: int = param.numel()
        param.grad = gradient[offset : offset + count].view_as(param).clone()
        offset += count
    optimizer.step()


def minimize(
    loss: torch.Tensor,
    params: Params,
    optimizer: torch.optim.Optimizer,
    retain_graph: bool = False,
) -> float:
    """Take one gradient step on `loss` w.r.t. `params` only.

    Returns:
        Loss value before the step.
    """
    gradient: torch.Tensor = flat_grad(loss, params, retain_graph=retain_graph)
    adam_step(optimizer, params, gradient)
    return float(loss.detach())


def polyak_update(target: Params, online: Params, rate: float) -> None:
    """Update target <- (1 - rate) * target + rate * online in place.

    Raises:
        ValueError: if rate is outside (0, 1] or parameter shapes differ.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"Polyak rate must lie in (0, 1], got {rate}")
    target_params: List[torch.Tensor] = _as_list(target)
    online_params: List[torch.Tensor] = _as_list(online)
    if len(target_params) != len(online_params) or any(
        t.shape != o.shape for t, o in zip(target_params, online_params)
    ):
        raise ValueError("Target and online parameters differ in shape.")
    with torch.no_grad():
        for target_param, online_param in zip(target_params, online_params):
            if rate == 1.0:
                target_param.copy_(online_param)
            else:
                target_param.lerp_(online_param, rate)


def check_gradients(  # pylint: disable = (too-many-locals)
    loss_fn: Callable[[], torch.Tensor],
    params: Params,
    n_coordinates: int = 50,
    step: float = 1e-5,
    generator: Optional[torch.Generator] = None,
    floor: float = 1e-3,
) -> float:
    """Compare analytic gradients with central finite differences.

    `loss_fn` must recompute the loss from the current parameter values and
    be deterministic (fixed batch and noise). Use float64 parameters.

    Args:
        loss_fn: Closure returning the scalar loss.
        params: Module or parameter list to perturb.
        n_coordinates: Number of random coordinates checked. Defaults to 50.
        step: Finite-difference step. Defaults to 1e-5.
        generator: Generator choosing coordinates.
        floor: Lower bound of the relative-error denominator.

    Returns:
        Maximum relative error over the checked coordinates.
    """
    tensors: List[torch.Tensor] = _as_list(params)
    analytic: torch.Tensor = flat_grad(loss_fn(), tensors)
    total: int = analytic.numel()
    chosen: torch.Tensor = torch.randperm(total, generator=generator)[:n_coordinates]
    worst: float = 0.0
    for flat_index in chosen.tolist():
        param, local = _locate(tensors, flat_index)
        with torch.no_grad():
            original: float = float(param.view(-1)[local])
            param.view(-1)[local] = original + step
            upper: float = float(loss_fn())
            param.view(-1)[local] = original - step
            lower: float = float(loss_fn())
            param.view(-1)[local] = original
        numeric: float = (upper - lower) / (2.0 * step)
        exact: float = float(analytic[flat_index])
        scale: float = max(abs(exact), abs(numeric), floor)
        worst = max(worst, abs(exact - numeric) / scale)
    return worst


def _locate(tensors: Iterable[torch.Tensor], flat_index: int):
    offset: int = 0
    for param in tensors:
        if flat_index < offset + param.numel():
            return param, flat_index - offset
        offset += param.numel()
    raise IndexError(flat_index)
