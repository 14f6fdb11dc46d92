"""File contains unit tests for optim.py file."""
import pytest
import torch

from o2orl.approx import (
    MLP,
    adam_step,
    check_gradients,
    flat_grad,
    flat_parameters,
    make_optimizer,
    minimize,
    polyak_update,
)


def _network(seed: int = 0) -> MLP:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return MLP(3, 1, (8,), generator).double()


def test_flat_grad_gives_zero_for_unused_parameters() -> None:
    """Parameters outside the graph get zero entries of the flat gradient."""
    used = torch.nn.Parameter(torch.tensor([2.0]))
    unused = torch.nn.Parameter(torch.tensor([1.0, 1.0]))
    gradient = flat_grad((used**2).sum(), [used, unused])
    torch.testing.assert_close(gradient, torch.tensor([4.0, 0.0, 0.0]))


def test_flat_grad_rejects_non_scalar_and_non_finite_losses() -> None:
    param = torch.nn.Parameter(torch.ones(2))
    with pytest.raises(ValueError):
        flat_grad(param * 2.0, [param])
    with pytest.raises(RuntimeError):
        flat_grad((param * float("inf")).sum(), [param])


def test_adam_first_step_moves_by_learning_rate() -> None:
    """Bias-corrected Adam moves each coordinate by lr * sign(gradient) on step one."""
    param = torch.nn.Parameter(torch.tensor([1.0, -1.0], dtype=torch.float64))
    optimizer = make_optimizer([param], learning_rate=0.1)
    adam_step(optimizer, [param], torch.tensor([3.0, -0.5], dtype=torch.float64))
    torch.testing.assert_close(
        param.detach(), torch.tensor([0.9, -0.9], dtype=torch.float64), atol=1e-6, rtol=0
    )


def test_adam_step_rejects_wrong_gradient_length() -> None:
    param = torch.nn.Parameter(torch.ones(3))
    with pytest.raises(ValueError):
        adam_step(make_optimizer([param]), [param], torch.ones(2))


def test_minimize_decreases_quadratic_loss() -> None:
    network = _network()
    optimizer = make_optimizer(network, learning_rate=1e-2)
    inputs = torch.ones(4, 3, dtype=torch.float64)
    losses = [
        minimize(network(inputs).pow(2).mean(), network, optimizer) for _ in range(50)
    ]
    assert losses[-1] < losses[0]


def test_polyak_update_interpolates_and_copies() -> None:
    target, online = _network(0), _network(1)
    start, goal = flat_parameters(target), flat_parameters(online)
    polyak_update(target, online, 0.25)
    torch.testing.assert_close(flat_parameters(target), 0.75 * start + 0.25 * goal)
    polyak_update(target, online, 1.0)
    torch.testing.assert_close(flat_parameters(target), goal)


@pytest.mark.parametrize("rate", [0.0, -0.1, 1.5])
def test_polyak_update_rejects_invalid_rate(rate: float) -> None:
    with pytest.raises(ValueError):
        polyak_update(_network(0), _network(1), rate)


def test_polyak_update_rejects_shape_mismatch() -> None:
    with pytest.raises(ValueError):
        polyak_update(_network(), MLP(3, 2, (8,)).double(), 0.5)


def test_check_gradients_accepts_exact_gradient() -> None:
    network = _network()
    inputs = torch.randn(5, 3, dtype=torch.float64, generator=torch.Generator().manual_seed(1))

    def loss() -> torch.Tensor:
        return torch.tanh(network(inputs)).pow(2).mean()

    assert check_gradients(loss, network, n_coordinates=20) < 1e-4
